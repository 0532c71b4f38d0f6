#include "ld/repro.hpp"

#include <cmath>
#include <cstdio>

namespace ld {

namespace {

GridSpec2D grid_of(double x0, double x1, double y0, double y1) {
  GridSpec2D g;
  g.ranges = {{{x0, x1}, {y0, y1}}};
  g.resolution = {501, 501};
  return g;
}

LDConfig ld_of(double tau_f, double tau_b, double escape_radius = 0.0) {
  LDConfig cfg;
  cfg.p = 0.5;
  cfg.tau_f = tau_f;
  cfg.tau_b = tau_b;
  if (escape_radius > 0.0) cfg.escape = EscapeRegion::ball(escape_radius);
  return cfg;
}

std::vector<ReproTarget> build_targets() {
  std::vector<ReproTarget> t;

  // saddle with distinct expansion/contraction rates
  {
    ReproTarget r;
    r.id = "saddle-same-tau";
    r.system = "linear_saddle";
    r.params = {{"lambda", 1.0}, {"mu", 2.0}};
    r.grid = grid_of(-1, 1, -1, 1);
    r.ld = ld_of(8.0, 8.0);
    t.push_back(r);

    r.id = "saddle-balanced";
    r.ld = ld_of(8.0, 0.0);
    r.ld.auto_balance = true;  // tau_b = 4.3466 from the system rates
    t.push_back(r);
  }
  {
    ReproTarget r;
    r.id = "nonlinear-saddle";
    r.system = "nonlinear_saddle";
    r.params = {{"lambda", -2.0}, {"mu", 1.0}};
    r.grid = grid_of(-1.5, 1.5, -1.5, 1.5);
    r.ld = ld_of(26.0, 25.0);
    t.push_back(r);
  }

  // Hopf normal form across the bifurcation
  for (auto [suffix, beta] : std::initializer_list<std::pair<const char*, double>>{
           {"neg", -0.5}, {"0", 0.0}, {"pos", 0.5}}) {
    ReproTarget r;
    r.id = std::string("hopf-beta-") + suffix;
    r.system = "hopf";
    r.params = {{"beta", beta}, {"sigma", 1.0}};
    r.grid = grid_of(-2, 2, -2, 2);
    r.ld = ld_of(8.0, 8.0, 4.0);
    t.push_back(r);
  }

  // van der Pol limit cycle growth
  for (double mu : {0.1, 0.5, 1.5, 3.0}) {
    ReproTarget r;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", mu);
    r.id = std::string("vdp-") + buf;
    r.system = "vanderpol";
    r.params = {{"mu", mu}};
    r.grid = grid_of(-4, 4, -4, 4);
    r.ld = ld_of(50.0, 50.0, 20.0);
    t.push_back(r);
  }

  // slow manifolds
  {
    ReproTarget r;
    r.id = "slow-manifold";
    r.system = "nonlinear_saddle";
    r.params = {{"lambda", -1.0}, {"mu", -0.05}};
    r.grid = grid_of(-1, 1, -0.25, 1.25);
    r.ld = ld_of(5.0, 5.0);
    t.push_back(r);
  }
  {
    ReproTarget r;
    r.id = "bead";
    r.system = "bead_hoop";
    r.params = {{"epsilon", 0.02}, {"mu", 2.3}};
    r.grid = grid_of(-M_PI, M_PI, -2.0, 2.0);
    r.ld = ld_of(10.0, 10.0);
    t.push_back(r);
  }
  {
    ReproTarget r;
    r.id = "lienard";
    r.system = "vdp_lienard";
    r.params = {{"mu", 10.0}};
    r.grid = grid_of(-2.5, 2.5, -1.0, 1.0);
    r.ld = ld_of(50.0, 50.0, 6.0);
    t.push_back(r);
  }

  // Duffing regimes
  {
    ReproTarget r;
    r.id = "duffing-conservative";
    r.system = "duffing";
    r.params = {{"alpha", 1.0}, {"beta", 1.0}, {"delta", 0.0}, {"gamma", 0.0},
                {"omega", 1.0}};
    r.grid = grid_of(-2, 2, -1.5, 1.5);
    r.ld = ld_of(20.0, 20.0);
    t.push_back(r);

    r.id = "duffing-damped";
    r.params["delta"] = 0.3;
    r.ld = ld_of(25.0, 25.0);
    t.push_back(r);

    r.id = "duffing-forced";
    r.params = {{"alpha", 1.0}, {"beta", 1.0}, {"delta", 0.3}, {"gamma", 0.5},
                {"omega", 1.2}};
    r.ld = ld_of(20.0, 20.0);
    r.render_layer = "backward";
    r.with_strobe = true;
    r.strobe_period = 2.0 * M_PI / 1.2;
    r.strobe_periods = 15000;
    r.strobe_skip = 0;
    r.strobe_ic = {1.0, 0.0};
    t.push_back(r);

    r.id = "duffing-ueda";
    r.params = {{"alpha", 0.0}, {"beta", 1.0}, {"delta", 0.05}, {"gamma", 7.5},
                {"omega", 1.0}};
    r.grid = grid_of(-4, 4, -10, 10);
    r.ld = ld_of(50.0, 50.0);
    r.render_layer = "backward";
    r.strobe_period = 2.0 * M_PI;
    t.push_back(r);
  }

  // damped double well sections
  for (double gamma : {0.1, 0.25, 1.0}) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", gamma);
    for (auto [name, sid] :
         std::initializer_list<std::pair<const char*, SectionId>>{
             {"sigma1", SectionId::sigma1}, {"sigma2", SectionId::sigma2}}) {
      ReproTarget r;
      r.id = std::string("dwell-") + name + "-gamma" + buf;
      r.system = "double_well_2dof";
      r.params = {{"gamma_x", gamma}, {"gamma_y", gamma}};
      r.grid = grid_of(-1.5, 1.5, -0.8, 0.8);
      r.ld = ld_of(15.0, 15.0);
      r.section = SectionSpec{sid, -0.4, 0.05};
      t.push_back(r);
    }
  }
  {
    ReproTarget r;
    r.id = "dwell-sigma3";
    r.system = "double_well_2dof";
    r.params = {{"gamma_x", 0.25}, {"gamma_y", 0.25}};
    r.grid = grid_of(-0.55, 0.55, -0.55, 0.55);
    r.ld = ld_of(15.0, 15.0);
    r.section = SectionSpec{SectionId::sigma3, -0.4, 0.05};
    r.render_layer = "forward";
    t.push_back(r);
  }

  return t;
}

}  // namespace

const std::vector<ReproTarget>& repro_targets() {
  static const std::vector<ReproTarget> targets = build_targets();
  return targets;
}

const ReproTarget& repro_target(const std::string& id) {
  for (const auto& t : repro_targets()) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown repro target: '" + id + "'");
}

std::vector<std::string> repro_target_ids() {
  std::vector<std::string> ids;
  for (const auto& t : repro_targets()) ids.push_back(t.id);
  return ids;
}

}  // namespace ld
