#include "ld/hamsec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "ld/integrate_core.hpp"
#include "parallel.hpp"
#include "vector_fields.hpp"

namespace ld {

namespace {

struct WellParams {
  double m1, m2, a, b, omega;
};

WellParams well_params(const SystemSpec& spec) {
  if (spec.id != SystemId::double_well_2dof) {
    throw ConfigError("section operations require the double_well_2dof system");
  }
  return {spec.param("m1"), spec.param("m2"), spec.param("a"), spec.param("b"),
          spec.param("omega")};
}

double potential(const WellParams& w, double x, double y) {
  return w.a / 4.0 * x * x * x * x - w.b / 2.0 * x * x +
         w.omega * w.omega / 2.0 * y * y;
}

// Largest |x| with V(x, 0) <= h0 (the outer root of the quartic).
double x_extent(const WellParams& w, double h0) {
  const double u = (w.b + std::sqrt(w.b * w.b + 4.0 * w.a * h0)) / w.a;
  return std::sqrt(u);
}

}  // namespace

std::string to_string(SectionId id) {
  switch (id) {
    case SectionId::sigma1: return "sigma1";
    case SectionId::sigma2: return "sigma2";
    case SectionId::sigma3: return "sigma3";
  }
  return "unknown";
}

SectionId section_id_from_string(const std::string& name) {
  if (name == "sigma1") return SectionId::sigma1;
  if (name == "sigma2") return SectionId::sigma2;
  if (name == "sigma3") return SectionId::sigma3;
  throw ConfigError("unknown section: '" + name + "'");
}

std::array<std::string, 2> section_axes(SectionId id) {
  switch (id) {
    case SectionId::sigma1: return {"x", "px"};
    case SectionId::sigma2: return {"x", "y"};
    case SectionId::sigma3: return {"y", "py"};
  }
  throw ConfigError("unknown section id");
}

double hamiltonian_energy(const SystemSpec& spec,
                          std::span<const double> state) {
  const WellParams w = well_params(spec);
  if (state.size() != 4) throw ConfigError("expected a 4D state");
  return state[2] * state[2] / (2.0 * w.m1) +
         state[3] * state[3] / (2.0 * w.m2) + potential(w, state[0], state[1]);
}

std::optional<StateVec> seed_on_section(const SystemSpec& spec,
                                        const SectionSpec& section, double u,
                                        double v) {
  const WellParams w = well_params(spec);
  StateVec out;
  out.coords.assign(4, 0.0);
  switch (section.id) {
    case SectionId::sigma1: {
      // grid (x, px); solve for p_y > 0 on y = 0
      const double disc =
          2.0 * w.m2 * (section.h0 - v * v / (2.0 * w.m1) - potential(w, u, 0.0));
      if (disc < 0.0) return std::nullopt;
      out.coords = {u, 0.0, v, std::sqrt(disc)};
      return out;
    }
    case SectionId::sigma2: {
      // grid (x, y); solve for p_x > 0 on p_y = 0
      const double disc = 2.0 * w.m1 * (section.h0 - potential(w, u, v));
      if (disc < 0.0) return std::nullopt;
      out.coords = {u, v, std::sqrt(disc), 0.0};
      return out;
    }
    case SectionId::sigma3: {
      // grid (y, py); solve for p_x > 0 on x = x_value
      const double disc =
          2.0 * w.m1 * (section.h0 - v * v / (2.0 * w.m2) -
                        potential(w, section.x_value, u));
      if (disc < 0.0) return std::nullopt;
      out.coords = {section.x_value, u, std::sqrt(disc), v};
      return out;
    }
  }
  throw ConfigError("unknown section id");
}

LDField compute_section_ld_field(const SystemSpec& spec,
                                 const SectionSpec& section,
                                 const GridSpec2D& grid_in,
                                 const LDConfig& ldcfg,
                                 const IntegratorConfig& intcfg, int workers) {
  well_params(spec);
  GridSpec2D grid = grid_in;
  grid.axis_names = section_axes(section.id);
  grid.fixed_coords.clear();
  grid.validate();
  if (!(ldcfg.p > 0.0 && ldcfg.p <= 1.0)) {
    throw ConfigError("p must lie in (0, 1]");
  }
  intcfg.validate();
  ldcfg.escape.validate(spec.dim);

  LDField field;
  field.grid = grid;
  field.meta.system = spec;
  field.meta.ld = ldcfg;
  field.meta.integrator = intcfg;
  field.meta.section =
      SectionInfo{to_string(section.id), section.x_value, section.h0};

  const std::size_t count = field.node_count();
  field.forward.assign(count, 0.0);
  field.backward.assign(count, 0.0);
  field.total.assign(count, 0.0);
  field.escape_mask.assign(count, 0);
  field.valid_mask.assign(count, 0);

  const int n1 = field.n1();
  std::atomic<long> failures{0};

  detail::parallel_for(count, workers, [&](std::size_t node) {
    const int i = static_cast<int>(node) / n1;
    const int j = static_cast<int>(node) % n1;
    const auto seed =
        seed_on_section(spec, section, grid.coord0(i), grid.coord1(j));
    if (!seed) return;  // energetically forbidden: stays masked out

    field.valid_mask[node] = 1;
    double fwd = 0.0, bwd = 0.0;
    bool escaped = false, failed = false;
    if (ldcfg.tau_f > 0.0) {
      const auto r = accumulate_ld(spec, *seed, grid.t0, ldcfg.tau_f,
                                   Direction::forward, ldcfg.p, intcfg,
                                   ldcfg.escape);
      fwd = r.ld_value;
      escaped |= r.escaped;
      failed |= r.failed;
    }
    if (ldcfg.tau_b > 0.0) {
      const auto r = accumulate_ld(spec, *seed, grid.t0, ldcfg.tau_b,
                                   Direction::backward, ldcfg.p, intcfg,
                                   ldcfg.escape);
      bwd = r.ld_value;
      escaped |= r.escaped;
      failed |= r.failed;
    }
    field.forward[node] = fwd;
    field.backward[node] = bwd;
    field.total[node] = fwd + bwd;
    field.escape_mask[node] = escaped ? 1 : 0;
    if (failed) failures.fetch_add(1, std::memory_order_relaxed);
  });

  field.meta.failure_count = failures.load();
  return field;
}

std::vector<std::array<double, 2>> energy_boundary(const SystemSpec& spec,
                                                   const SectionSpec& section,
                                                   int n_samples) {
  const WellParams w = well_params(spec);
  std::vector<std::array<double, 2>> curve;
  if (n_samples < 8) n_samples = 8;

  switch (section.id) {
    case SectionId::sigma1: {
      // px^2/(2 m1) + V(x, 0) = h0: upper branch left-to-right, then lower.
      const double xm = x_extent(w, section.h0);
      const int half = n_samples / 2;
      for (int k = 0; k <= half; ++k) {
        const double x = -xm + 2.0 * xm * k / half;
        const double d = 2.0 * w.m1 * (section.h0 - potential(w, x, 0.0));
        curve.push_back({x, std::sqrt(std::max(0.0, d))});
      }
      for (int k = half; k >= 0; --k) {
        const double x = -xm + 2.0 * xm * k / half;
        const double d = 2.0 * w.m1 * (section.h0 - potential(w, x, 0.0));
        curve.push_back({x, -std::sqrt(std::max(0.0, d))});
      }
      break;
    }
    case SectionId::sigma2: {
      // V(x, y) = h0 contour.
      const double xm = x_extent(w, section.h0);
      const int half = n_samples / 2;
      for (int k = 0; k <= half; ++k) {
        const double x = -xm + 2.0 * xm * k / half;
        const double rest = section.h0 - potential(w, x, 0.0);
        const double y = std::sqrt(std::max(0.0, 2.0 * rest)) / w.omega;
        curve.push_back({x, y});
      }
      for (int k = half; k >= 0; --k) {
        const double x = -xm + 2.0 * xm * k / half;
        const double rest = section.h0 - potential(w, x, 0.0);
        const double y = std::sqrt(std::max(0.0, 2.0 * rest)) / w.omega;
        curve.push_back({x, -y});
      }
      break;
    }
    case SectionId::sigma3: {
      // Ellipse py^2/(2 m2) + (omega^2/2) y^2 = h0 - V(x_value, 0).
      const double e3 = section.h0 - potential(w, section.x_value, 0.0);
      if (e3 <= 0.0) break;
      const double ay = std::sqrt(2.0 * e3) / w.omega;
      const double ap = std::sqrt(2.0 * w.m2 * e3);
      for (int k = 0; k <= n_samples; ++k) {
        const double th = 2.0 * M_PI * k / n_samples;
        curve.push_back({ay * std::cos(th), ap * std::sin(th)});
      }
      break;
    }
  }
  return curve;
}

std::string to_string(TransitionClass c) {
  switch (c) {
    case TransitionClass::reactive: return "reactive";
    case TransitionClass::nonreactive: return "nonreactive";
    case TransitionClass::asymptotic_or_timeout: return "asymptotic_or_timeout";
  }
  return "unknown";
}

TransitionLabel classify_transition(const SystemSpec& spec,
                                    const StateVec& state, double t_max,
                                    const IntegratorConfig& cfg,
                                    double settle_radius) {
  const WellParams w = well_params(spec);
  cfg.validate();
  if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (static_cast<int>(state.coords.size()) != 4) {
    throw ConfigError("expected a 4D state");
  }

  const bool has_wells = w.a != 0.0 && w.b / w.a > 0.0;
  const double xs = has_wells ? std::sqrt(w.b / w.a) : 0.0;

  auto dist2_to_well = [&](const double* y, double well_x) {
    const double d0 = y[0] - well_x;
    return d0 * d0 + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
  };

  std::array<double, detail::kMaxState> y{};
  std::copy(state.coords.begin(), state.coords.end(), y.begin());

  TransitionLabel out;
  double prev_x = y[0];
  detail::CoreOutcome outcome;

  detail::with_vector_field(spec, [&](const auto& field) {
    auto rhs = [&](double s, const double* v, double* dv) {
      field(state.t + s, v, dv);
    };
    auto event = [&](const double* v) {
      if (!has_wells) return -1.0;
      const double d2 =
          std::min(dist2_to_well(v, xs), dist2_to_well(v, -xs));
      return settle_radius - std::sqrt(d2);
    };
    auto observer = [&](double, double, const double* ynew, auto&&) {
      if ((prev_x < 0.0 && ynew[0] > 0.0) || (prev_x > 0.0 && ynew[0] < 0.0)) {
        ++out.crossings;
      }
      if (ynew[0] != 0.0) prev_x = ynew[0];
    };
    outcome = detail::integrate_core(4, rhs, y.data(), t_max, cfg, event,
                                     observer);
  });

  out.failed = outcome.failed;
  if (outcome.event_hit && !outcome.failed) {
    const bool right = dist2_to_well(y.data(), xs) <= dist2_to_well(y.data(), -xs);
    out.label = right ? TransitionClass::reactive : TransitionClass::nonreactive;
    out.settle_time = outcome.s_stop;
  } else {
    out.label = TransitionClass::asymptotic_or_timeout;
  }
  return out;
}

RidgeLoop close_ridge_loop(const RidgeSet& ridges, int angle_bins) {
  RidgeLoop loop;
  if (ridges.points.empty()) return loop;
  if (angle_bins < 8) angle_bins = 8;

  double cx = 0.0, cy = 0.0;
  for (const auto& pt : ridges.points) {
    cx += pt.x;
    cy += pt.y;
  }
  cx /= static_cast<double>(ridges.points.size());
  cy /= static_cast<double>(ridges.points.size());
  loop.centroid = {cx, cy};

  struct Member {
    double r;
    double x, y;
  };
  std::vector<std::vector<Member>> bins(angle_bins);
  for (const auto& pt : ridges.points) {
    const double dx = pt.x - cx, dy = pt.y - cy;
    const double th = std::atan2(dy, dx);  // [-pi, pi]
    int b = static_cast<int>((th + M_PI) / (2.0 * M_PI) * angle_bins);
    b = std::clamp(b, 0, angle_bins - 1);
    bins[b].push_back({std::hypot(dx, dy), pt.x, pt.y});
  }

  for (auto& bin : bins) {
    if (bin.empty()) continue;
    std::sort(bin.begin(), bin.end(),
              [](const Member& a, const Member& b) { return a.r < b.r; });
    const Member& med = bin[bin.size() / 2];
    loop.polygon.push_back({med.x, med.y});
  }

  // shoelace
  double area = 0.0;
  const std::size_t n = loop.polygon.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = loop.polygon[k];
    const auto& q = loop.polygon[(k + 1) % n];
    area += p[0] * q[1] - q[0] * p[1];
  }
  loop.area = std::abs(area) / 2.0;
  return loop;
}

bool point_in_polygon(std::span<const std::array<double, 2>> poly, double x,
                      double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t k = 0, m = n - 1; k < n; m = k++) {
    const auto& a = poly[k];
    const auto& b = poly[m];
    if ((a[1] > y) != (b[1] > y)) {
      const double t = (y - a[1]) / (b[1] - a[1]);
      if (x < a[0] + t * (b[0] - a[0])) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polygon_cells(std::span<const std::array<double, 2>> poly,
                                 double x, double y, double dx, double dy) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = poly[k];
    const auto& b = poly[(k + 1) % n];
    // segment a-b in cell-normalized coordinates
    const double ax = a[0] / dx, ay = a[1] / dy;
    const double bx = b[0] / dx, by = b[1] / dy;
    const double px = x / dx, py = y / dy;
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = px - (ax + t * vx), ey = py - (ay + t * vy);
    best = std::min(best, ex * ex + ey * ey);
  }
  return std::sqrt(best);
}

}  // namespace ld
