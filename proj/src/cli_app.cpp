#include "ld/cli_app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ld/extract.hpp"
#include "ld/hamsec.hpp"
#include "ld/io_render.hpp"
#include "ld/repro.hpp"
#include "parallel.hpp"

namespace ld {

namespace {

std::map<std::string, double> parse_kv_pairs(
    const std::vector<std::string>& items, const char* what) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(std::string(what) + " expects name=value, got '" +
                        item + "'");
    }
    const std::string key = item.substr(0, eq);
    char* end = nullptr;
    const double value = std::strtod(item.c_str() + eq + 1, &end);
    if (end == item.c_str() + eq + 1 || *end != '\0') {
      throw ConfigError(std::string(what) + " '" + key +
                        "' has a malformed value");
    }
    out[key] = value;
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str() + pos, &end);
    if (end == text.c_str() + pos) {
      throw ConfigError(std::string(what) + ": malformed number list '" +
                        text + "'");
    }
    out.push_back(v);
    pos = end - text.c_str();
    if (pos < text.size() && text[pos] == ',') ++pos;
  }
  return out;
}

// Shared per-command option state.
struct CommonOpts {
  std::string system;
  std::vector<std::string> params;
  std::string grid_text;
  int res_override = 0;
  std::string axes_text;
  std::vector<std::string> fixed;
  double t0 = 0.0;

  double p = 0.5;
  double tau = -1.0;  // sets both horizons when >= 0
  double tau_f = -1.0;
  double tau_b = -1.0;
  bool auto_balance = false;
  double balance_lambda = 0.0;
  double balance_mu = 0.0;
  double escape_radius = 0.0;
  std::string escape_center;

  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = 0.1;
  std::string method = "rk45_adaptive";
  double fixed_step = 1e-3;

  std::string out_path;
  std::string png_path;
  std::string layer = "total";
  std::string colormap = "viridis";
  std::string normalize = "none";
};

void add_integrator_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--rel-tol", o.rel_tol, "relative tolerance");
  cmd->add_option("--abs-tol", o.abs_tol, "absolute tolerance");
  cmd->add_option("--max-step", o.max_step, "adaptive step-size cap");
  cmd->add_option("--method", o.method, "rk45_adaptive | rk4_fixed");
  cmd->add_option("--fixed-step", o.fixed_step, "rk4_fixed step size");
}

void add_ld_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--p", o.p, "descriptor exponent p in (0,1]");
  cmd->add_option("--tau", o.tau, "sets both horizons");
  cmd->add_option("--tau-f", o.tau_f, "forward horizon");
  cmd->add_option("--tau-b", o.tau_b, "backward horizon");
  cmd->add_flag("--auto-balance", o.auto_balance,
                "derive tau_b from the saddle rates");
  cmd->add_option("--balance-lambda", o.balance_lambda,
                  "expansion rate for --auto-balance");
  cmd->add_option("--balance-mu", o.balance_mu,
                  "contraction rate for --auto-balance");
  cmd->add_option("--escape-radius", o.escape_radius,
                  "stop trajectories leaving this ball (0 = off)");
  cmd->add_option("--escape-center", o.escape_center,
                  "comma-separated escape center (default origin)");
}

IntegratorConfig integrator_from(const CommonOpts& o) {
  IntegratorConfig cfg;
  cfg.rel_tol = o.rel_tol;
  cfg.abs_tol = o.abs_tol;
  cfg.max_step = o.max_step;
  cfg.fixed_step = o.fixed_step;
  if (o.method == "rk45_adaptive") {
    cfg.method = Method::rk45_adaptive;
  } else if (o.method == "rk4_fixed") {
    cfg.method = Method::rk4_fixed;
  } else {
    throw ConfigError("unknown method '" + o.method + "'");
  }
  cfg.validate();
  return cfg;
}

LDConfig ld_from(const CommonOpts& o) {
  LDConfig cfg;
  cfg.p = o.p;
  cfg.tau_f = o.tau >= 0.0 ? o.tau : 0.0;
  cfg.tau_b = o.tau >= 0.0 ? o.tau : 0.0;
  if (o.tau_f >= 0.0) cfg.tau_f = o.tau_f;
  if (o.tau_b >= 0.0) cfg.tau_b = o.tau_b;
  cfg.auto_balance = o.auto_balance;
  cfg.balance_lambda = o.balance_lambda;
  cfg.balance_mu = o.balance_mu;
  if (o.escape_radius > 0.0) {
    cfg.escape = EscapeRegion::ball(o.escape_radius);
    if (!o.escape_center.empty()) {
      cfg.escape.center = parse_number_list(o.escape_center, "--escape-center");
    }
  }
  cfg.validate();
  return cfg;
}

GridSpec2D grid_from(const CommonOpts& o, const SystemSpec& spec) {
  GridSpec2D grid;
  const auto& names = coordinate_names(spec.id);
  grid.axis_names = {names[0], names[1]};
  if (!o.axes_text.empty()) {
    const auto comma = o.axes_text.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("--axes expects 'name0,name1'");
    }
    grid.axis_names = {o.axes_text.substr(0, comma),
                       o.axes_text.substr(comma + 1)};
  }
  if (!o.grid_text.empty()) {
    const GridParse parsed = parse_grid_string(o.grid_text);
    grid.ranges = parsed.ranges;
    grid.resolution = parsed.resolution;
  }
  if (o.res_override > 0) {
    grid.resolution = {o.res_override, o.res_override};
  }
  grid.fixed_coords = parse_kv_pairs(o.fixed, "--fix");
  grid.t0 = o.t0;
  return grid;
}

void maybe_render(const LDField& field, const CommonOpts& o) {
  if (o.png_path.empty()) return;
  RenderConfig rc;
  rc.layer = o.layer;
  rc.colormap = o.colormap;
  render_png(field, rc, o.png_path);
}

int run_field(const CommonOpts& o, int workers) {
  const SystemSpec spec =
      make_system(o.system, parse_kv_pairs(o.params, "--param"));
  const GridSpec2D grid = grid_from(o, spec);
  const LDConfig ldcfg = ld_from(o);
  const IntegratorConfig intcfg = integrator_from(o);

  LDField field = compute_ld_field(spec, grid, ldcfg, intcfg, workers);
  if (o.normalize == "minmax") {
    field = normalize_field(field, NormalizeMode::minmax);
  } else if (o.normalize != "none") {
    throw ConfigError("unknown normalize mode '" + o.normalize + "'");
  }
  write_field(field, o.out_path);
  maybe_render(field, o);
  return 0;
}

struct ExtractOpts {
  std::string in_path;
  std::string layer = "total";
  std::string op = "gradient_norm";
  double percentile = 95.0;
  int escape_exclusion = 1;
  bool nms = false;
  std::string out_path;
  std::string png_path;
  std::string colormap = "viridis";
};

int run_extract(const ExtractOpts& o) {
  const LDField field = read_field(o.in_path);
  RidgeOptions opts;
  opts.percentile = o.percentile;
  opts.escape_boundary_exclusion = o.escape_exclusion;
  opts.nonmax_suppression = o.nms;
  const RidgeSet ridges =
      extract_ridges(field, layer_kind_from_string(o.layer),
                     ridge_operator_from_string(o.op), opts);
  export_ridges_csv(ridges, o.out_path);
  if (!o.png_path.empty()) {
    RenderConfig rc;
    rc.layer = o.layer;
    rc.colormap = o.colormap;
    Overlay overlay;
    overlay.color = {255, 64, 64};
    overlay.marker_radius = 0;
    for (const auto& pt : ridges.points) overlay.markers.push_back({pt.x, pt.y});
    rc.overlays.push_back(std::move(overlay));
    render_png(field, rc, o.png_path);
  }
  return 0;
}

struct SectionOpts {
  std::string section = "sigma1";
  double gamma = 0.25;
  double h0 = 0.05;
  double x_value = -0.4;
};

int run_section(const CommonOpts& o, const SectionOpts& s, int workers) {
  auto params = parse_kv_pairs(o.params, "--param");
  params["gamma_x"] = s.gamma;
  params["gamma_y"] = s.gamma;
  const SystemSpec spec = make_system("double_well_2dof", params);
  SectionSpec section;
  section.id = section_id_from_string(s.section);
  section.h0 = s.h0;
  section.x_value = s.x_value;

  GridSpec2D grid;
  if (!o.grid_text.empty()) {
    const GridParse parsed = parse_grid_string(o.grid_text);
    grid.ranges = parsed.ranges;
    grid.resolution = parsed.resolution;
  }
  if (o.res_override > 0) grid.resolution = {o.res_override, o.res_override};
  grid.t0 = o.t0;

  const LDConfig ldcfg = ld_from(o);
  const IntegratorConfig intcfg = integrator_from(o);
  LDField field =
      compute_section_ld_field(spec, section, grid, ldcfg, intcfg, workers);
  write_field(field, o.out_path);
  maybe_render(field, o);
  return 0;
}

struct StrobeOpts {
  std::string ic_text = "1,0";
  double period = 0.0;  // 0 = 2*pi/omega
  long n_periods = 100;
  long n_skip = 0;
};

int run_strobe(const CommonOpts& o, const StrobeOpts& s) {
  const SystemSpec spec =
      make_system(o.system, parse_kv_pairs(o.params, "--param"));
  StateVec ic;
  ic.coords = parse_number_list(s.ic_text, "--ic");
  ic.t = o.t0;
  double period = s.period;
  if (period <= 0.0) {
    const auto it = spec.params.find("omega");
    if (it == spec.params.end() || it->second == 0.0) {
      throw ConfigError("--period required for systems without a forcing omega");
    }
    period = 2.0 * M_PI / it->second;
  }
  const auto result = strobe_map(spec, ic, o.t0, period, s.n_periods, s.n_skip,
                                 integrator_from(o));

  std::ofstream out(o.out_path, std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + o.out_path + "' for write");
  out << "t";
  for (const auto& name : coordinate_names(spec.id)) out << ',' << name;
  out << '\n';
  char buf[40];
  for (const auto& pt : result.points) {
    std::snprintf(buf, sizeof buf, "%.17g", pt.t);
    out << buf;
    for (double c : pt.coords) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (result.failed) {
    std::cerr << "strobe: integration failed, wrote partial point list\n";
    return 1;
  }
  return 0;
}

struct ClassifyOpts {
  double t_max = 200.0;
  double settle_radius = 1e-3;
};

int run_classify(const CommonOpts& o, const SectionOpts& s,
                 const ClassifyOpts& c, int workers) {
  auto params = parse_kv_pairs(o.params, "--param");
  params["gamma_x"] = s.gamma;
  params["gamma_y"] = s.gamma;
  const SystemSpec spec = make_system("double_well_2dof", params);
  SectionSpec section;
  section.id = section_id_from_string(s.section);
  section.h0 = s.h0;
  section.x_value = s.x_value;

  GridSpec2D grid;
  grid.ranges = {{{-0.55, 0.55}, {-0.55, 0.55}}};
  grid.resolution = {101, 101};
  if (!o.grid_text.empty()) {
    const GridParse parsed = parse_grid_string(o.grid_text);
    grid.ranges = parsed.ranges;
    grid.resolution = parsed.resolution;
  }
  if (o.res_override > 0) grid.resolution = {o.res_override, o.res_override};
  const IntegratorConfig intcfg = integrator_from(o);

  const auto axes = section_axes(section.id);
  const std::size_t count =
      std::size_t(grid.resolution[0]) * std::size_t(grid.resolution[1]);
  std::vector<std::optional<TransitionLabel>> labels(count);
  detail::parallel_for(count, workers, [&](std::size_t node) {
    const int i = static_cast<int>(node) / grid.resolution[1];
    const int j = static_cast<int>(node) % grid.resolution[1];
    const auto seed =
        seed_on_section(spec, section, grid.coord0(i), grid.coord1(j));
    if (!seed) return;
    labels[node] =
        classify_transition(spec, *seed, c.t_max, intcfg, c.settle_radius);
  });

  std::ofstream out(o.out_path, std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + o.out_path + "' for write");
  out << axes[0] << ',' << axes[1] << ",label,settle_time,crossings\n";
  char buf[40];
  for (int i = 0; i < grid.resolution[0]; ++i) {
    for (int j = 0; j < grid.resolution[1]; ++j) {
      const auto& label = labels[std::size_t(i) * grid.resolution[1] + j];
      if (!label) continue;  // energetically forbidden
      std::snprintf(buf, sizeof buf, "%.17g", grid.coord0(i));
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", grid.coord1(j));
      out << buf << ',' << to_string(label->label) << ',';
      if (label->settle_time) {
        std::snprintf(buf, sizeof buf, "%.17g", *label->settle_time);
        out << buf;
      }
      out << ',' << label->crossings << '\n';
    }
  }
  return 0;
}

int run_repro(const std::string& id, const std::string& outdir,
              int res_override, int workers) {
  const ReproTarget& target = repro_target(id);
  const SystemSpec spec = make_system(target.system, target.params);
  GridSpec2D grid = target.grid;
  if (res_override > 0) grid.resolution = {res_override, res_override};
  const IntegratorConfig intcfg;

  std::filesystem::create_directories(outdir);
  const std::filesystem::path base =
      std::filesystem::path(outdir) / target.id;

  LDField field =
      target.section
          ? compute_section_ld_field(spec, *target.section, grid, target.ld,
                                     intcfg, workers)
          : compute_ld_field(spec, grid, target.ld, intcfg, workers);
  write_field(field, base.string() + ".ldf");

  RenderConfig rc;
  rc.layer = target.render_layer;
  render_png(field, rc, base.string() + ".png");

  if (target.with_strobe) {
    StateVec ic;
    ic.coords = {target.strobe_ic[0], target.strobe_ic[1]};
    const auto strobe = strobe_map(spec, ic, 0.0, target.strobe_period,
                                   target.strobe_periods, target.strobe_skip,
                                   intcfg);
    std::ofstream out(base.string() + "_strobe.csv", std::ios::trunc);
    out << "t";
    for (const auto& name : coordinate_names(spec.id)) out << ',' << name;
    out << '\n';
    char buf[40];
    for (const auto& pt : strobe.points) {
      std::snprintf(buf, sizeof buf, "%.17g", pt.t);
      out << buf;
      for (double c : pt.coords) {
        std::snprintf(buf, sizeof buf, "%.17g", c);
        out << ',' << buf;
      }
      out << '\n';
    }
    if (strobe.failed) return 1;
  }
  return 0;
}

}  // namespace

GridParse parse_grid_string(const std::string& text) {
  GridParse out;
  double a, b, c, d;
  int n0 = 0, n1 = 0;
  if (std::sscanf(text.c_str(), "[%lf,%lf]x[%lf,%lf]@%dx%d", &a, &b, &c, &d,
                  &n0, &n1) == 6) {
    out.ranges = {{{a, b}, {c, d}}};
    out.resolution = {n0, n1};
  } else if (std::sscanf(text.c_str(), "[%lf,%lf]x[%lf,%lf]@%d", &a, &b, &c,
                         &d, &n0) == 5) {
    out.ranges = {{{a, b}, {c, d}}};
    out.resolution = {n0, n0};
  } else {
    throw ConfigError("malformed grid '" + text +
                      "', expected [lo,hi]x[lo,hi]@N or ...@NxM");
  }
  if (out.resolution[0] < 2 || out.resolution[1] < 2) {
    throw ConfigError("grid resolution must be at least 2");
  }
  if (!(out.ranges[0][0] < out.ranges[0][1]) ||
      !(out.ranges[1][0] < out.ranges[1][1])) {
    throw ConfigError("grid ranges require lo < hi");
  }
  return out;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"p-norm Lagrangian descriptor engine for dissipative systems"};
  app.set_config("--config", "", "options file (TOML/INI keys match flags)");
  int workers = 0;
  app.add_option("--workers", workers,
                 "worker threads (0 = hardware concurrency)")
      ->envname("LDPAINT_WORKERS");

  CommonOpts field_opts;
  auto* field_cmd = app.add_subcommand(
      "field", "compute a descriptor field over a grid of initial conditions");
  field_cmd->add_option("--system", field_opts.system, "built-in system name")
      ->required();
  field_cmd->add_option("--param", field_opts.params,
                        "parameter override name=value");
  field_cmd->add_option("--grid", field_opts.grid_text,
                        "grid \"[lo,hi]x[lo,hi]@N\"");
  field_cmd->add_option("--res", field_opts.res_override,
                        "override resolution (NxN)");
  field_cmd->add_option("--axes", field_opts.axes_text,
                        "grid axes as coordinate names 'a,b'");
  field_cmd->add_option("--fix", field_opts.fixed,
                        "fixed coordinate name=value");
  field_cmd->add_option("--t0", field_opts.t0, "base time");
  add_ld_options(field_cmd, field_opts);
  add_integrator_options(field_cmd, field_opts);
  field_cmd->add_option("--out", field_opts.out_path, "output field file")
      ->required();
  field_cmd->add_option("--png", field_opts.png_path, "also render a PNG");
  field_cmd->add_option("--layer", field_opts.layer, "PNG layer");
  field_cmd->add_option("--colormap", field_opts.colormap, "PNG colormap");
  field_cmd->add_option("--normalize", field_opts.normalize,
                        "none | minmax applied to the written field");

  ExtractOpts extract_opts;
  auto* extract_cmd =
      app.add_subcommand("extract", "extract ridge points from a field file");
  extract_cmd->add_option("--in", extract_opts.in_path, "input field file")
      ->required();
  extract_cmd->add_option("--layer", extract_opts.layer,
                          "forward | backward | total");
  extract_cmd->add_option("--operator", extract_opts.op,
                          "gradient_norm | laplacian");
  extract_cmd->add_option("--percentile", extract_opts.percentile,
                          "keep responses above this percentile");
  extract_cmd->add_option("--escape-exclusion", extract_opts.escape_exclusion,
                          "cells excluded around escape-mask transitions");
  extract_cmd->add_flag("--nms", extract_opts.nms,
                        "non-maximum suppression along the gradient");
  extract_cmd->add_option("--out", extract_opts.out_path, "ridge CSV")
      ->required();
  extract_cmd->add_option("--png", extract_opts.png_path,
                          "render field with ridge overlay");
  extract_cmd->add_option("--colormap", extract_opts.colormap, "PNG colormap");

  CommonOpts section_common;
  SectionOpts section_opts;
  auto* section_cmd = app.add_subcommand(
      "section", "descriptor field on a Poincare section of the double well");
  section_cmd->add_option("--section", section_opts.section,
                          "sigma1 | sigma2 | sigma3");
  section_cmd->add_option("--gamma", section_opts.gamma,
                          "damping strength (both degrees of freedom)");
  section_cmd->add_option("--H0", section_opts.h0, "seeding energy");
  section_cmd->add_option("--x-value", section_opts.x_value,
                          "sigma3 plane position");
  section_cmd->add_option("--param", section_common.params,
                          "parameter override name=value");
  section_cmd->add_option("--grid", section_common.grid_text,
                          "grid \"[lo,hi]x[lo,hi]@N\"");
  section_cmd->add_option("--res", section_common.res_override,
                          "override resolution");
  section_cmd->add_option("--t0", section_common.t0, "base time");
  add_ld_options(section_cmd, section_common);
  add_integrator_options(section_cmd, section_common);
  section_cmd->add_option("--out", section_common.out_path, "output field file")
      ->required();
  section_cmd->add_option("--png", section_common.png_path, "also render PNG");
  section_cmd->add_option("--layer", section_common.layer, "PNG layer");

  CommonOpts strobe_common;
  StrobeOpts strobe_opts;
  auto* strobe_cmd = app.add_subcommand(
      "strobe", "Poincare map strobed at multiples of the forcing period");
  strobe_cmd->add_option("--system", strobe_common.system, "system name")
      ->required();
  strobe_cmd->add_option("--param", strobe_common.params,
                         "parameter override name=value");
  strobe_cmd->add_option("--ic", strobe_opts.ic_text, "initial condition");
  strobe_cmd->add_option("--t0", strobe_common.t0, "start time");
  strobe_cmd->add_option("--period", strobe_opts.period,
                         "strobe period (default 2*pi/omega)");
  strobe_cmd->add_option("--n-periods", strobe_opts.n_periods,
                         "total periods");
  strobe_cmd->add_option("--skip", strobe_opts.n_skip,
                         "periods to discard as transient");
  add_integrator_options(strobe_cmd, strobe_common);
  strobe_cmd->add_option("--out", strobe_common.out_path, "point CSV")
      ->required();

  CommonOpts classify_common;
  SectionOpts classify_section;
  classify_section.section = "sigma3";
  ClassifyOpts classify_opts;
  auto* classify_cmd = app.add_subcommand(
      "classify", "label section seeds reactive/nonreactive by integration");
  classify_cmd->add_option("--section", classify_section.section,
                           "sigma1 | sigma2 | sigma3");
  classify_cmd->add_option("--gamma", classify_section.gamma, "damping");
  classify_cmd->add_option("--H0", classify_section.h0, "seeding energy");
  classify_cmd->add_option("--x-value", classify_section.x_value,
                           "sigma3 plane position");
  classify_cmd->add_option("--param", classify_common.params,
                           "parameter override name=value");
  classify_cmd->add_option("--grid", classify_common.grid_text, "seed grid");
  classify_cmd->add_option("--res", classify_common.res_override,
                           "override resolution");
  classify_cmd->add_option("--t-max", classify_opts.t_max,
                           "classification horizon");
  classify_cmd->add_option("--settle-radius", classify_opts.settle_radius,
                           "well-capture radius");
  add_integrator_options(classify_cmd, classify_common);
  classify_cmd->add_option("--out", classify_common.out_path, "label CSV")
      ->required();

  std::string repro_id;
  std::string repro_outdir = ".";
  int repro_res = 0;
  bool repro_list = false;
  auto* repro_cmd = app.add_subcommand(
      "repro", "write a reference figure's data with its exact parameters");
  repro_cmd->add_option("id", repro_id, "target id (see --list)");
  repro_cmd->add_option("--outdir", repro_outdir, "output directory");
  repro_cmd->add_option("--res", repro_res, "override grid resolution");
  repro_cmd->add_flag("--list", repro_list, "list available target ids");

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (field_cmd->parsed()) return run_field(field_opts, workers);
    if (extract_cmd->parsed()) return run_extract(extract_opts);
    if (section_cmd->parsed())
      return run_section(section_common, section_opts, workers);
    if (strobe_cmd->parsed()) return run_strobe(strobe_common, strobe_opts);
    if (classify_cmd->parsed())
      return run_classify(classify_common, classify_section, classify_opts,
                          workers);
    if (repro_cmd->parsed()) {
      if (repro_list) {
        for (const auto& id : repro_target_ids()) std::cout << id << '\n';
        return 0;
      }
      if (repro_id.empty()) {
        std::cerr << "repro: target id required (or --list)\n";
        return 64;
      }
      return run_repro(repro_id, repro_outdir, repro_res, workers);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ld
