#include "ld/ldfield.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace ld {

double GridSpec2D::coord0(int i) const {
  const double n = resolution[0] - 1;
  return (ranges[0][0] * (n - i) + ranges[0][1] * i) / n;
}

double GridSpec2D::coord1(int j) const {
  const double n = resolution[1] - 1;
  return (ranges[1][0] * (n - j) + ranges[1][1] * j) / n;
}

double GridSpec2D::spacing0() const {
  return (ranges[0][1] - ranges[0][0]) / (resolution[0] - 1);
}

double GridSpec2D::spacing1() const {
  return (ranges[1][1] - ranges[1][0]) / (resolution[1] - 1);
}

void GridSpec2D::validate() const {
  for (int ax = 0; ax < 2; ++ax) {
    if (!(ranges[ax][0] < ranges[ax][1])) {
      throw ConfigError("grid axis " + std::to_string(ax) +
                        " requires lo < hi");
    }
    if (resolution[ax] < 2) {
      throw ConfigError("grid resolution must be at least 2");
    }
  }
  if (axis_names[0] == axis_names[1]) {
    throw ConfigError("grid axes must name two distinct coordinates");
  }
}

void LDConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  if (!(tau_f >= 0.0) || !(tau_b >= 0.0)) {
    throw ConfigError("integration horizons must be nonnegative");
  }
  if (tau_f == 0.0 && tau_b == 0.0 && !auto_balance) {
    throw ConfigError("at least one of tau_f, tau_b must be positive");
  }
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::forward: return "forward";
    case LayerKind::backward: return "backward";
    case LayerKind::total: return "total";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "forward") return LayerKind::forward;
  if (name == "backward") return LayerKind::backward;
  if (name == "total") return LayerKind::total;
  throw ConfigError("unknown layer: '" + name + "'");
}

const std::vector<double>& LDField::layer(LayerKind kind) const {
  switch (kind) {
    case LayerKind::forward: return forward;
    case LayerKind::backward: return backward;
    default: return total;
  }
}

std::vector<double>& LDField::layer(LayerKind kind) {
  switch (kind) {
    case LayerKind::forward: return forward;
    case LayerKind::backward: return backward;
    default: return total;
  }
}

namespace {

// Maps grid axes and fixed coordinates onto state-vector slots; requires the
// union to cover the system's coordinates exactly.
struct NodeLifter {
  int axis_slot[2] = {-1, -1};
  std::vector<double> base;

  NodeLifter(const SystemSpec& spec, const GridSpec2D& grid) {
    const auto& names = coordinate_names(spec.id);
    base.assign(names.size(), 0.0);
    std::vector<bool> covered(names.size(), false);
    for (int ax = 0; ax < 2; ++ax) {
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == grid.axis_names[ax]) {
          axis_slot[ax] = static_cast<int>(k);
          covered[k] = true;
        }
      }
      if (axis_slot[ax] < 0) {
        throw ConfigError("grid axis '" + grid.axis_names[ax] +
                          "' is not a coordinate of system '" +
                          to_string(spec.id) + "'");
      }
    }
    for (const auto& [name, value] : grid.fixed_coords) {
      bool found = false;
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == name) {
          if (covered[k]) {
            throw ConfigError("coordinate '" + name +
                              "' is both a grid axis and a fixed coordinate");
          }
          base[k] = value;
          covered[k] = true;
          found = true;
        }
      }
      if (!found) {
        throw ConfigError("fixed coordinate '" + name +
                          "' is not a coordinate of system '" +
                          to_string(spec.id) + "'");
      }
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (!covered[k]) {
        throw ConfigError("coordinate '" + names[k] +
                          "' is neither a grid axis nor fixed");
      }
    }
  }

  StateVec lift(double u, double v, double t0) const {
    StateVec s;
    s.coords = base;
    s.coords[axis_slot[0]] = u;
    s.coords[axis_slot[1]] = v;
    s.t = t0;
    return s;
  }
};

double effective_tau_b(const SystemSpec& spec, const LDConfig& cfg) {
  if (!cfg.auto_balance) return cfg.tau_b;
  double lambda = cfg.balance_lambda;
  double mu = cfg.balance_mu;
  if (lambda == 0.0 && mu == 0.0) {
    lambda = spec.param("lambda");
    mu = spec.param("mu");
  }
  if (!(lambda > 0.0) || !(mu > 0.0)) {
    throw ConfigError("auto_balance requires positive rates lambda, mu");
  }
  return balance_integration_times(lambda, mu, cfg.p, cfg.tau_f);
}

}  // namespace

LDField compute_ld_field(const SystemSpec& spec, const GridSpec2D& grid,
                         const LDConfig& ldcfg, const IntegratorConfig& intcfg,
                         int workers) {
  grid.validate();
  // Zero horizons are allowed here (the layers are then identically zero);
  // the stricter LDConfig::validate is the CLI-level contract.
  if (!(ldcfg.p > 0.0 && ldcfg.p <= 1.0)) {
    throw ConfigError("p must lie in (0, 1]");
  }
  if (!(ldcfg.tau_f >= 0.0) || !(ldcfg.tau_b >= 0.0)) {
    throw ConfigError("integration horizons must be nonnegative");
  }
  intcfg.validate();
  ldcfg.escape.validate(spec.dim);
  const NodeLifter lifter(spec, grid);

  LDField field;
  field.grid = grid;
  field.meta.system = spec;
  field.meta.ld = ldcfg;
  field.meta.ld.tau_b = effective_tau_b(spec, ldcfg);
  field.meta.integrator = intcfg;

  const std::size_t count = field.node_count();
  field.forward.assign(count, 0.0);
  field.backward.assign(count, 0.0);
  field.total.assign(count, 0.0);
  field.escape_mask.assign(count, 0);
  field.valid_mask.assign(count, 1);

  const double tau_f = field.meta.ld.tau_f;
  const double tau_b = field.meta.ld.tau_b;
  const int n1 = field.n1();
  std::atomic<long> failures{0};

  detail::parallel_for(count, workers, [&](std::size_t node) {
    const int i = static_cast<int>(node) / n1;
    const int j = static_cast<int>(node) % n1;
    const StateVec ic = lifter.lift(grid.coord0(i), grid.coord1(j), grid.t0);

    double fwd = 0.0, bwd = 0.0;
    bool escaped = false, failed = false;
    if (tau_f > 0.0) {
      const auto r = accumulate_ld(spec, ic, grid.t0, tau_f,
                                   Direction::forward, ldcfg.p, intcfg,
                                   ldcfg.escape);
      fwd = r.ld_value;
      escaped |= r.escaped;
      failed |= r.failed;
    }
    if (tau_b > 0.0) {
      const auto r = accumulate_ld(spec, ic, grid.t0, tau_b,
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

LDField normalize_field(const LDField& field, NormalizeMode mode) {
  LDField out = field;
  if (mode == NormalizeMode::none) return out;

  out.meta.normalize_mode = "minmax";
  for (LayerKind kind :
       {LayerKind::forward, LayerKind::backward, LayerKind::total}) {
    auto& values = out.layer(kind);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!out.valid_mask[k]) continue;
      lo = std::min(lo, values[k]);
      hi = std::max(hi, values[k]);
    }
    if (!(hi > lo)) {
      std::fill(values.begin(), values.end(), 0.0);
      out.meta.constant_layer_warning = true;
      continue;
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] = out.valid_mask[k] ? (values[k] - lo) / (hi - lo) : 0.0;
    }
  }
  return out;
}

}  // namespace ld
