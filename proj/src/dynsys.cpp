#include "ld/dynsys.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vector_fields.hpp"

namespace ld {

namespace {

struct ParamDef {
  const char* name;
  double value;
};

struct SystemInfo {
  SystemId id;
  const char* name;
  int dim;
  std::vector<std::string> coords;
  std::vector<ParamDef> defaults;
};

// Default parameter values are the ones used throughout the reference
// simulations (e.g. van der Pol mu = 1.5, double well gamma = 0.25).
const std::vector<SystemInfo>& system_table() {
  static const std::vector<SystemInfo> table = {
      {SystemId::linear_saddle,
       "linear_saddle",
       2,
       {"x", "y"},
       {{"lambda", 1.0}, {"mu", 2.0}}},
      {SystemId::nonlinear_saddle,
       "nonlinear_saddle",
       2,
       {"x", "y"},
       {{"lambda", -2.0}, {"mu", 1.0}}},
      {SystemId::hopf, "hopf", 2, {"x", "y"}, {{"beta", 0.5}, {"sigma", 1.0}}},
      {SystemId::vanderpol, "vanderpol", 2, {"x", "y"}, {{"mu", 1.5}}},
      {SystemId::bead_hoop,
       "bead_hoop",
       2,
       {"phi", "Omega"},
       {{"epsilon", 0.02}, {"mu", 2.3}}},
      {SystemId::vdp_lienard, "vdp_lienard", 2, {"x", "w"}, {{"mu", 10.0}}},
      {SystemId::duffing,
       "duffing",
       2,
       {"x", "y"},
       {{"alpha", 1.0},
        {"beta", 1.0},
        {"delta", 0.3},
        {"gamma", 0.0},
        {"omega", 1.0}}},
      {SystemId::double_well_2dof,
       "double_well_2dof",
       4,
       {"x", "y", "px", "py"},
       {{"m1", 1.0},
        {"m2", 1.0},
        {"a", 1.0},
        {"b", 1.0},
        {"omega", 1.0},
        {"gamma_x", 0.25},
        {"gamma_y", 0.25}}},
  };
  return table;
}

const SystemInfo& info_for(SystemId id) {
  for (const auto& info : system_table()) {
    if (info.id == id) return info;
  }
  throw ConfigError("unknown system id");
}

std::vector<std::complex<double>> eigenvalues_2x2(double a, double b, double c,
                                                  double d) {
  const double tr = a + d;
  const double det = a * d - b * c;
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {{(tr + s) / 2.0, 0.0}, {(tr - s) / 2.0, 0.0}};
  }
  const double s = std::sqrt(-disc);
  return {{tr / 2.0, s / 2.0}, {tr / 2.0, -s / 2.0}};
}

Stability classify(const std::vector<std::complex<double>>& eig) {
  constexpr double tol = 1e-12;
  bool pos = false, neg = false, marginal = false;
  for (const auto& e : eig) {
    if (e.real() > tol)
      pos = true;
    else if (e.real() < -tol)
      neg = true;
    else
      marginal = true;
  }
  if (pos && neg) return Stability::saddle;
  if (marginal) return Stability::center;
  return pos ? Stability::unstable : Stability::stable;
}

Equilibrium make_equilibrium(std::vector<double> coords,
                             std::vector<std::complex<double>> eig) {
  Equilibrium eq;
  eq.state.coords = std::move(coords);
  eq.eigenvalues = std::move(eig);
  eq.stability = classify(eq.eigenvalues);
  return eq;
}

}  // namespace

std::string to_string(SystemId id) { return info_for(id).name; }

SystemId system_id_from_string(const std::string& name) {
  for (const auto& info : system_table()) {
    if (name == info.name) return info.id;
  }
  throw ConfigError("unknown system: '" + name + "'");
}

const std::vector<std::string>& known_system_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& info : system_table()) out.push_back(info.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& coordinate_names(SystemId id) {
  return info_for(id).coords;
}

int system_dimension(SystemId id) { return info_for(id).dim; }

double SystemSpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw ConfigError("system '" + to_string(id) + "' is missing parameter '" +
                      name + "'");
  }
  return it->second;
}

SystemSpec make_system(SystemId id,
                       const std::map<std::string, double>& overrides) {
  const SystemInfo& info = info_for(id);
  SystemSpec spec;
  spec.id = id;
  spec.dim = info.dim;
  for (const auto& def : info.defaults) spec.params[def.name] = def.value;
  for (const auto& [key, value] : overrides) {
    if (spec.params.find(key) == spec.params.end()) {
      throw ConfigError("unknown parameter '" + key + "' for system '" +
                        info.name + "'");
    }
    if (!std::isfinite(value)) {
      throw ConfigError("parameter '" + key + "' must be finite");
    }
    spec.params[key] = value;
  }
  spec.autonomous =
      !(id == SystemId::duffing && spec.params.at("gamma") != 0.0);
  return spec;
}

SystemSpec make_system(const std::string& name,
                       const std::map<std::string, double>& overrides) {
  return make_system(system_id_from_string(name), overrides);
}

StateVec make_state(std::initializer_list<double> coords, double t) {
  StateVec s;
  s.coords.assign(coords);
  s.t = t;
  return s;
}

void eval_vector_field(const SystemSpec& spec, double t,
                       std::span<const double> y, std::span<double> dy) {
  if (static_cast<int>(y.size()) != spec.dim ||
      static_cast<int>(dy.size()) != spec.dim) {
    throw ConfigError("state dimension does not match system dimension");
  }
  detail::with_vector_field(
      spec, [&](const auto& field) { field(t, y.data(), dy.data()); });
}

StateVec eval_vector_field(const SystemSpec& spec, const StateVec& state) {
  StateVec out;
  out.t = state.t;
  out.coords.resize(state.coords.size());
  eval_vector_field(spec, state.t, state.coords, out.coords);
  return out;
}

void jacobian(const SystemSpec& spec, double t, std::span<const double> y,
              std::span<double> jac) {
  if (static_cast<int>(y.size()) != spec.dim ||
      static_cast<int>(jac.size()) != spec.dim * spec.dim) {
    throw ConfigError("state/jacobian dimension mismatch");
  }
  (void)t;
  std::fill(jac.begin(), jac.end(), 0.0);
  switch (spec.id) {
    case SystemId::linear_saddle:
      jac[0] = spec.param("lambda");
      jac[3] = -spec.param("mu");
      break;
    case SystemId::nonlinear_saddle: {
      const double lambda = spec.param("lambda");
      jac[0] = spec.param("mu");
      jac[2] = -2.0 * lambda * y[0];
      jac[3] = lambda;
      break;
    }
    case SystemId::hopf: {
      const double beta = spec.param("beta");
      const double sigma = spec.param("sigma");
      const double x = y[0], yy = y[1];
      jac[0] = beta - sigma * (3.0 * x * x + yy * yy);
      jac[1] = -1.0 - 2.0 * sigma * x * yy;
      jac[2] = 1.0 - 2.0 * sigma * x * yy;
      jac[3] = beta - sigma * (x * x + 3.0 * yy * yy);
      break;
    }
    case SystemId::vanderpol: {
      const double mu = spec.param("mu");
      jac[1] = 1.0;
      jac[2] = -1.0 - 2.0 * mu * y[0] * y[1];
      jac[3] = mu * (1.0 - y[0] * y[0]);
      break;
    }
    case SystemId::bead_hoop: {
      const double eps = spec.param("epsilon");
      const double mu = spec.param("mu");
      // d/dphi of (mu cos(phi) - 1) sin(phi) = mu cos(2 phi) - cos(phi)
      jac[1] = 1.0;
      jac[2] = (mu * std::cos(2.0 * y[0]) - std::cos(y[0])) / eps;
      jac[3] = -1.0 / eps;
      break;
    }
    case SystemId::vdp_lienard: {
      const double mu = spec.param("mu");
      jac[0] = -mu * (y[0] * y[0] - 1.0);
      jac[1] = mu;
      jac[2] = -1.0 / mu;
      break;
    }
    case SystemId::duffing: {
      jac[1] = 1.0;
      jac[2] = spec.param("alpha") - 3.0 * spec.param("beta") * y[0] * y[0];
      jac[3] = -spec.param("delta");
      break;
    }
    case SystemId::double_well_2dof: {
      const double m1 = spec.param("m1"), m2 = spec.param("m2");
      const double a = spec.param("a"), b = spec.param("b");
      const double omega = spec.param("omega");
      jac[0 * 4 + 2] = 1.0 / m1;
      jac[1 * 4 + 3] = 1.0 / m2;
      jac[2 * 4 + 0] = b - 3.0 * a * y[0] * y[0];
      jac[2 * 4 + 2] = -spec.param("gamma_x");
      jac[3 * 4 + 1] = -omega * omega;
      jac[3 * 4 + 3] = -spec.param("gamma_y");
      break;
    }
  }
}

StateVec analytic_solution_linear_saddle(double lambda, double mu,
                                         const StateVec& ic, double t) {
  StateVec out;
  out.t = ic.t + t;
  out.coords = {ic.coords.at(0) * std::exp(lambda * t),
                ic.coords.at(1) * std::exp(-mu * t)};
  return out;
}

StateVec analytic_solution_nonlinear_saddle(const StateVec& ic, double t) {
  const double x0 = ic.coords.at(0);
  const double y0 = ic.coords.at(1);
  StateVec out;
  out.t = ic.t + t;
  out.coords = {x0 * std::exp(t),
                0.5 * x0 * x0 * std::exp(2.0 * t) +
                    (y0 - 0.5 * x0 * x0) * std::exp(-2.0 * t)};
  return out;
}

double hopf_blowup_time_beta0(double sigma, double r0) {
  return -1.0 / (2.0 * sigma * r0 * r0);
}

HopfPolarState analytic_solution_hopf_beta0(double sigma, double r0,
                                            double theta0, double t) {
  HopfPolarState out;
  const double denom = 2.0 * sigma * t * r0 * r0 + 1.0;
  if (denom <= 0.0) {
    out.blown_up = true;
    return out;
  }
  out.r = r0 / std::sqrt(denom);
  out.theta = theta0 + t;
  return out;
}

double closed_form_ld_linear_saddle(double lambda, double mu, double p,
                                    double tau_f, double tau_b, double x0,
                                    double y0) {
  const double tx = std::pow(lambda, p - 1.0) * std::pow(std::abs(x0), p) / p *
                    (std::exp(p * lambda * tau_f) - std::exp(-p * lambda * tau_b));
  const double ty = std::pow(mu, p - 1.0) * std::pow(std::abs(y0), p) / p *
                    (std::exp(-p * mu * tau_f) - std::exp(p * mu * tau_b));
  return tx - ty;
}

double balance_integration_times(double lambda, double mu, double p,
                                 double tau_f) {
  return lambda / mu * tau_f + (1.0 - p) / (mu * p) * std::log(mu / lambda);
}

double slow_manifold_curve(const SystemSpec& spec, double x) {
  switch (spec.id) {
    case SystemId::nonlinear_saddle: {
      const double lambda = spec.param("lambda");
      const double mu = spec.param("mu");
      return lambda * x * x / (lambda - 2.0 * mu);
    }
    case SystemId::bead_hoop:
      return (spec.param("mu") * std::cos(x) - 1.0) * std::sin(x);
    case SystemId::vdp_lienard:
      return x * x * x / 3.0 - x;
    default:
      throw ConfigError("system '" + to_string(spec.id) +
                        "' has no slow-manifold curve");
  }
}

std::vector<Equilibrium> equilibria(const SystemSpec& spec) {
  std::vector<Equilibrium> out;
  switch (spec.id) {
    case SystemId::linear_saddle: {
      out.push_back(make_equilibrium(
          {0.0, 0.0}, {{spec.param("lambda"), 0.0}, {-spec.param("mu"), 0.0}}));
      break;
    }
    case SystemId::nonlinear_saddle: {
      out.push_back(make_equilibrium(
          {0.0, 0.0}, {{spec.param("mu"), 0.0}, {spec.param("lambda"), 0.0}}));
      break;
    }
    case SystemId::hopf: {
      const double beta = spec.param("beta");
      out.push_back(
          make_equilibrium({0.0, 0.0}, {{beta, 1.0}, {beta, -1.0}}));
      break;
    }
    case SystemId::vanderpol: {
      const double mu = spec.param("mu");
      out.push_back(
          make_equilibrium({0.0, 0.0}, eigenvalues_2x2(0.0, 1.0, -1.0, mu)));
      break;
    }
    case SystemId::bead_hoop: {
      const double eps = spec.param("epsilon");
      const double mu = spec.param("mu");
      auto at_phi = [&](double phi) {
        const double fp = mu * std::cos(2.0 * phi) - std::cos(phi);
        return make_equilibrium({phi, 0.0},
                                eigenvalues_2x2(0.0, 1.0, fp / eps, -1.0 / eps));
      };
      out.push_back(at_phi(0.0));
      out.push_back(at_phi(M_PI));
      if (mu > 1.0) {
        const double phi = std::acos(1.0 / mu);
        out.push_back(at_phi(phi));
        out.push_back(at_phi(-phi));
      }
      break;
    }
    case SystemId::vdp_lienard: {
      const double mu = spec.param("mu");
      out.push_back(make_equilibrium(
          {0.0, 0.0}, eigenvalues_2x2(mu, mu, -1.0 / mu, 0.0)));
      break;
    }
    case SystemId::duffing: {
      if (!spec.autonomous) break;  // forced: no fixed points
      const double alpha = spec.param("alpha");
      const double beta = spec.param("beta");
      const double delta = spec.param("delta");
      auto at_x = [&](double x) {
        return make_equilibrium(
            {x, 0.0},
            eigenvalues_2x2(0.0, 1.0, alpha - 3.0 * beta * x * x, -delta));
      };
      out.push_back(at_x(0.0));
      if (beta != 0.0 && alpha / beta > 0.0) {
        const double xs = std::sqrt(alpha / beta);
        out.push_back(at_x(xs));
        out.push_back(at_x(-xs));
      }
      break;
    }
    case SystemId::double_well_2dof: {
      const double m1 = spec.param("m1"), m2 = spec.param("m2");
      const double a = spec.param("a"), b = spec.param("b");
      const double omega = spec.param("omega");
      const double gx = spec.param("gamma_x"), gy = spec.param("gamma_y");
      auto at_x = [&](double x) {
        // Block-diagonal Jacobian: an (x, px) block and a (y, py) block.
        auto ex = eigenvalues_2x2(0.0, 1.0 / m1, b - 3.0 * a * x * x, -gx);
        auto ey = eigenvalues_2x2(0.0, 1.0 / m2, -omega * omega, -gy);
        ex.insert(ex.end(), ey.begin(), ey.end());
        return make_equilibrium({x, 0.0, 0.0, 0.0}, std::move(ex));
      };
      out.push_back(at_x(0.0));
      if (a != 0.0 && b / a > 0.0) {
        const double xs = std::sqrt(b / a);
        out.push_back(at_x(xs));
        out.push_back(at_x(-xs));
      }
      break;
    }
  }
  return out;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
    case Stability::center: return "center";
  }
  return "unknown";
}

}  // namespace ld
