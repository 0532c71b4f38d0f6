#ifndef LD_DYNSYS_HPP
#define LD_DYNSYS_HPP

#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ld {

// Thrown for invalid system setup: unknown ids, missing/unknown/non-finite
// parameters, dimension mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SystemId {
  linear_saddle,
  nonlinear_saddle,
  hopf,
  vanderpol,
  bead_hoop,
  vdp_lienard,
  duffing,
  double_well_2dof,
};

std::string to_string(SystemId id);
SystemId system_id_from_string(const std::string& name);
const std::vector<std::string>& known_system_names();

// Phase-space coordinate labels, in state-vector order.
const std::vector<std::string>& coordinate_names(SystemId id);
int system_dimension(SystemId id);

// A fully validated model system: identifier plus named parameter map.
// Construct through make_system so defaults and validation are applied.
struct SystemSpec {
  SystemId id = SystemId::linear_saddle;
  std::map<std::string, double> params;
  int dim = 2;
  bool autonomous = true;

  double param(const std::string& name) const;
};

// Builds a SystemSpec with the default parameter set for `id`, overridden by
// `overrides`. Unknown parameter names and non-finite values are rejected.
SystemSpec make_system(SystemId id,
                       const std::map<std::string, double>& overrides = {});
SystemSpec make_system(const std::string& name,
                       const std::map<std::string, double>& overrides = {});

struct StateVec {
  std::vector<double> coords;
  double t = 0.0;
};

StateVec make_state(std::initializer_list<double> coords, double t = 0.0);

// Evaluates the vector field f(y, t). `dy` must have spec.dim entries.
void eval_vector_field(const SystemSpec& spec, double t,
                       std::span<const double> y, std::span<double> dy);
StateVec eval_vector_field(const SystemSpec& spec, const StateVec& state);

// Analytic Jacobian df/dy, written row-major into `jac` (dim*dim entries).
void jacobian(const SystemSpec& spec, double t, std::span<const double> y,
              std::span<double> jac);

// --- closed-form solutions used as integration oracles ---

StateVec analytic_solution_linear_saddle(double lambda, double mu,
                                         const StateVec& ic, double t);

// Fixed at lambda = -2, mu = 1 (the standard saddle normal form that admits
// the closed-form y(t) = x0^2 e^{2t}/2 + (y0 - x0^2/2) e^{-2t}).
StateVec analytic_solution_nonlinear_saddle(const StateVec& ic, double t);

struct HopfPolarState {
  double r = 0.0;
  double theta = 0.0;
  bool blown_up = false;
};

// Polar solution of the Hopf normal form at criticality (beta = 0). The
// backward solution blows up at t = -1/(2 sigma r0^2); `blown_up` is set when
// the requested time is at or past that point.
HopfPolarState analytic_solution_hopf_beta0(double sigma, double r0,
                                            double theta0, double t);
double hopf_blowup_time_beta0(double sigma, double r0);

// Closed-form p-norm descriptor value for the linear saddle over
// [-tau_b, tau_f] from (x0, y0) at t0 = 0.
double closed_form_ld_linear_saddle(double lambda, double mu, double p,
                                    double tau_f, double tau_b, double x0,
                                    double y0);

// Backward horizon that balances the forward/backward layer magnitudes for a
// linear saddle with rates (lambda, mu):
//   tau_b = (lambda/mu) tau_f + (1-p)/(mu p) * ln(mu/lambda)
double balance_integration_times(double lambda, double mu, double p,
                                 double tau_f);

// Slow-manifold curve y(x) for the systems that have one
// (nonlinear_saddle, bead_hoop, vdp_lienard).
double slow_manifold_curve(const SystemSpec& spec, double x);

enum class Stability { stable, saddle, unstable, center };
std::string to_string(Stability s);

struct Equilibrium {
  StateVec state;
  Stability stability = Stability::center;
  std::vector<std::complex<double>> eigenvalues;
};

// Known equilibria with linearization eigenvalues. Returns an empty list for
// systems without fixed points in the current parameter regime (e.g. forced
// Duffing); that is not an error.
std::vector<Equilibrium> equilibria(const SystemSpec& spec);

}  // namespace ld

#endif  // LD_DYNSYS_HPP
