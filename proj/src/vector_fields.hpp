#ifndef LD_VECTOR_FIELDS_HPP
#define LD_VECTOR_FIELDS_HPP

// Concrete right-hand-side functors for the built-in systems. Kept internal
// so the integrator templates can inline them; the public API dispatches
// through with_vector_field below.

#include <cmath>

#include "ld/dynsys.hpp"

namespace ld::detail {

struct LinearSaddleField {
  double lambda, mu;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    dy[0] = lambda * y[0];
    dy[1] = -mu * y[1];
  }
};

struct NonlinearSaddleField {
  double lambda, mu;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    dy[0] = mu * y[0];
    dy[1] = lambda * (y[1] - y[0] * y[0]);
  }
};

struct HopfField {
  double beta, sigma;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    const double r2 = y[0] * y[0] + y[1] * y[1];
    dy[0] = beta * y[0] - y[1] - sigma * y[0] * r2;
    dy[1] = y[0] + beta * y[1] - sigma * y[1] * r2;
  }
};

struct VanDerPolField {
  double mu;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    dy[0] = y[1];
    dy[1] = -y[0] + mu * (1.0 - y[0] * y[0]) * y[1];
  }
};

struct BeadHoopField {
  double eps, mu;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    dy[0] = y[1];
    dy[1] = ((mu * std::cos(y[0]) - 1.0) * std::sin(y[0]) - y[1]) / eps;
  }
};

struct LienardField {
  double mu;
  static constexpr int dim = 2;
  void operator()(double, const double* y, double* dy) const {
    const double fx = y[0] * y[0] * y[0] / 3.0 - y[0];
    dy[0] = mu * (y[1] - fx);
    dy[1] = -y[0] / mu;
  }
};

struct DuffingField {
  double alpha, beta, delta, gamma, omega;
  static constexpr int dim = 2;
  void operator()(double t, const double* y, double* dy) const {
    dy[0] = y[1];
    dy[1] = -delta * y[1] + alpha * y[0] - beta * y[0] * y[0] * y[0] +
            gamma * std::cos(omega * t);
  }
};

// Damped two-degree-of-freedom double well: quartic double well in x, a
// harmonic restoring force -omega^2 y in the y degree of freedom, linear
// momentum damping in both.
struct DoubleWellField {
  double m1, m2, a, b, omega, gx, gy;
  static constexpr int dim = 4;
  void operator()(double, const double* y, double* dy) const {
    dy[0] = y[2] / m1;
    dy[1] = y[3] / m2;
    dy[2] = b * y[0] - a * y[0] * y[0] * y[0] - gx * y[2];
    dy[3] = -omega * omega * y[1] - gy * y[3];
  }
};

// Calls fn with the concrete field functor for spec. fn must accept any of
// the functor types (generic lambda).
template <class Fn>
decltype(auto) with_vector_field(const SystemSpec& spec, Fn&& fn) {
  switch (spec.id) {
    case SystemId::linear_saddle:
      return fn(LinearSaddleField{spec.param("lambda"), spec.param("mu")});
    case SystemId::nonlinear_saddle:
      return fn(NonlinearSaddleField{spec.param("lambda"), spec.param("mu")});
    case SystemId::hopf:
      return fn(HopfField{spec.param("beta"), spec.param("sigma")});
    case SystemId::vanderpol:
      return fn(VanDerPolField{spec.param("mu")});
    case SystemId::bead_hoop:
      return fn(BeadHoopField{spec.param("epsilon"), spec.param("mu")});
    case SystemId::vdp_lienard:
      return fn(LienardField{spec.param("mu")});
    case SystemId::duffing:
      return fn(DuffingField{spec.param("alpha"), spec.param("beta"),
                             spec.param("delta"), spec.param("gamma"),
                             spec.param("omega")});
    case SystemId::double_well_2dof:
      return fn(DoubleWellField{spec.param("m1"), spec.param("m2"),
                                spec.param("a"), spec.param("b"),
                                spec.param("omega"), spec.param("gamma_x"),
                                spec.param("gamma_y")});
  }
  throw ConfigError("unknown system id");
}

}  // namespace ld::detail

#endif  // LD_VECTOR_FIELDS_HPP
