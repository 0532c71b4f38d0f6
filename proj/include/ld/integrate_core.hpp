#ifndef LD_INTEGRATE_CORE_HPP
#define LD_INTEGRATE_CORE_HPP

// Dormand-Prince 5(4) engine with FSAL, dense output and event localization.
// Templated on the right-hand side so built-in systems inline fully; the
// public wrappers in integrate.hpp instantiate it per system.
//
// Conventions: integration always runs in a folded coordinate s in [0, s_end]
// with s_end > 0; callers map s to physical time (t0 + s or t0 - s) inside
// their RHS. Events are functions g(y) that stop the run when g >= 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ld/integrate.hpp"

namespace ld::detail {

inline constexpr int kMaxState = 8;
inline constexpr long kMaxStepsPerRun = 50'000'000;

struct DenseSegment {
  int n = 0;
  double s0 = 0.0, h = 0.0;
  std::array<double, kMaxState> c1{}, c2{}, c3{}, c4{}, c5{};

  // Quartic interpolant over [s0, s0+h].
  void eval(double s, double* out) const {
    const double theta = (s - s0) / h;
    const double th1 = 1.0 - theta;
    for (int i = 0; i < n; ++i) {
      out[i] =
          c1[i] +
          theta * (c2[i] + th1 * (c3[i] + theta * (c4[i] + th1 * c5[i])));
    }
  }
};

struct CoreOutcome {
  double s_stop = 0.0;
  bool event_hit = false;
  bool failed = false;
  long n_steps = 0;
};

struct NullObserver {
  template <class DenseFn>
  void operator()(double, double, const double*, DenseFn&&) {}
};

struct NoEvent {
  double operator()(const double*) const { return -1.0; }
};

template <class RHS, class Event, class Observer>
class Dopri5Run {
 public:
  Dopri5Run(int n, RHS& rhs, const IntegratorConfig& cfg, Event& event,
            Observer& observer, double event_tol)
      : n_(n),
        rhs_(rhs),
        cfg_(cfg),
        event_(event),
        observer_(observer),
        event_tol_(event_tol) {}

  CoreOutcome run(double* y, double s_end) {
    CoreOutcome out;
    if (!(s_end > 0.0)) return out;
    if (event_(y) >= 0.0) {
      out.event_hit = true;  // initial condition already outside
      return out;
    }

    rhs_(0.0, y, k_[0].data());
    if (!finite_vec(k_[0].data())) {
      out.failed = true;
      return out;
    }

    double s = 0.0;
    double h = initial_step(y, s_end);
    bool rejected_last = false;

    while (s < s_end) {
      if (out.n_steps++ > kMaxStepsPerRun) {
        out.failed = true;
        break;
      }
      h = std::min({h, cfg_.max_step, s_end - s});
      const double h_floor =
          std::max(1e-14, 16.0 * std::numeric_limits<double>::epsilon() * s);
      if (h < h_floor) {
        out.failed = true;
        break;
      }

      const double err = attempt_step(s, y, h);

      if (!std::isfinite(err)) {
        rejected_last = true;
        h *= 0.1;
        continue;
      }
      if (err > 1.0) {
        rejected_last = true;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        continue;
      }

      // accepted
      const double s_new = s + h;
      dense_built_ = false;
      h_last_ = h;
      s_last_ = s;
      std::copy_n(y, n_, ylast_.data());

      if (event_(ynew_.data()) >= 0.0) {
        const double s_star = locate_event(s, h);
        observer_(s, s_star, ynew_.data(),
                  [&]() -> const DenseSegment& { return dense(); });
        std::copy_n(ynew_.data(), n_, y);
        out.event_hit = true;
        out.s_stop = s_star;
        return out;
      }

      observer_(s, s_new, ynew_.data(),
                [&]() -> const DenseSegment& { return dense(); });

      std::copy_n(ynew_.data(), n_, y);
      k_[0] = k_[6];  // FSAL
      s = s_new;

      double factor = 0.9 * std::pow(std::max(err, 1e-32), -0.2);
      factor = std::clamp(factor, 0.2, rejected_last ? 1.0 : 5.0);
      rejected_last = false;
      h *= factor;
    }

    out.s_stop = std::min(s, s_end);
    return out;
  }

 private:
  using Vec = std::array<double, kMaxState>;

  bool finite_vec(const double* v) const {
    for (int i = 0; i < n_; ++i) {
      if (!std::isfinite(v[i])) return false;
    }
    return true;
  }

  double initial_step(const double* y, double s_end) const {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
    }
    d0 = std::sqrt(d0 / n_);
    d1 = std::sqrt(d1 / n_);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min({h, cfg_.max_step, s_end});
  }

  // One trial step from (s, y) with size h; fills ynew_/k_ and returns the
  // scaled error norm.
  double attempt_step(double s, const double* y, double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                            a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;

    Vec tmp{};
    for (int i = 0; i < n_; ++i) tmp[i] = y[i] + h * a21 * k_[0][i];
    rhs_(s + c2 * h, tmp.data(), k_[1].data());
    for (int i = 0; i < n_; ++i)
      tmp[i] = y[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
    rhs_(s + c3 * h, tmp.data(), k_[2].data());
    for (int i = 0; i < n_; ++i)
      tmp[i] = y[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
    rhs_(s + c4 * h, tmp.data(), k_[3].data());
    for (int i = 0; i < n_; ++i)
      tmp[i] = y[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] +
                           a54 * k_[3][i]);
    rhs_(s + c5 * h, tmp.data(), k_[4].data());
    for (int i = 0; i < n_; ++i)
      tmp[i] = y[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                           a64 * k_[3][i] + a65 * k_[4][i]);
    rhs_(s + h, tmp.data(), k_[5].data());
    for (int i = 0; i < n_; ++i)
      ynew_[i] = y[i] + h * (a71 * k_[0][i] + a73 * k_[2][i] + a74 * k_[3][i] +
                             a75 * k_[4][i] + a76 * k_[5][i]);
    rhs_(s + h, ynew_.data(), k_[6].data());

    double err = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] +
                            e5 * k_[4][i] + e6 * k_[5][i] + e7 * k_[6][i]);
      const double sc = cfg_.abs_tol +
                        cfg_.rel_tol * std::max(std::abs(y[i]),
                                                std::abs(ynew_[i]));
      err += (e / sc) * (e / sc);
    }
    return std::sqrt(err / n_);
  }

  const DenseSegment& dense() {
    if (dense_built_) return seg_;
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;
    seg_.n = n_;
    seg_.s0 = s_last_;
    seg_.h = h_last_;
    for (int i = 0; i < n_; ++i) {
      const double delta = ynew_[i] - ylast_[i];
      seg_.c1[i] = ylast_[i];
      seg_.c2[i] = delta;
      seg_.c3[i] = h_last_ * k_[0][i] - delta;
      seg_.c4[i] = delta - h_last_ * k_[6][i] - seg_.c3[i];
      seg_.c5[i] = h_last_ * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] +
                              d5 * k_[4][i] + d6 * k_[5][i] + d7 * k_[6][i]);
    }
    dense_built_ = true;
    return seg_;
  }

  // Bisects the event function over the accepted step; leaves the event-time
  // state in ynew_. Returns the event coordinate s*.
  double locate_event(double s, double h) {
    const DenseSegment& seg = dense();
    double lo = 0.0, hi = 1.0;
    Vec mid{};
    for (int iter = 0; iter < 200; ++iter) {
      const double m = 0.5 * (lo + hi);
      seg.eval(s + m * h, mid.data());
      const double g = event_(mid.data());
      if (std::abs(g) <= event_tol_) {
        std::copy_n(mid.data(), n_, ynew_.data());
        return s + m * h;
      }
      (g < 0.0 ? lo : hi) = m;
      if (hi - lo < 1e-15) break;
    }
    seg.eval(s + hi * h, ynew_.data());
    return s + hi * h;
  }

  int n_;
  RHS& rhs_;
  const IntegratorConfig& cfg_;
  Event& event_;
  Observer& observer_;
  double event_tol_;

  std::array<Vec, 7> k_{};
  Vec ynew_{};
  Vec ylast_{};
  DenseSegment seg_;
  bool dense_built_ = false;
  double s_last_ = 0.0, h_last_ = 0.0;
};

template <class RHS>
void rk4_step(int n, RHS& rhs, double s, const double* y, double h,
              double* out) {
  std::array<double, kMaxState> k1{}, k2{}, k3{}, k4{}, tmp{};
  rhs(s, y, k1.data());
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(s + 0.5 * h, tmp.data(), k2.data());
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(s + 0.5 * h, tmp.data(), k3.data());
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(s + h, tmp.data(), k4.data());
  for (int i = 0; i < n; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Fixed-step RK4 driver with the same event/observer contract as Dopri5Run.
// Dense output degrades to re-stepping from the segment start, which is
// adequate at fixed_step accuracy.
template <class RHS, class Event, class Observer>
CoreOutcome rk4_run(int n, RHS& rhs, double* y, double s_end,
                    const IntegratorConfig& cfg, Event& event,
                    Observer& observer, double event_tol) {
  CoreOutcome out;
  if (!(s_end > 0.0)) return out;
  if (event(y) >= 0.0) {
    out.event_hit = true;
    return out;
  }
  std::array<double, kMaxState> ynew{};
  double s = 0.0;
  while (s < s_end) {
    ++out.n_steps;
    const double h = std::min(cfg.fixed_step, s_end - s);
    rk4_step(n, rhs, s, y, h, ynew.data());
    bool finite = true;
    for (int i = 0; i < n; ++i) finite = finite && std::isfinite(ynew[i]);
    if (!finite) {
      out.failed = true;
      out.s_stop = s;
      return out;
    }
    DenseSegment seg;  // linear fallback segment for sampling observers
    seg.n = n;
    seg.s0 = s;
    seg.h = h;
    for (int i = 0; i < n; ++i) {
      seg.c1[i] = y[i];
      seg.c2[i] = ynew[i] - y[i];
    }
    if (event(ynew.data()) >= 0.0) {
      double lo = 0.0, hi = 1.0;
      std::array<double, kMaxState> mid{};
      for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (lo + hi);
        rk4_step(n, rhs, s, y, m * h, mid.data());
        const double g = event(mid.data());
        if (std::abs(g) <= event_tol) {
          hi = m;
          break;
        }
        (g < 0.0 ? lo : hi) = m;
        if (hi - lo < 1e-15) break;
      }
      rk4_step(n, rhs, s, y, hi * h, ynew.data());
      observer(s, s + hi * h, y,
               [&]() -> const DenseSegment& { return seg; });
      std::copy_n(ynew.data(), n, y);
      out.event_hit = true;
      out.s_stop = s + hi * h;
      return out;
    }
    observer(s, s + h, ynew.data(),
             [&]() -> const DenseSegment& { return seg; });
    std::copy_n(ynew.data(), n, y);
    s += h;
  }
  out.s_stop = s_end;
  return out;
}

// Entry point used by the public wrappers and by test oracles that integrate
// hand-written fields.
template <class RHS, class Event, class Observer>
CoreOutcome integrate_core(int n, RHS&& rhs, double* y, double s_end,
                           const IntegratorConfig& cfg, Event&& event,
                           Observer&& observer) {
  const double event_tol = cfg.abs_tol;
  if (cfg.method == Method::rk4_fixed) {
    return rk4_run(n, rhs, y, s_end, cfg, event, observer, event_tol);
  }
  Dopri5Run<std::remove_reference_t<RHS>, std::remove_reference_t<Event>,
            std::remove_reference_t<Observer>>
      run(n, rhs, cfg, event, observer, event_tol);
  return run.run(y, s_end);
}

}  // namespace ld::detail

#endif  // LD_INTEGRATE_CORE_HPP
