#include "ld/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "ld/integrate_core.hpp"
#include "vector_fields.hpp"

namespace ld {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw ConfigError("integrator tolerances must be positive");
  }
  if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
  if (method == Method::rk4_fixed && !(fixed_step > 0.0)) {
    throw ConfigError("fixed_step must be positive for rk4_fixed");
  }
}

EscapeRegion EscapeRegion::ball(double radius) {
  EscapeRegion r;
  r.radius = radius;
  r.enabled = true;
  return r;
}

double EscapeRegion::signed_distance(std::span<const double> y) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double c = i < center.size() ? center[i] : 0.0;
    d2 += (y[i] - c) * (y[i] - c);
  }
  return std::sqrt(d2) - radius;
}

void EscapeRegion::validate(int dim) const {
  if (!enabled) return;
  if (!(radius > 0.0)) throw ConfigError("escape radius must be positive");
  if (!center.empty() && static_cast<int>(center.size()) != dim) {
    throw ConfigError("escape center dimension mismatch");
  }
  for (double c : center) {
    if (!std::isfinite(c)) throw ConfigError("escape center must be finite");
  }
}

namespace {

void check_initial_state(const SystemSpec& spec, const StateVec& ic) {
  if (static_cast<int>(ic.coords.size()) != spec.dim) {
    throw ConfigError("initial condition dimension mismatch");
  }
  for (double c : ic.coords) {
    if (!std::isfinite(c)) {
      throw ConfigError("initial condition must be finite");
    }
  }
}

double ld_integrand(double v, double p) {
  if (p == 0.5) return std::sqrt(std::abs(v));
  if (p == 1.0) return std::abs(v);
  return std::pow(std::abs(v), p);
}

}  // namespace

Trajectory integrate_trajectory(const SystemSpec& spec, const StateVec& ic,
                                double t0, double t1,
                                const IntegratorConfig& cfg,
                                const EscapeRegion& escape,
                                std::span<const double> sample_times) {
  cfg.validate();
  check_initial_state(spec, ic);
  escape.validate(spec.dim);

  Trajectory traj;
  traj.final_state = ic;
  traj.final_state.t = t0;
  traj.stop_time = t0;
  if (t1 == t0) return traj;

  const double sgn = t1 > t0 ? 1.0 : -1.0;
  const double horizon = std::abs(t1 - t0);
  const int n = spec.dim;

  // Requested times mapped onto the folded coordinate, ascending.
  std::vector<double> svals;
  for (double t : sample_times) {
    const double s = sgn * (t - t0);
    if (s >= 0.0 && s <= horizon) svals.push_back(s);
  }
  std::sort(svals.begin(), svals.end());
  const bool record_steps = sample_times.empty();

  std::array<double, detail::kMaxState> y{};
  std::copy(ic.coords.begin(), ic.coords.end(), y.begin());

  auto push_sample = [&](double s, const double* v) {
    TrajectorySample sample;
    sample.t = t0 + sgn * s;
    sample.coords.assign(v, v + n);
    traj.samples.push_back(std::move(sample));
  };

  std::size_t idx = 0;
  while (idx < svals.size() && svals[idx] == 0.0) {
    push_sample(0.0, y.data());
    ++idx;
  }
  if (record_steps) push_sample(0.0, y.data());

  detail::CoreOutcome outcome;
  detail::with_vector_field(spec, [&](const auto& field) {
    constexpr int fdim = std::remove_cvref_t<decltype(field)>::dim;
    auto rhs = [&](double s, const double* v, double* dv) {
      double base[fdim];
      field(t0 + sgn * s, v, base);
      for (int i = 0; i < fdim; ++i) dv[i] = sgn * base[i];
    };
    auto event = [&](const double* v) {
      return escape.enabled ? escape.signed_distance({v, std::size_t(fdim)})
                            : -1.0;
    };
    auto observer = [&](double s0, double s1, const double* ynew,
                        auto&& dense_of) {
      (void)s0;
      if (record_steps) {
        push_sample(s1, ynew);
        return;
      }
      std::array<double, detail::kMaxState> buf{};
      while (idx < svals.size() && svals[idx] <= s1) {
        dense_of().eval(svals[idx], buf.data());
        push_sample(svals[idx], buf.data());
        ++idx;
      }
    };
    outcome = detail::integrate_core(n, rhs, y.data(), horizon, cfg, event,
                                     observer);
  });

  traj.escaped = outcome.event_hit || outcome.failed;
  traj.failed = outcome.failed;
  traj.stop_time = t0 + sgn * outcome.s_stop;
  traj.final_state.coords.assign(y.begin(), y.begin() + n);
  traj.final_state.t = traj.stop_time;
  return traj;
}

LDAccumResult accumulate_ld(const SystemSpec& spec, const StateVec& ic,
                            double t0, double tau, Direction dir, double p,
                            const IntegratorConfig& cfg,
                            const EscapeRegion& escape) {
  cfg.validate();
  check_initial_state(spec, ic);
  escape.validate(spec.dim);
  if (!(tau >= 0.0)) throw ConfigError("tau must be nonnegative");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must lie in (0, 1]");

  const double sgn = dir == Direction::forward ? 1.0 : -1.0;
  const int n = spec.dim;

  std::array<double, detail::kMaxState> y{};
  std::copy(ic.coords.begin(), ic.coords.end(), y.begin());
  y[n] = 0.0;  // descriptor accumulator rides along as an extra component

  detail::CoreOutcome outcome;
  detail::with_vector_field(spec, [&](const auto& field) {
    constexpr int fdim = std::remove_cvref_t<decltype(field)>::dim;
    auto rhs = [&](double s, const double* v, double* dv) {
      double base[fdim];
      field(t0 + sgn * s, v, base);
      double acc = 0.0;
      for (int i = 0; i < fdim; ++i) {
        dv[i] = sgn * base[i];
        acc += ld_integrand(base[i], p);
      }
      dv[fdim] = acc;
    };
    auto event = [&](const double* v) {
      return escape.enabled ? escape.signed_distance({v, std::size_t(fdim)})
                            : -1.0;
    };
    detail::NullObserver observer;
    outcome = detail::integrate_core(fdim + 1, rhs, y.data(), tau, cfg, event,
                                     observer);
  });

  LDAccumResult res;
  res.ld_value = std::max(0.0, y[n]);
  res.escaped = outcome.event_hit || outcome.failed;
  res.failed = outcome.failed;
  res.stop_time = t0 + sgn * outcome.s_stop;
  res.final_state.coords.assign(y.begin(), y.begin() + n);
  res.final_state.t = res.stop_time;
  return res;
}

StrobeResult strobe_map(const SystemSpec& spec, const StateVec& ic, double t0,
                        double period, long n_periods, long n_skip,
                        const IntegratorConfig& cfg) {
  cfg.validate();
  check_initial_state(spec, ic);
  if (!(period > 0.0)) throw ConfigError("strobe period must be positive");
  if (n_skip < 0 || n_periods < n_skip) {
    throw ConfigError("require n_periods >= n_skip >= 0");
  }

  StrobeResult result;
  const int n = spec.dim;
  std::array<double, detail::kMaxState> y{};
  std::copy(ic.coords.begin(), ic.coords.end(), y.begin());

  detail::with_vector_field(spec, [&](const auto& field) {
    double t_base = t0;
    auto rhs = [&](double s, const double* v, double* dv) {
      field(t_base + s, v, dv);
    };
    detail::NoEvent event;
    detail::NullObserver observer;
    for (long k = 0; k <= n_periods; ++k) {
      if (k >= n_skip) {
        StateVec s;
        s.coords.assign(y.begin(), y.begin() + n);
        s.t = t0 + static_cast<double>(k) * period;
        result.points.push_back(std::move(s));
      }
      if (k == n_periods) break;
      t_base = t0 + static_cast<double>(k) * period;
      const auto outcome = detail::integrate_core(n, rhs, y.data(), period,
                                                  cfg, event, observer);
      if (outcome.failed) {
        result.failed = true;
        break;
      }
    }
  });
  return result;
}

}  // namespace ld
