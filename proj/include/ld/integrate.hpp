#ifndef LD_INTEGRATE_HPP
#define LD_INTEGRATE_HPP

#include <span>
#include <vector>

#include "ld/dynsys.hpp"

namespace ld {

enum class Method { rk45_adaptive, rk4_fixed };

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  // Step-size cap. Keeps the controller from stepping over zero crossings of
  // individual field components, where the |f|^p integrand has unbounded
  // slope for p < 1.
  double max_step = 0.1;
  Method method = Method::rk45_adaptive;
  double fixed_step = 1e-3;  // rk4_fixed only

  void validate() const;  // throws ConfigError
};

// A ball outside which integration (and descriptor accumulation) stops.
struct EscapeRegion {
  std::vector<double> center;  // empty = origin
  double radius = 0.0;
  bool enabled = false;

  static EscapeRegion ball(double radius);

  // |y - center| - radius; >= 0 means outside.
  double signed_distance(std::span<const double> y) const;
  void validate(int dim) const;
};

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> coords;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  StateVec final_state;
  double stop_time = 0.0;
  bool escaped = false;
  // Step-size underflow or non-finite state before any escape event fired;
  // the trajectory is truncated at the last accepted step.
  bool failed = false;
};

// Integrates spec from `ic` at t0 to t1 (either direction). With
// `sample_times` empty the samples are the accepted solver steps; otherwise
// states are interpolated at the requested times (dense output), skipping
// times outside [t0, stop_time].
Trajectory integrate_trajectory(const SystemSpec& spec, const StateVec& ic,
                                double t0, double t1,
                                const IntegratorConfig& cfg = {},
                                const EscapeRegion& escape = {},
                                std::span<const double> sample_times = {});

enum class Direction { forward, backward };

struct LDAccumResult {
  double ld_value = 0.0;
  bool escaped = false;
  bool failed = false;  // escaped-by-failure; ld_value is the partial sum
  double stop_time = 0.0;
  StateVec final_state;
};

// Accumulates the p-norm descriptor integrand sum_k |f_k|^p over
// [t0, t0+tau] (forward) or [t0-tau, t0] (backward). The accumulator is
// carried as an extra ODE component so the adaptive controller bounds its
// error directly. Accumulation freezes at the escape event.
LDAccumResult accumulate_ld(const SystemSpec& spec, const StateVec& ic,
                            double t0, double tau, Direction dir, double p,
                            const IntegratorConfig& cfg = {},
                            const EscapeRegion& escape = {});

struct StrobeResult {
  std::vector<StateVec> points;
  bool failed = false;  // partial list on integration failure
};

// States at t0 + k*period for k = n_skip..n_periods. Each period endpoint is
// hit exactly (step clamping), so strobe samples carry solver accuracy.
StrobeResult strobe_map(const SystemSpec& spec, const StateVec& ic, double t0,
                        double period, long n_periods, long n_skip,
                        const IntegratorConfig& cfg = {});

}  // namespace ld

#endif  // LD_INTEGRATE_HPP
