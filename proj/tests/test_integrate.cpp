#include <doctest.h>

#include <cmath>
#include <random>

#include "ld/integrate.hpp"
#include "ld/integrate_core.hpp"

using namespace ld;

TEST_CASE("trajectory endpoint matches the saddle solution") {
  const auto spec = make_system("linear_saddle");
  const auto ic = make_state({1.0, 1.0});
  const auto traj = integrate_trajectory(spec, ic, 0.0, 1.0);
  const auto exact = analytic_solution_linear_saddle(1.0, 2.0, ic, 1.0);
  CHECK_FALSE(traj.escaped);
  CHECK(traj.final_state.coords[0] ==
        doctest::Approx(exact.coords[0]).epsilon(1e-8));
  CHECK(traj.final_state.coords[1] ==
        doctest::Approx(exact.coords[1]).epsilon(1e-8));

  SUBCASE("backward in time as well") {
    const auto back = integrate_trajectory(spec, ic, 0.0, -1.0);
    const auto bexact = analytic_solution_linear_saddle(1.0, 2.0, ic, -1.0);
    CHECK(back.final_state.coords[0] ==
          doctest::Approx(bexact.coords[0]).epsilon(1e-8));
    CHECK(back.final_state.coords[1] ==
          doctest::Approx(bexact.coords[1]).epsilon(1e-8));
  }
}

TEST_CASE("zero-length integration returns the initial condition") {
  const auto spec = make_system("hopf");
  const auto traj =
      integrate_trajectory(spec, make_state({0.3, 0.4}), 2.0, 2.0);
  CHECK(traj.samples.empty());
  CHECK(traj.final_state.coords[0] == 0.3);
  CHECK(traj.final_state.coords[1] == 0.4);
  CHECK(traj.stop_time == 2.0);
  CHECK_FALSE(traj.escaped);
}

TEST_CASE("hopf backward blow-up stops at the escape circle") {
  const auto spec = make_system("hopf", {{"beta", 0.0}, {"sigma", 1.0}});
  const auto escape = EscapeRegion::ball(4.0);
  const auto traj = integrate_trajectory(spec, make_state({1.0, 0.0}), 0.0,
                                         -1.0, {}, escape);
  CHECK(traj.escaped);
  CHECK_FALSE(traj.failed);
  CHECK(traj.stop_time < 0.0);
  CHECK(traj.stop_time > -0.5);  // blow-up time for r0 = 1
  const double r = std::hypot(traj.final_state.coords[0],
                              traj.final_state.coords[1]);
  CHECK(std::abs(r - 4.0) <= 10.0 * 1e-9);
}

TEST_CASE("requested sample times are honored") {
  const auto spec = make_system("linear_saddle");
  const std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto traj = integrate_trajectory(spec, make_state({1.0, 1.0}), 0.0,
                                         1.0, {}, {}, times);
  REQUIRE(traj.samples.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(traj.samples[k].t == doctest::Approx(times[k]));
    const auto exact = analytic_solution_linear_saddle(
        1.0, 2.0, make_state({1.0, 1.0}), times[k]);
    CHECK(traj.samples[k].coords[0] ==
          doctest::Approx(exact.coords[0]).epsilon(1e-7));
    CHECK(traj.samples[k].coords[1] ==
          doctest::Approx(exact.coords[1]).epsilon(1e-7));
  }
}

TEST_CASE("descriptor accumulation against the saddle closed form") {
  const auto spec = make_system("linear_saddle");
  SUBCASE("forward plus backward matches") {
    const auto ic = make_state({1.0, 1.0});
    const auto fwd = accumulate_ld(spec, ic, 0.0, 8.0, Direction::forward, 0.5);
    const auto bwd = accumulate_ld(spec, ic, 0.0, 8.0, Direction::backward, 0.5);
    const double expected =
        closed_form_ld_linear_saddle(1.0, 2.0, 0.5, 8.0, 8.0, 1.0, 1.0);
    CHECK_FALSE(fwd.escaped);
    CHECK_FALSE(bwd.escaped);
    CHECK(std::abs(fwd.ld_value + bwd.ld_value - expected) / expected < 1e-6);
  }
  SUBCASE("equilibrium accumulates nothing") {
    const auto r = accumulate_ld(spec, make_state({0.0, 0.0}), 0.0, 5.0,
                                 Direction::forward, 0.5);
    CHECK(r.ld_value == 0.0);
  }
}

TEST_CASE("accumulator against the critical-hopf polar closed form") {
  // Generic-core oracle: integrate the polar radius/angle equations with the
  // descriptor component attached and compare with the p = 2/3 closed form
  // 0.5*ln(2 tau r0^2 + 1) + tau.
  const double sigma = 1.0, r0 = 0.5, tau = 8.0, p = 2.0 / 3.0;
  auto rhs = [&](double, const double* y, double* dy) {
    dy[0] = -sigma * y[0] * y[0] * y[0];
    dy[1] = 1.0;
    dy[2] = std::pow(std::abs(dy[0]), p) + std::pow(std::abs(dy[1]), p);
  };
  double y[3] = {r0, 0.0, 0.0};
  IntegratorConfig cfg;
  detail::NoEvent event;
  detail::NullObserver obs;
  const auto outcome = detail::integrate_core(3, rhs, y, tau, cfg, event, obs);
  CHECK_FALSE(outcome.failed);
  const double expected = 8.8047189562170502;  // 0.5*ln(5) + 8
  CHECK(y[2] == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("descriptor accumulation is monotone in the horizon") {
  const auto spec = make_system("vanderpol", {{"mu", 1.5}});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ic = make_state({dist(rng), dist(rng)});
    const double tau1 = 1.0 + std::abs(dist(rng));
    const double tau2 = tau1 + 1.0 + std::abs(dist(rng));
    const auto r1 = accumulate_ld(spec, ic, 0.0, tau1, Direction::forward, 0.5);
    const auto r2 = accumulate_ld(spec, ic, 0.0, tau2, Direction::forward, 0.5);
    CHECK(r1.ld_value >= 0.0);
    CHECK(r2.ld_value >= r1.ld_value - 1e-9);
  }
}

TEST_CASE("conservative duffing time-reversal symmetry") {
  const auto spec =
      make_system("duffing", {{"delta", 0.0}, {"gamma", 0.0}});
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double x0 = dist(rng), y0 = dist(rng);
    const auto fwd = accumulate_ld(spec, make_state({x0, y0}), 0.0, 10.0,
                                   Direction::forward, 0.5);
    const auto bwd = accumulate_ld(spec, make_state({x0, -y0}), 0.0, 10.0,
                                   Direction::backward, 0.5);
    CHECK(std::abs(fwd.ld_value - bwd.ld_value) /
              std::max(1.0, fwd.ld_value) <
          1e-6);
  }
}

TEST_CASE("tightening the tolerance refines the descriptor value") {
  const auto spec = make_system("linear_saddle");
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ic = make_state({dist(rng), dist(rng)});
    const double oracle = closed_form_ld_linear_saddle(
        1.0, 2.0, 0.5, 6.0, 6.0, ic.coords[0], ic.coords[1]);
    IntegratorConfig loose;
    loose.rel_tol = 1e-7;
    loose.abs_tol = 1e-7;
    IntegratorConfig tight;
    tight.rel_tol = 1e-8;
    tight.abs_tol = 1e-8;
    auto total = [&](const IntegratorConfig& c) {
      return accumulate_ld(spec, ic, 0.0, 6.0, Direction::forward, 0.5, c)
                 .ld_value +
             accumulate_ld(spec, ic, 0.0, 6.0, Direction::backward, 0.5, c)
                 .ld_value;
    };
    const double err_loose = std::abs(total(loose) - oracle);
    const double delta = std::abs(total(tight) - total(loose));
    CHECK(delta <= 10.0 * err_loose + 1e-12);
  }
}

TEST_CASE("escape event location accuracy") {
  const auto spec = make_system("hopf", {{"beta", 0.0}});
  const auto escape = EscapeRegion::ball(4.0);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(0.4, 1.8);
  for (int trial = 0; trial < 10; ++trial) {
    const double r0 = dist(rng);
    const auto res = accumulate_ld(spec, make_state({r0, 0.0}), 0.0, 8.0,
                                   Direction::backward, 0.5, {}, escape);
    REQUIRE(res.escaped);
    REQUIRE_FALSE(res.failed);
    const double g =
        std::hypot(res.final_state.coords[0], res.final_state.coords[1]) - 4.0;
    CHECK(std::abs(g) <= 10.0 * 1e-9);
  }
}

TEST_CASE("blow-up without an escape region flags failure and clips") {
  const auto spec = make_system("hopf", {{"beta", 0.0}});
  const auto res = accumulate_ld(spec, make_state({1.0, 0.0}), 0.0, 1.0,
                                 Direction::backward, 0.5);
  CHECK(res.escaped);
  CHECK(res.failed);
  CHECK(res.ld_value >= 0.0);
  CHECK(std::isfinite(res.ld_value));
  // blow-up at backward time 0.5 for r0 = 1
  CHECK(res.stop_time == doctest::Approx(-0.5).epsilon(2e-2));
}

TEST_CASE("strobe map") {
  SUBCASE("single point when n_periods equals n_skip") {
    const auto spec = make_system("duffing", {{"gamma", 0.0}});
    const auto res =
        strobe_map(spec, make_state({0.5, 0.0}), 0.0, 1.0, 3, 3, {});
    REQUIRE(res.points.size() == 1);
    CHECK_FALSE(res.failed);
  }
  SUBCASE("damped unforced duffing converges to the right well") {
    const auto spec = make_system("duffing", {{"delta", 0.3}, {"gamma", 0.0}});
    const auto res = strobe_map(spec, make_state({0.5, 0.0}), 0.0,
                                2.0 * M_PI, 30, 25, {});
    REQUIRE_FALSE(res.points.empty());
    const auto& last = res.points.back();
    CHECK(std::abs(last.coords[0] - 1.0) < 1e-6);
    CHECK(std::abs(last.coords[1]) < 1e-6);
  }
  SUBCASE("strobe hits the period times exactly") {
    const auto spec =
        make_system("duffing", {{"gamma", 0.5}, {"omega", 1.2}});
    const double period = 2.0 * M_PI / 1.2;
    const auto res =
        strobe_map(spec, make_state({1.0, 0.0}), 0.0, period, 5, 0, {});
    REQUIRE(res.points.size() == 6);
    for (std::size_t k = 0; k < res.points.size(); ++k) {
      CHECK(res.points[k].t ==
            doctest::Approx(static_cast<double>(k) * period));
    }
  }
}

TEST_CASE("fixed-step method integrates the saddle") {
  IntegratorConfig cfg;
  cfg.method = Method::rk4_fixed;
  cfg.fixed_step = 1e-3;
  const auto spec = make_system("linear_saddle");
  const auto ic = make_state({1.0, 1.0});
  const auto traj = integrate_trajectory(spec, ic, 0.0, 1.0, cfg);
  const auto exact = analytic_solution_linear_saddle(1.0, 2.0, ic, 1.0);
  CHECK(traj.final_state.coords[0] ==
        doctest::Approx(exact.coords[0]).epsilon(1e-9));
  CHECK(traj.final_state.coords[1] ==
        doctest::Approx(exact.coords[1]).epsilon(1e-9));
}

TEST_CASE("configuration validation") {
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  const auto spec = make_system("hopf");
  CHECK_THROWS_AS(accumulate_ld(spec, make_state({0.1, 0.1}), 0.0, 1.0,
                                Direction::forward, 1.5),
                  ConfigError);
  CHECK_THROWS_AS(accumulate_ld(spec, make_state({0.1, 0.1}), 0.0, -1.0,
                                Direction::forward, 0.5),
                  ConfigError);
  EscapeRegion bad_escape;
  bad_escape.enabled = true;
  bad_escape.radius = -1.0;
  CHECK_THROWS_AS(bad_escape.validate(2), ConfigError);
  CHECK_THROWS_AS(strobe_map(spec, make_state({0.1, 0.1}), 0.0, 0.0, 3, 0, {}),
                  ConfigError);
}
