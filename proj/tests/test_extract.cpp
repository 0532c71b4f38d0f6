#include <doctest.h>

#include <cmath>
#include <set>

#include "ld/extract.hpp"

using namespace ld;

namespace {

// |x| sampled on x in [-1, 1] along axis 0, constant along axis 1.
LDField abs_x_field(int n0, int n1) {
  LDField f;
  f.grid.ranges = {{{-1.0, 1.0}, {-1.0, 1.0}}};
  f.grid.resolution = {n0, n1};
  f.total.resize(std::size_t(n0) * n1);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      f.total[f.index(i, j)] = std::abs(f.grid.coord0(i));
    }
  }
  f.forward = f.total;
  f.backward.assign(f.total.size(), 0.0);
  f.escape_mask.assign(f.total.size(), 0);
  f.valid_mask.assign(f.total.size(), 1);
  return f;
}

}  // namespace

TEST_CASE("gradient norm stencils") {
  SUBCASE("constant layer has zero gradient") {
    std::vector<double> layer(25, 3.5);
    const auto g = gradient_norm(layer, 5, 5, 0.1, 0.1);
    for (double v : g) CHECK(v == 0.0);
  }
  SUBCASE("linear layer f = x has unit gradient") {
    const int n = 7;
    std::vector<double> layer(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) layer[i * n + j] = i * 1.0;
    const auto g = gradient_norm(layer, n, n, 1.0, 1.0);
    for (double v : g) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("|x| kink: zero central difference at the kink, one elsewhere") {
    const auto field = abs_x_field(201, 5);
    const auto g =
        gradient_norm(field.total, 201, 5, field.grid.spacing0(), 0.5);
    // central difference cancels exactly at the even kink...
    CHECK(g[field.index(100, 2)] == doctest::Approx(0.0));
    // ...and equals the one-sided slope everywhere else
    CHECK(g[field.index(99, 2)] == doctest::Approx(1.0));
    CHECK(g[field.index(101, 2)] == doctest::Approx(1.0));
    CHECK(g[field.index(50, 2)] == doctest::Approx(1.0));
  }
}

TEST_CASE("laplacian stencils") {
  SUBCASE("quadratic bowl x^2 + y^2 gives 4 in the interior") {
    const int n = 9;
    std::vector<double> layer(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) layer[i * n + j] = i * i + j * j;
    const auto l = laplacian(layer, n, n, 1.0, 1.0);
    for (int i = 1; i < n - 1; ++i)
      for (int j = 1; j < n - 1; ++j)
        CHECK(l[i * n + j] == doctest::Approx(4.0));
    // borders zeroed
    for (int j = 0; j < n; ++j) {
      CHECK(l[j] == 0.0);
      CHECK(l[(n - 1) * n + j] == 0.0);
    }
  }
  SUBCASE("linear layer vanishes in the interior") {
    const int n = 6;
    std::vector<double> layer(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) layer[i * n + j] = 2.0 * i - j;
    const auto l = laplacian(layer, n, n, 1.0, 1.0);
    for (double v : l) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("|x| kink spikes at x = 0") {
    const auto field = abs_x_field(201, 5);
    const double dx = field.grid.spacing0();
    const auto l = laplacian(field.total, 201, 5, dx, 0.5);
    const double spike = l[field.index(100, 2)];
    CHECK(spike == doctest::Approx(2.0 / dx));
    CHECK(std::abs(l[field.index(40, 2)]) < 1e-9);
    CHECK(std::abs(l[field.index(160, 2)]) < 1e-9);
  }
}

TEST_CASE("operator properties") {
  // translation equivariance and invariance under adding a constant
  const int n = 12;
  std::vector<double> layer(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      layer[i * n + j] = std::sin(0.7 * i) * std::cos(0.4 * j);
  std::vector<double> shifted = layer;
  for (double& v : shifted) v += 42.0;
  const auto ga = gradient_norm(layer, n, n, 0.3, 0.2);
  const auto gb = gradient_norm(shifted, n, n, 0.3, 0.2);
  for (std::size_t k = 0; k < ga.size(); ++k) {
    CHECK(ga[k] == doctest::Approx(gb[k]).epsilon(1e-10));
  }
  const auto la = laplacian(layer, n, n, 0.3, 0.2);
  const auto lb = laplacian(shifted, n, n, 0.3, 0.2);
  for (std::size_t k = 0; k < la.size(); ++k) {
    CHECK(std::abs(la[k] - lb[k]) < 1e-9);
  }
}

TEST_CASE("ridge extraction") {
  SUBCASE("constant layer yields an empty set") {
    auto field = abs_x_field(21, 21);
    std::fill(field.total.begin(), field.total.end(), 1.0);
    const auto ridges =
        extract_ridges(field, LayerKind::total, RidgeOperator::gradient_norm);
    CHECK(ridges.points.empty());
  }

  SUBCASE("|x| kink concentrates laplacian ridges at the center column") {
    const auto field = abs_x_field(201, 9);
    RidgeOptions opts;
    opts.percentile = 99.0;
    const auto ridges =
        extract_ridges(field, LayerKind::total, RidgeOperator::laplacian, opts);
    REQUIRE_FALSE(ridges.points.empty());
    for (const auto& pt : ridges.points) {
      CHECK(std::abs(pt.i - 100) <= 1);
    }
  }

  SUBCASE("higher percentile extracts a subset") {
    const auto field = abs_x_field(101, 31);
    RidgeOptions lo;
    lo.percentile = 80.0;
    RidgeOptions hi;
    hi.percentile = 95.0;
    const auto big =
        extract_ridges(field, LayerKind::total, RidgeOperator::laplacian, lo);
    const auto small =
        extract_ridges(field, LayerKind::total, RidgeOperator::laplacian, hi);
    std::set<std::pair<int, int>> big_set;
    for (const auto& pt : big.points) big_set.insert({pt.i, pt.j});
    for (const auto& pt : small.points) {
      CHECK(big_set.count({pt.i, pt.j}) == 1);
    }
    CHECK(small.points.size() <= big.points.size());
  }

  SUBCASE("points come out lexicographically sorted") {
    const auto field = abs_x_field(101, 11);
    const auto ridges =
        extract_ridges(field, LayerKind::total, RidgeOperator::laplacian);
    for (std::size_t k = 1; k < ridges.points.size(); ++k) {
      const auto& a = ridges.points[k - 1];
      const auto& b = ridges.points[k];
      CHECK((a.i < b.i || (a.i == b.i && a.j < b.j)));
    }
  }

  SUBCASE("escape-mask transitions are excluded when requested") {
    auto field = abs_x_field(101, 21);
    // mark a vertical escape band right of the kink
    for (int i = 60; i < 101; ++i)
      for (int j = 0; j < 21; ++j) field.escape_mask[field.index(i, j)] = 1;
    // put a big value jump at the mask seam so it would otherwise win
    for (int i = 60; i < 101; ++i)
      for (int j = 0; j < 21; ++j) field.total[field.index(i, j)] += 10.0;
    RidgeOptions with;
    with.percentile = 90.0;
    with.escape_boundary_exclusion = 1;
    const auto excluded =
        extract_ridges(field, LayerKind::total, RidgeOperator::gradient_norm, with);
    for (const auto& pt : excluded.points) {
      CHECK((pt.i < 59 || pt.i > 60));
    }
    RidgeOptions without = with;
    without.escape_boundary_exclusion = 0;
    const auto kept = extract_ridges(field, LayerKind::total,
                                     RidgeOperator::gradient_norm, without);
    bool seam_found = false;
    for (const auto& pt : kept.points) {
      if (pt.i == 59 || pt.i == 60) seam_found = true;
    }
    CHECK(seam_found);
  }

  SUBCASE("invalid nodes and their stencil neighbors are not candidates") {
    auto field = abs_x_field(101, 21);
    for (int j = 0; j < 21; ++j) field.valid_mask[field.index(100, j)] = 0;
    const auto ridges =
        extract_ridges(field, LayerKind::total, RidgeOperator::gradient_norm);
    for (const auto& pt : ridges.points) {
      CHECK(pt.i < 99);
    }
  }
}

TEST_CASE("ridge distances in cell units") {
  RidgeSet ridges;
  std::vector<std::array<double, 2>> curve;
  for (int k = 0; k < 10; ++k) {
    const double x = 0.1 * k;
    curve.push_back({x, 0.5});
    RidgePoint pt;
    pt.x = x;
    pt.y = 0.5;
    ridges.points.push_back(pt);
  }
  const double dx = 0.1, dy = 0.1;

  SUBCASE("identical sets") {
    const auto d = ridge_distance(ridges, curve, 1.0, dx, dy);
    CHECK(d.mean_cells == 0.0);
    CHECK(d.max_cells == 0.0);
    CHECK(d.coverage_fraction == 1.0);
  }
  SUBCASE("diagonal one-cell shift") {
    RidgeSet shifted = ridges;
    for (auto& pt : shifted.points) {
      pt.x += dx;
      pt.y += dy;
    }
    const auto d = ridge_distance(shifted, curve, 2.0, dx, dy);
    CHECK(d.max_cells == doctest::Approx(std::sqrt(2.0)));
    CHECK(d.coverage_fraction == 1.0);
    const auto tight = ridge_distance(shifted, curve, 1.0, dx, dy);
    CHECK(tight.coverage_fraction < 1.0);
  }
  SUBCASE("empty input is an error") {
    RidgeSet empty;
    CHECK_THROWS_AS(ridge_distance(empty, curve, 1.0, dx, dy), ConfigError);
    CHECK_THROWS_AS(ridge_distance(ridges, {}, 1.0, dx, dy), ConfigError);
  }
}

TEST_CASE("saddle layers: forward and backward gradient ridges are disjoint") {
  // Closed-form layers of the balanced saddle: the forward ridge hugs the
  // x = 0 column, the backward ridge hugs y = 0; away from the origin the
  // two sets must not overlap.
  const int n = 101;
  LDField field;
  field.grid.ranges = {{{-1.0, 1.0}, {-1.0, 1.0}}};
  field.grid.resolution = {n, n};
  const std::size_t count = std::size_t(n) * n;
  field.forward.resize(count);
  field.backward.resize(count);
  field.total.resize(count);
  field.escape_mask.assign(count, 0);
  field.valid_mask.assign(count, 1);
  const double tau_f = 8.0;
  const double tau_b = balance_integration_times(1.0, 2.0, 0.5, tau_f);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = field.grid.coord0(i), y = field.grid.coord1(j);
      field.forward[field.index(i, j)] =
          closed_form_ld_linear_saddle(1.0, 2.0, 0.5, tau_f, 0.0, x, y);
      field.backward[field.index(i, j)] =
          closed_form_ld_linear_saddle(1.0, 2.0, 0.5, 0.0, tau_b, x, y);
      field.total[field.index(i, j)] =
          field.forward[field.index(i, j)] + field.backward[field.index(i, j)];
    }
  }
  // 98.5th percentile keeps fewer points than the two one-cell bands hold,
  // so each set stays within one cell of its axis.
  RidgeOptions opts;
  opts.percentile = 98.5;
  const auto fwd =
      extract_ridges(field, LayerKind::forward, RidgeOperator::gradient_norm, opts);
  const auto bwd =
      extract_ridges(field, LayerKind::backward, RidgeOperator::gradient_norm, opts);
  std::set<std::pair<int, int>> fwd_set;
  for (const auto& pt : fwd.points) fwd_set.insert({pt.i, pt.j});
  const int mid = (n - 1) / 2;
  for (const auto& pt : bwd.points) {
    if (std::abs(pt.i - mid) <= 1 && std::abs(pt.j - mid) <= 1) continue;
    CHECK(fwd_set.count({pt.i, pt.j}) == 0);
  }

  SUBCASE("laplacian sign pattern around the singular axes") {
    const double dx = field.grid.spacing0(), dy = field.grid.spacing1();
    const auto lap = laplacian(field.forward, n, n, dx, dy);
    // positive spike on the x = 0 column, negative flanks on both sides
    for (int j = 20; j < n - 20; ++j) {
      CHECK(lap[field.index(mid, j)] > 0.0);
      for (int off : {2, 3, 4}) {
        CHECK(lap[field.index(mid + off, j)] < 0.0);
        CHECK(lap[field.index(mid - off, j)] < 0.0);
      }
    }
  }
}
