#include "ld/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ld {

namespace {

inline std::size_t idx(int i, int j, int n1) {
  return static_cast<std::size_t>(i) * n1 + j;
}

// Linear-interpolation quantile of the values in v (v is consumed).
double percentile_threshold(std::vector<double> v, double percentile) {
  std::sort(v.begin(), v.end());
  const double pos = percentile / 100.0 * (static_cast<double>(v.size()) - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

std::vector<double> gradient_norm(std::span<const double> layer, int n0,
                                  int n1, double dx, double dy) {
  if (n0 < 2 || n1 < 2) throw ConfigError("layer must be at least 2x2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("spacing must be positive");
  std::vector<double> out(layer.size());
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      double gx, gy;
      if (i == 0) {
        gx = (layer[idx(1, j, n1)] - layer[idx(0, j, n1)]) / dx;
      } else if (i == n0 - 1) {
        gx = (layer[idx(n0 - 1, j, n1)] - layer[idx(n0 - 2, j, n1)]) / dx;
      } else {
        gx = (layer[idx(i + 1, j, n1)] - layer[idx(i - 1, j, n1)]) / (2.0 * dx);
      }
      if (j == 0) {
        gy = (layer[idx(i, 1, n1)] - layer[idx(i, 0, n1)]) / dy;
      } else if (j == n1 - 1) {
        gy = (layer[idx(i, n1 - 1, n1)] - layer[idx(i, n1 - 2, n1)]) / dy;
      } else {
        gy = (layer[idx(i, j + 1, n1)] - layer[idx(i, j - 1, n1)]) / (2.0 * dy);
      }
      out[idx(i, j, n1)] = std::hypot(gx, gy);
    }
  }
  return out;
}

std::vector<double> laplacian(std::span<const double> layer, int n0, int n1,
                              double dx, double dy) {
  if (n0 < 2 || n1 < 2) throw ConfigError("layer must be at least 2x2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("spacing must be positive");
  // Border rows/columns stay 0; a layer with no interior is all zeros.
  std::vector<double> out(layer.size(), 0.0);
  for (int i = 1; i < n0 - 1; ++i) {
    for (int j = 1; j < n1 - 1; ++j) {
      const double lxx = (layer[idx(i + 1, j, n1)] - 2.0 * layer[idx(i, j, n1)] +
                          layer[idx(i - 1, j, n1)]) /
                         (dx * dx);
      const double lyy = (layer[idx(i, j + 1, n1)] - 2.0 * layer[idx(i, j, n1)] +
                          layer[idx(i, j - 1, n1)]) /
                         (dy * dy);
      out[idx(i, j, n1)] = lxx + lyy;
    }
  }
  return out;
}

std::string to_string(RidgeOperator op) {
  return op == RidgeOperator::gradient_norm ? "gradient_norm" : "laplacian";
}

RidgeOperator ridge_operator_from_string(const std::string& name) {
  if (name == "gradient_norm" || name == "gradient") {
    return RidgeOperator::gradient_norm;
  }
  if (name == "laplacian") return RidgeOperator::laplacian;
  throw ConfigError("unknown ridge operator: '" + name + "'");
}

RidgeSet extract_ridges(const LDField& field, LayerKind layer_kind,
                        RidgeOperator op, const RidgeOptions& opts) {
  if (!(opts.percentile > 0.0 && opts.percentile < 100.0)) {
    throw ConfigError("percentile must lie in (0, 100)");
  }
  const int n0 = field.n0(), n1 = field.n1();
  const double dx = field.grid.spacing0(), dy = field.grid.spacing1();
  const auto& values = field.layer(layer_kind);

  std::vector<double> response =
      op == RidgeOperator::gradient_norm
          ? gradient_norm(values, n0, n1, dx, dy)
          : laplacian(values, n0, n1, dx, dy);
  if (op == RidgeOperator::laplacian) {
    for (double& v : response) v = std::abs(v);
  }

  const bool need_interior = op == RidgeOperator::laplacian;
  auto candidate = [&](int i, int j) {
    if (need_interior && (i == 0 || i == n0 - 1 || j == 0 || j == n1 - 1)) {
      return false;
    }
    if (!field.valid_mask[field.index(i, j)]) return false;
    // The stencil must not reach masked-out nodes.
    for (auto [di, dj] : {std::array{1, 0}, std::array{-1, 0},
                          std::array{0, 1}, std::array{0, -1}}) {
      const int ni = std::clamp(i + di, 0, n0 - 1);
      const int nj = std::clamp(j + dj, 0, n1 - 1);
      if (!field.valid_mask[field.index(ni, nj)]) return false;
    }
    if (opts.escape_boundary_exclusion > 0) {
      const int r = opts.escape_boundary_exclusion;
      const auto own = field.escape_mask[field.index(i, j)];
      for (int di = -r; di <= r; ++di) {
        for (int dj = -r; dj <= r; ++dj) {
          const int ni = i + di, nj = j + dj;
          if (ni < 0 || ni >= n0 || nj < 0 || nj >= n1) continue;
          if (field.escape_mask[field.index(ni, nj)] != own) return false;
        }
      }
    }
    return true;
  };

  std::vector<double> pool;
  pool.reserve(field.node_count());
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      if (candidate(i, j)) pool.push_back(response[field.index(i, j)]);
    }
  }

  RidgeSet ridges;
  ridges.source_layer = layer_kind;
  ridges.op = op;
  ridges.threshold_percentile = opts.percentile;
  if (pool.empty()) return ridges;

  const double threshold = percentile_threshold(std::move(pool), opts.percentile);

  auto is_ridge = [&](int i, int j) {
    return candidate(i, j) && response[field.index(i, j)] > threshold;
  };

  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      if (!is_ridge(i, j)) continue;
      if (opts.nonmax_suppression && i > 0 && i < n0 - 1 && j > 0 &&
          j < n1 - 1) {
        // Suppress along the steepest-ascent direction of the source layer,
        // quantized to the 8-neighborhood.
        const double gx = (values[field.index(i + 1, j)] -
                           values[field.index(i - 1, j)]) /
                          (2.0 * dx);
        const double gy = (values[field.index(i, j + 1)] -
                           values[field.index(i, j - 1)]) /
                          (2.0 * dy);
        const double norm = std::hypot(gx, gy);
        if (norm > 0.0) {
          const int di = static_cast<int>(std::lround(gx / norm));
          const int dj = static_cast<int>(std::lround(gy / norm));
          const double here = response[field.index(i, j)];
          if (response[field.index(i + di, j + dj)] > here ||
              response[field.index(i - di, j - dj)] > here) {
            continue;
          }
        }
      }
      RidgePoint pt;
      pt.i = i;
      pt.j = j;
      pt.x = field.grid.coord0(i);
      pt.y = field.grid.coord1(j);
      pt.value = response[field.index(i, j)];
      ridges.points.push_back(pt);
    }
  }
  return ridges;
}

RidgeDistance ridge_distance(const RidgeSet& ridges,
                             std::span<const std::array<double, 2>> curve,
                             double k_cells, double dx, double dy) {
  if (ridges.points.empty() || curve.empty()) {
    throw ConfigError("ridge_distance requires nonempty ridge set and curve");
  }
  if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("spacing must be positive");

  RidgeDistance out;
  double sum = 0.0, worst = 0.0;
  for (const auto& pt : ridges.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : curve) {
      const double du = (pt.x - c[0]) / dx;
      const double dv = (pt.y - c[1]) / dy;
      best = std::min(best, du * du + dv * dv);
    }
    best = std::sqrt(best);
    sum += best;
    worst = std::max(worst, best);
  }
  out.mean_cells = sum / static_cast<double>(ridges.points.size());
  out.max_cells = worst;

  std::size_t covered = 0;
  for (const auto& c : curve) {
    const double k2 = k_cells * k_cells;
    bool hit = false;
    for (const auto& pt : ridges.points) {
      const double du = (pt.x - c[0]) / dx;
      const double dv = (pt.y - c[1]) / dy;
      if (du * du + dv * dv <= k2) {
        hit = true;
        break;
      }
    }
    if (hit) ++covered;
  }
  out.coverage_fraction =
      static_cast<double>(covered) / static_cast<double>(curve.size());
  return out;
}

}  // namespace ld
