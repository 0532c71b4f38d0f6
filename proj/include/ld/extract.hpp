#ifndef LD_EXTRACT_HPP
#define LD_EXTRACT_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ld/ldfield.hpp"

namespace ld {

// Discrete operators on row-major (n0 x n1) scalar layers. spacing is per
// axis (dx along axis 0, dy along axis 1).

// ||grad L||: central differences in the interior, one-sided at the borders.
std::vector<double> gradient_norm(std::span<const double> layer, int n0,
                                  int n1, double dx, double dy);

// Five-point Laplacian in the interior; border rows/columns are set to 0 and
// excluded from ridge thresholding.
std::vector<double> laplacian(std::span<const double> layer, int n0, int n1,
                              double dx, double dy);

enum class RidgeOperator { gradient_norm, laplacian };
std::string to_string(RidgeOperator op);
RidgeOperator ridge_operator_from_string(const std::string& name);

struct RidgePoint {
  int i = 0, j = 0;
  double x = 0.0, y = 0.0;
  double value = 0.0;  // operator response at the node
};

struct RidgeSet {
  std::vector<RidgePoint> points;  // sorted lexicographically by (i, j)
  LayerKind source_layer = LayerKind::total;
  RidgeOperator op = RidgeOperator::gradient_norm;
  double threshold_percentile = 95.0;
};

struct RidgeOptions {
  double percentile = 95.0;
  // Chebyshev radius (in cells) around escape-mask transitions removed from
  // ridge candidacy, so escape-truncation seams do not register as features.
  // 0 keeps them, which is the right setting when the feature under study is
  // itself an escape-time boundary.
  int escape_boundary_exclusion = 1;
  // One-pass non-maximum suppression along the gradient direction, for
  // thinner curve exports.
  bool nonmax_suppression = false;
};

// Applies the operator to the chosen layer (absolute value for the
// Laplacian) and keeps nodes whose response exceeds the given percentile of
// the candidate distribution. Nodes that are invalid, adjacent to invalid
// nodes, on the border (Laplacian), or near escape transitions (see options)
// are not candidates.
RidgeSet extract_ridges(const LDField& field, LayerKind layer,
                        RidgeOperator op, const RidgeOptions& opts = {});

struct RidgeDistance {
  double mean_cells = 0.0;  // mean over ridge points of distance to curve
  double max_cells = 0.0;
  double coverage_fraction = 0.0;  // curve samples with a ridge point within k
};

// Distances are measured in grid-cell units: axis offsets are divided by
// (dx, dy) before taking Euclidean norms. Throws ConfigError on empty input.
RidgeDistance ridge_distance(const RidgeSet& ridges,
                             std::span<const std::array<double, 2>> curve,
                             double k_cells, double dx, double dy);

}  // namespace ld

#endif  // LD_EXTRACT_HPP
