#ifndef LD_HAMSEC_HPP
#define LD_HAMSEC_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ld/extract.hpp"
#include "ld/ldfield.hpp"

namespace ld {

// Poincare slices of the damped two-degree-of-freedom double well:
//   sigma1: y = 0,  seeded branch p_y > 0, grid (x, p_x)
//   sigma2: p_y = 0, seeded branch p_x > 0, grid (x, y)
//   sigma3: x = x_value, seeded branch p_x > 0, grid (y, p_y)
enum class SectionId { sigma1, sigma2, sigma3 };
std::string to_string(SectionId id);
SectionId section_id_from_string(const std::string& name);
std::array<std::string, 2> section_axes(SectionId id);

struct SectionSpec {
  SectionId id = SectionId::sigma1;
  double x_value = -0.4;  // sigma3 plane position
  double h0 = 0.05;       // seeding energy
};

// p_x^2/(2 m1) + p_y^2/(2 m2) + (a/4) x^4 - (b/2) x^2 + (omega^2/2) y^2
double hamiltonian_energy(const SystemSpec& spec, std::span<const double> state);

// Completes a grid point to a 4D state on the section with energy h0 by
// solving for the remaining momentum on the positive branch. Returns nullopt
// when the point is energetically forbidden (negative discriminant).
std::optional<StateVec> seed_on_section(const SystemSpec& spec,
                                        const SectionSpec& section, double u,
                                        double v);

// Grid sweep over the section; forbidden nodes are masked out of all layers
// (valid_mask = 0) and excluded from ridge extraction. Axis names are taken
// from the section definition.
LDField compute_section_ld_field(const SystemSpec& spec,
                                 const SectionSpec& section,
                                 const GridSpec2D& grid, const LDConfig& ldcfg,
                                 const IntegratorConfig& intcfg,
                                 int workers = 0);

// Zero-momentum contour of the seeding energy on the section plane (the
// boundary of the energetically allowed region), as a closed polyline.
std::vector<std::array<double, 2>> energy_boundary(const SystemSpec& spec,
                                                   const SectionSpec& section,
                                                   int n_samples = 512);

enum class TransitionClass { reactive, nonreactive, asymptotic_or_timeout };
std::string to_string(TransitionClass c);

struct TransitionLabel {
  TransitionClass label = TransitionClass::asymptotic_or_timeout;
  std::optional<double> settle_time;
  int crossings = 0;  // x = 0 crossings before settling / timeout
  bool failed = false;
};

// Integrates forward until the state enters a ball of radius settle_radius
// around the right well (reactive) or the left well (nonreactive), or t_max
// elapses. With dissipation off there are no attracting wells and generic
// seeds time out.
TransitionLabel classify_transition(const SystemSpec& spec,
                                    const StateVec& state, double t_max,
                                    const IntegratorConfig& cfg = {},
                                    double settle_radius = 1e-3);

// Closed curve assembled from ridge points: points are binned by angle about
// their centroid and the median-radius point per bin becomes a polygon
// vertex. Assumes the ridge loop is star-shaped about its centroid.
struct RidgeLoop {
  std::vector<std::array<double, 2>> polygon;
  std::array<double, 2> centroid{0.0, 0.0};
  double area = 0.0;  // shoelace area of the polygon
};

RidgeLoop close_ridge_loop(const RidgeSet& ridges, int angle_bins = 360);

bool point_in_polygon(std::span<const std::array<double, 2>> poly, double x,
                      double y);

// Minimum distance from (x, y) to the polygon boundary, in grid-cell units.
double distance_to_polygon_cells(std::span<const std::array<double, 2>> poly,
                                 double x, double y, double dx, double dy);

}  // namespace ld

#endif  // LD_HAMSEC_HPP
