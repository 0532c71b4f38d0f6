#ifndef LD_LDFIELD_HPP
#define LD_LDFIELD_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ld/integrate.hpp"

namespace ld {

inline constexpr const char* kEngineVersion = "1.0.0";

// Node-at-endpoints grid (linspace semantics): for odd resolutions and
// symmetric ranges the axis lines x = 0 / y = 0 fall exactly on grid nodes.
struct GridSpec2D {
  std::array<std::string, 2> axis_names{"x", "y"};
  std::array<std::array<double, 2>, 2> ranges{{{-1.0, 1.0}, {-1.0, 1.0}}};
  std::array<int, 2> resolution{501, 501};
  // Values for the phase-space coordinates not covered by the two axes.
  std::map<std::string, double> fixed_coords;
  double t0 = 0.0;

  // coord(i) = (lo*(n-1-i) + hi*i)/(n-1): hits endpoints exactly and is
  // exactly antisymmetric for ranges of the form [-c, c].
  double coord0(int i) const;
  double coord1(int j) const;
  double spacing0() const;
  double spacing1() const;
  void validate() const;
};

struct LDConfig {
  double p = 0.5;
  double tau_f = 0.0;
  double tau_b = 0.0;
  EscapeRegion escape;
  // Derive tau_b from tau_f and the saddle rates so forward/backward layer
  // magnitudes match. Rates come from balance_lambda/balance_mu when set,
  // otherwise from the system's lambda/mu parameters.
  bool auto_balance = false;
  double balance_lambda = 0.0;
  double balance_mu = 0.0;

  void validate() const;
};

struct SectionInfo {
  std::string id;
  double x_value = 0.0;
  double h0 = 0.0;
};

struct FieldMeta {
  SystemSpec system;
  LDConfig ld;  // tau_b holds the effective (possibly balanced) value
  IntegratorConfig integrator;
  std::string engine_version = kEngineVersion;
  long failure_count = 0;
  std::string normalize_mode = "none";
  bool constant_layer_warning = false;
  std::optional<SectionInfo> section;
};

enum class LayerKind { forward, backward, total };
std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LDField {
  GridSpec2D grid;
  // Row-major: index i along axis 0, j along axis 1 -> i*n1 + j.
  std::vector<double> forward, backward, total;
  std::vector<std::uint8_t> escape_mask;  // escaped (or failed) in either direction
  std::vector<std::uint8_t> valid_mask;   // 0 = node not computed (e.g. forbidden)
  FieldMeta meta;

  int n0() const { return grid.resolution[0]; }
  int n1() const { return grid.resolution[1]; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(n0()) * static_cast<std::size_t>(n1());
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n1()) + j;
  }
  const std::vector<double>& layer(LayerKind kind) const;
  std::vector<double>& layer(LayerKind kind);
};

// Sweeps the grid, computing forward/backward/total descriptor layers. The
// sweep is data-parallel over nodes and bit-deterministic for any worker
// count (each node's result depends only on its own inputs). workers <= 0
// uses the hardware concurrency.
LDField compute_ld_field(const SystemSpec& spec, const GridSpec2D& grid,
                         const LDConfig& ldcfg, const IntegratorConfig& intcfg,
                         int workers = 0);

enum class NormalizeMode { none, minmax };

// minmax maps each layer independently to [0, 1] over valid nodes. A
// constant layer maps to zeros and sets the warning flag in meta.
LDField normalize_field(const LDField& field, NormalizeMode mode);

}  // namespace ld

#endif  // LD_LDFIELD_HPP
