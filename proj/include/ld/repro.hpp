#ifndef LD_REPRO_HPP
#define LD_REPRO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ld/hamsec.hpp"
#include "ld/ldfield.hpp"

namespace ld {

// One reproduction target: the full parameter set for a reference figure's
// data. Emitted artifacts: the field file, a PNG of the headline layer, and
// (for strobed targets) the Poincare point cloud.
struct ReproTarget {
  std::string id;
  std::string system;
  std::map<std::string, double> params;
  GridSpec2D grid;
  LDConfig ld;
  std::optional<SectionSpec> section;
  std::string render_layer = "total";
  // strobe comparison (forced Duffing targets)
  bool with_strobe = false;
  double strobe_period = 0.0;
  long strobe_periods = 0;
  long strobe_skip = 0;
  std::array<double, 2> strobe_ic{0.0, 0.0};
};

const std::vector<ReproTarget>& repro_targets();
const ReproTarget& repro_target(const std::string& id);
std::vector<std::string> repro_target_ids();

}  // namespace ld

#endif  // LD_REPRO_HPP
