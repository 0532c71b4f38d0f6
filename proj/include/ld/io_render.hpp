#ifndef LD_IO_RENDER_HPP
#define LD_IO_RENDER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ld/extract.hpp"
#include "ld/ldfield.hpp"

namespace ld {

inline constexpr int kFieldFormatVersion = 1;

class FieldIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class MagicMismatchError : public FieldIoError {
 public:
  using FieldIoError::FieldIoError;
};
class VersionMismatchError : public FieldIoError {
 public:
  using FieldIoError::FieldIoError;
};
class TruncatedFileError : public FieldIoError {
 public:
  using FieldIoError::FieldIoError;
};

// Field container format: magic "LDF1", little-endian uint32 header length,
// JSON header (grid/system/configs/layer order/endianness tag), then the
// payload: forward, backward, total layers as row-major little-endian
// float64, followed by the escape and valid masks as bytes. Round trips are
// bit-exact.
void write_field(const LDField& field, const std::filesystem::path& path);
LDField read_field(const std::filesystem::path& path);

// CSV with a header row; values printed with 17 significant digits, which
// reparses to the identical float64.
void export_field_csv(const LDField& field, const std::filesystem::path& path);
void export_ridges_csv(const RidgeSet& ridges,
                       const std::filesystem::path& path);

struct Overlay {
  std::vector<std::array<double, 2>> curve;    // polyline in grid coords
  std::vector<std::array<double, 2>> markers;  // point markers in grid coords
  std::array<std::uint8_t, 3> color{255, 0, 255};
  std::string label;
  int marker_radius = -1;  // pixels; -1 scales with the image, 0 = single pixel
};

struct RenderConfig {
  // forward | backward | total | gradient | laplacian (operators are applied
  // to the total layer on demand)
  std::string layer = "total";
  std::string colormap = "viridis";  // viridis | gray
  int width = 0;   // 0 = grid resolution; else an integer multiple of it
  int height = 0;
  std::vector<Overlay> overlays;  // drawn on top, in declared order
};

// Writes an 8-bit RGB PNG. Display normalization is minmax over valid nodes;
// masked-out nodes render grey. Deterministic: identical inputs produce
// identical bytes.
void render_png(const LDField& field, const RenderConfig& cfg,
                const std::filesystem::path& path);

}  // namespace ld

#endif  // LD_IO_RENDER_HPP
