#include "ld/io_render.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

namespace ld {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'L', 'D', 'F', '1'};

// --- JSON header <-> metadata ---

json escape_to_json(const EscapeRegion& e) {
  return json{{"enabled", e.enabled},
              {"radius", e.radius},
              {"center", e.center}};
}

EscapeRegion escape_from_json(const json& j) {
  EscapeRegion e;
  e.enabled = j.at("enabled").get<bool>();
  e.radius = j.at("radius").get<double>();
  e.center = j.at("center").get<std::vector<double>>();
  return e;
}

json header_json(const LDField& field) {
  const auto& meta = field.meta;
  json j;
  j["format_version"] = kFieldFormatVersion;
  j["endianness"] = "little";
  j["engine_version"] = meta.engine_version;
  j["layers"] = {"forward", "backward", "total"};
  j["masks"] = {"escape", "valid"};
  j["grid"] = {{"axis_names", field.grid.axis_names},
               {"ranges", field.grid.ranges},
               {"resolution", field.grid.resolution},
               {"fixed_coords", field.grid.fixed_coords},
               {"t0", field.grid.t0}};
  j["system"] = {{"id", to_string(meta.system.id)},
                 {"params", meta.system.params},
                 {"dim", meta.system.dim},
                 {"autonomous", meta.system.autonomous}};
  j["ld"] = {{"p", meta.ld.p},
             {"tau_f", meta.ld.tau_f},
             {"tau_b", meta.ld.tau_b},
             {"auto_balance", meta.ld.auto_balance},
             {"balance_lambda", meta.ld.balance_lambda},
             {"balance_mu", meta.ld.balance_mu},
             {"escape", escape_to_json(meta.ld.escape)}};
  j["integrator"] = {
      {"rel_tol", meta.integrator.rel_tol},
      {"abs_tol", meta.integrator.abs_tol},
      {"max_step", meta.integrator.max_step},
      {"method", meta.integrator.method == Method::rk4_fixed ? "rk4_fixed"
                                                             : "rk45_adaptive"},
      {"fixed_step", meta.integrator.fixed_step}};
  j["failure_count"] = meta.failure_count;
  j["normalize_mode"] = meta.normalize_mode;
  j["constant_layer_warning"] = meta.constant_layer_warning;
  if (meta.section) {
    j["section"] = {{"id", meta.section->id},
                    {"x_value", meta.section->x_value},
                    {"h0", meta.section->h0}};
  }
  return j;
}

void header_from_json(const json& j, LDField& field) {
  const auto& g = j.at("grid");
  field.grid.axis_names = g.at("axis_names").get<std::array<std::string, 2>>();
  field.grid.ranges =
      g.at("ranges").get<std::array<std::array<double, 2>, 2>>();
  field.grid.resolution = g.at("resolution").get<std::array<int, 2>>();
  field.grid.fixed_coords =
      g.at("fixed_coords").get<std::map<std::string, double>>();
  field.grid.t0 = g.at("t0").get<double>();

  auto& meta = field.meta;
  const auto& s = j.at("system");
  meta.system.id = system_id_from_string(s.at("id").get<std::string>());
  meta.system.params = s.at("params").get<std::map<std::string, double>>();
  meta.system.dim = s.at("dim").get<int>();
  meta.system.autonomous = s.at("autonomous").get<bool>();

  const auto& l = j.at("ld");
  meta.ld.p = l.at("p").get<double>();
  meta.ld.tau_f = l.at("tau_f").get<double>();
  meta.ld.tau_b = l.at("tau_b").get<double>();
  meta.ld.auto_balance = l.at("auto_balance").get<bool>();
  meta.ld.balance_lambda = l.at("balance_lambda").get<double>();
  meta.ld.balance_mu = l.at("balance_mu").get<double>();
  meta.ld.escape = escape_from_json(l.at("escape"));

  const auto& ic = j.at("integrator");
  meta.integrator.rel_tol = ic.at("rel_tol").get<double>();
  meta.integrator.abs_tol = ic.at("abs_tol").get<double>();
  meta.integrator.max_step = ic.at("max_step").get<double>();
  meta.integrator.method = ic.at("method").get<std::string>() == "rk4_fixed"
                               ? Method::rk4_fixed
                               : Method::rk45_adaptive;
  meta.integrator.fixed_step = ic.at("fixed_step").get<double>();

  meta.engine_version = j.at("engine_version").get<std::string>();
  meta.failure_count = j.at("failure_count").get<long>();
  meta.normalize_mode = j.at("normalize_mode").get<std::string>();
  meta.constant_layer_warning = j.at("constant_layer_warning").get<bool>();
  if (j.contains("section")) {
    SectionInfo info;
    info.id = j["section"].at("id").get<std::string>();
    info.x_value = j["section"].at("x_value").get<double>();
    info.h0 = j["section"].at("h0").get<double>();
    meta.section = info;
  }
}

// --- little-endian payload helpers ---

void append_doubles_le(std::string& out, const std::vector<double>& v) {
  static_assert(sizeof(double) == 8);
  const std::size_t start = out.size();
  out.resize(start + v.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + start, v.data(), v.size() * 8);
  } else {
    for (std::size_t k = 0; k < v.size(); ++k) {
      unsigned char b[8];
      std::memcpy(b, &v[k], 8);
      for (int i = 0; i < 8; ++i) out[start + 8 * k + i] = b[7 - i];
    }
  }
}

void read_doubles_le(const std::string& in, std::size_t offset,
                     std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(v.data(), in.data() + offset, v.size() * 8);
  } else {
    for (std::size_t k = 0; k < v.size(); ++k) {
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[7 - i] = in[offset + 8 * k + i];
      std::memcpy(&v[k], b, 8);
    }
  }
}

void append_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void format_g17(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

}  // namespace

void write_field(const LDField& field, const std::filesystem::path& path) {
  const std::string header = header_json(field).dump();
  std::string blob;
  blob.reserve(8 + header.size() + field.node_count() * (3 * 8 + 2));
  blob.append(kMagic, 4);
  append_u32_le(blob, static_cast<std::uint32_t>(header.size()));
  blob += header;
  append_doubles_le(blob, field.forward);
  append_doubles_le(blob, field.backward);
  append_doubles_le(blob, field.total);
  blob.append(reinterpret_cast<const char*>(field.escape_mask.data()),
              field.escape_mask.size());
  blob.append(reinterpret_cast<const char*>(field.valid_mask.data()),
              field.valid_mask.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + path.string() + "' for write");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw FieldIoError("write failed for '" + path.string() + "'");
}

LDField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FieldIoError("cannot open '" + path.string() + "'");
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  if (blob.size() < 8) throw TruncatedFileError("file shorter than preamble");
  if (std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw MagicMismatchError("bad magic: not a field file");
  }
  const std::uint32_t header_len =
      static_cast<std::uint8_t>(blob[4]) |
      (static_cast<std::uint8_t>(blob[5]) << 8) |
      (static_cast<std::uint8_t>(blob[6]) << 16) |
      (static_cast<std::uint8_t>(blob[7]) << 24);
  if (blob.size() < 8 + static_cast<std::size_t>(header_len)) {
    throw TruncatedFileError("header extends past end of file");
  }

  json j;
  try {
    j = json::parse(blob.substr(8, header_len));
  } catch (const json::exception& e) {
    throw FieldIoError(std::string("malformed header: ") + e.what());
  }
  const int version = j.at("format_version").get<int>();
  if (version != kFieldFormatVersion) {
    throw VersionMismatchError("unsupported format version " +
                               std::to_string(version));
  }

  LDField field;
  try {
    header_from_json(j, field);
  } catch (const json::exception& e) {
    throw FieldIoError(std::string("malformed header: ") + e.what());
  }

  const std::size_t count = field.node_count();
  const std::size_t payload = count * (3 * 8 + 2);
  if (blob.size() < 8 + header_len + payload) {
    throw TruncatedFileError("payload shorter than declared grid");
  }
  if (blob.size() > 8 + header_len + payload) {
    throw FieldIoError("trailing bytes after payload");
  }

  std::size_t off = 8 + header_len;
  field.forward.resize(count);
  field.backward.resize(count);
  field.total.resize(count);
  read_doubles_le(blob, off, field.forward);
  off += count * 8;
  read_doubles_le(blob, off, field.backward);
  off += count * 8;
  read_doubles_le(blob, off, field.total);
  off += count * 8;
  field.escape_mask.assign(blob.begin() + off, blob.begin() + off + count);
  off += count;
  field.valid_mask.assign(blob.begin() + off, blob.begin() + off + count);
  return field;
}

void export_field_csv(const LDField& field,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + path.string() + "' for write");
  out << "i,j," << field.grid.axis_names[0] << ',' << field.grid.axis_names[1]
      << ",forward,backward,total,escaped,valid\n";
  char buf[5][40];
  for (int i = 0; i < field.n0(); ++i) {
    for (int j = 0; j < field.n1(); ++j) {
      const std::size_t k = field.index(i, j);
      format_g17(buf[0], sizeof buf[0], field.grid.coord0(i));
      format_g17(buf[1], sizeof buf[1], field.grid.coord1(j));
      format_g17(buf[2], sizeof buf[2], field.forward[k]);
      format_g17(buf[3], sizeof buf[3], field.backward[k]);
      format_g17(buf[4], sizeof buf[4], field.total[k]);
      out << i << ',' << j << ',' << buf[0] << ',' << buf[1] << ',' << buf[2]
          << ',' << buf[3] << ',' << buf[4] << ','
          << int(field.escape_mask[k]) << ',' << int(field.valid_mask[k])
          << '\n';
    }
  }
  if (!out) throw FieldIoError("write failed for '" + path.string() + "'");
}

void export_ridges_csv(const RidgeSet& ridges,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + path.string() + "' for write");
  out << "x,y,operator_value\n";
  char buf[3][40];
  for (const auto& pt : ridges.points) {
    format_g17(buf[0], sizeof buf[0], pt.x);
    format_g17(buf[1], sizeof buf[1], pt.y);
    format_g17(buf[2], sizeof buf[2], pt.value);
    out << buf[0] << ',' << buf[1] << ',' << buf[2] << '\n';
  }
  if (!out) throw FieldIoError("write failed for '" + path.string() + "'");
}

// --- PNG rendering ---

namespace {

const std::uint8_t kViridis[32][3] = {
    {68, 1, 84},    {71, 13, 96},   {72, 24, 106},  {72, 35, 116},
    {71, 46, 124},  {69, 56, 130},  {66, 65, 134},  {62, 74, 137},
    {58, 84, 140},  {54, 93, 141},  {50, 101, 142}, {46, 109, 142},
    {43, 117, 142}, {40, 125, 142}, {37, 132, 142}, {34, 140, 141},
    {31, 148, 140}, {30, 156, 137}, {32, 163, 134}, {37, 171, 130},
    {46, 179, 124}, {58, 186, 118}, {72, 193, 110}, {88, 199, 101},
    {108, 205, 90}, {127, 211, 78}, {147, 215, 65}, {168, 219, 52},
    {192, 223, 37}, {213, 226, 26}, {234, 229, 26}, {253, 231, 37}};

std::array<std::uint8_t, 3> colormap_rgb(const std::string& name, double v) {
  v = std::clamp(v, 0.0, 1.0);
  if (name == "gray" || name == "grey") {
    const auto g = static_cast<std::uint8_t>(std::lround(v * 255.0));
    return {g, g, g};
  }
  const double t = v * 31.0;
  const int lo = std::min(30, static_cast<int>(t));
  const double f = t - lo;
  std::array<std::uint8_t, 3> rgb;
  for (int c = 0; c < 3; ++c) {
    const double mixed = kViridis[lo][c] + f * (kViridis[lo + 1][c] - kViridis[lo][c]);
    rgb[c] = static_cast<std::uint8_t>(std::lround(mixed));
  }
  return rgb;
}

void append_be32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void append_chunk(std::string& out, const char type[4],
                  const std::string& data) {
  append_be32(out, static_cast<std::uint32_t>(data.size()));
  out.append(type, 4);
  out += data;
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
              static_cast<uInt>(data.size()));
  append_be32(out, static_cast<std::uint32_t>(crc));
}

std::string encode_png(const std::vector<std::uint8_t>& rgb, int width,
                       int height) {
  std::string raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
  for (int r = 0; r < height; ++r) {
    raw.push_back('\0');  // filter type 0
    raw.append(
        reinterpret_cast<const char*>(rgb.data() + std::size_t(r) * 3 * width),
        3 * static_cast<std::size_t>(width));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw FieldIoError("png compression failed");
  }
  compressed.resize(bound);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  append_be32(ihdr, static_cast<std::uint32_t>(width));
  append_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  append_chunk(png, "IHDR", ihdr);
  append_chunk(png, "IDAT", compressed);
  append_chunk(png, "IEND", "");
  return png;
}

void draw_pixel(std::vector<std::uint8_t>& rgb, int width, int height, int px,
                int py, const std::array<std::uint8_t, 3>& color) {
  if (px < 0 || px >= width || py < 0 || py >= height) return;
  const std::size_t k = (std::size_t(py) * width + px) * 3;
  rgb[k] = color[0];
  rgb[k + 1] = color[1];
  rgb[k + 2] = color[2];
}

void draw_line(std::vector<std::uint8_t>& rgb, int width, int height, int x0,
               int y0, int x1, int y1,
               const std::array<std::uint8_t, 3>& color) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    draw_pixel(rgb, width, height, x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void render_png(const LDField& field, const RenderConfig& cfg,
                const std::filesystem::path& path) {
  const int n0 = field.n0(), n1 = field.n1();

  std::vector<double> values;
  if (cfg.layer == "gradient") {
    values = gradient_norm(field.total, n0, n1, field.grid.spacing0(),
                           field.grid.spacing1());
  } else if (cfg.layer == "laplacian") {
    values = laplacian(field.total, n0, n1, field.grid.spacing0(),
                       field.grid.spacing1());
    for (double& v : values) v = std::abs(v);
  } else {
    values = field.layer(layer_kind_from_string(cfg.layer));
  }
  if (cfg.colormap != "viridis" && cfg.colormap != "gray" &&
      cfg.colormap != "grey") {
    throw ConfigError("unknown colormap: '" + cfg.colormap + "'");
  }

  const int width = cfg.width == 0 ? n0 : cfg.width;
  const int height = cfg.height == 0 ? n1 : cfg.height;
  if (width < n0 || height < n1 || width % n0 != 0 || height % n1 != 0) {
    throw ConfigError(
        "image size must be an integer upscale of the grid resolution");
  }
  const int sx = width / n0, sy = height / n1;

  // display-only minmax over valid nodes
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!field.valid_mask[k]) continue;
    lo = std::min(lo, values[k]);
    hi = std::max(hi, values[k]);
  }
  const bool constant = !(hi > lo);
  if (constant) {
    std::cerr << "render_png: constant layer, image is uniform\n";
  }

  std::vector<std::uint8_t> rgb(std::size_t(width) * height * 3);
  for (int r = 0; r < height; ++r) {
    const int j = n1 - 1 - r / sy;
    for (int c = 0; c < width; ++c) {
      const int i = c / sx;
      const std::size_t k = field.index(i, j);
      std::array<std::uint8_t, 3> color{128, 128, 128};
      if (field.valid_mask[k]) {
        const double v = constant ? 0.0 : (values[k] - lo) / (hi - lo);
        color = colormap_rgb(cfg.colormap, v);
      }
      const std::size_t off = (std::size_t(r) * width + c) * 3;
      rgb[off] = color[0];
      rgb[off + 1] = color[1];
      rgb[off + 2] = color[2];
    }
  }

  const auto& ranges = field.grid.ranges;
  auto to_px = [&](double x) {
    return static_cast<int>(std::lround((x - ranges[0][0]) /
                                        (ranges[0][1] - ranges[0][0]) *
                                        (width - 1)));
  };
  auto to_py = [&](double y) {
    return height - 1 -
           static_cast<int>(std::lround((y - ranges[1][0]) /
                                        (ranges[1][1] - ranges[1][0]) *
                                        (height - 1)));
  };

  for (const auto& overlay : cfg.overlays) {
    for (std::size_t k = 1; k < overlay.curve.size(); ++k) {
      draw_line(rgb, width, height, to_px(overlay.curve[k - 1][0]),
                to_py(overlay.curve[k - 1][1]), to_px(overlay.curve[k][0]),
                to_py(overlay.curve[k][1]), overlay.color);
    }
    const int r = overlay.marker_radius >= 0 ? overlay.marker_radius
                                             : std::max(2, (sx + sy) / 2);
    for (const auto& m : overlay.markers) {
      const int cx = to_px(m[0]), cy = to_py(m[1]);
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy <= r * r) {
            draw_pixel(rgb, width, height, cx + dx, cy + dy, overlay.color);
          }
        }
      }
    }
  }

  const std::string png = encode_png(rgb, width, height);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FieldIoError("cannot open '" + path.string() + "' for write");
  out.write(png.data(), static_cast<std::streamsize>(png.size()));
  if (!out) throw FieldIoError("write failed for '" + path.string() + "'");
}

}  // namespace ld
