#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ld/io_render.hpp"

using namespace ld;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ldtest_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

LDField synthetic_field(int n0, int n1, std::mt19937& rng) {
  LDField f;
  f.grid.ranges = {{{-1.0, 2.0}, {0.5, 3.0}}};
  f.grid.resolution = {n0, n1};
  f.grid.axis_names = {"x", "y"};
  f.grid.t0 = 0.25;
  f.meta.system = make_system("duffing", {{"gamma", 0.5}, {"omega", 1.2}});
  f.meta.ld.p = 0.5;
  f.meta.ld.tau_f = 3.0;
  f.meta.ld.tau_b = 2.0;
  f.meta.ld.escape = EscapeRegion::ball(20.0);
  std::uniform_real_distribution<double> value(-1e6, 1e6);
  std::uniform_int_distribution<int> bit(0, 1);
  const std::size_t count = std::size_t(n0) * n1;
  f.forward.resize(count);
  f.backward.resize(count);
  f.total.resize(count);
  f.escape_mask.resize(count);
  f.valid_mask.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    f.forward[k] = value(rng);
    f.backward[k] = value(rng);
    f.total[k] = f.forward[k] + f.backward[k];
    f.escape_mask[k] = static_cast<std::uint8_t>(bit(rng));
    f.valid_mask[k] = static_cast<std::uint8_t>(bit(rng));
  }
  return f;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("field file round trip") {
  TempDir tmp;
  std::mt19937 rng(101);

  SUBCASE("tiny synthetic field") {
    const auto field = synthetic_field(2, 2, rng);
    const auto path = tmp.path / "tiny.ldf";
    write_field(field, path);
    const auto back = read_field(path);
    CHECK(bit_equal(back.forward, field.forward));
    CHECK(bit_equal(back.backward, field.backward));
    CHECK(bit_equal(back.total, field.total));
    CHECK(back.escape_mask == field.escape_mask);
    CHECK(back.valid_mask == field.valid_mask);
    CHECK(back.grid.axis_names == field.grid.axis_names);
    CHECK(back.grid.t0 == field.grid.t0);
    CHECK(back.meta.system.params == field.meta.system.params);
    CHECK(back.meta.ld.tau_f == field.meta.ld.tau_f);
    CHECK(back.meta.ld.escape.radius == field.meta.ld.escape.radius);
    CHECK(back.meta.engine_version == field.meta.engine_version);
  }

  SUBCASE("mask-all-true preserved") {
    auto field = synthetic_field(3, 2, rng);
    std::fill(field.escape_mask.begin(), field.escape_mask.end(), 1);
    const auto path = tmp.path / "mask.ldf";
    write_field(field, path);
    CHECK(read_field(path).escape_mask == field.escape_mask);
  }

  SUBCASE("randomized corpus of 100 fields") {
    std::uniform_int_distribution<int> dim(2, 9);
    for (int trial = 0; trial < 100; ++trial) {
      const auto field = synthetic_field(dim(rng), dim(rng), rng);
      const auto path = tmp.path / "corpus.ldf";
      write_field(field, path);
      const auto back = read_field(path);
      REQUIRE(bit_equal(back.forward, field.forward));
      REQUIRE(bit_equal(back.backward, field.backward));
      REQUIRE(bit_equal(back.total, field.total));
      REQUIRE(back.escape_mask == field.escape_mask);
      REQUIRE(back.valid_mask == field.valid_mask);
    }
  }

  SUBCASE("section metadata survives") {
    auto field = synthetic_field(2, 3, rng);
    field.meta.section = SectionInfo{"sigma3", -0.4, 0.05};
    const auto path = tmp.path / "section.ldf";
    write_field(field, path);
    const auto back = read_field(path);
    REQUIRE(back.meta.section);
    CHECK(back.meta.section->id == "sigma3");
    CHECK(back.meta.section->x_value == -0.4);
    CHECK(back.meta.section->h0 == 0.05);
  }
}

TEST_CASE("field file error paths") {
  TempDir tmp;
  std::mt19937 rng(55);
  const auto field = synthetic_field(3, 3, rng);
  const auto path = tmp.path / "field.ldf";
  write_field(field, path);

  SUBCASE("corrupted magic") {
    auto blob = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    }();
    blob[0] = 'X';
    const auto bad = tmp.path / "bad_magic.ldf";
    std::ofstream(bad, std::ios::binary) << blob;
    CHECK_THROWS_AS(read_field(bad), MagicMismatchError);
  }
  SUBCASE("truncated payload") {
    auto blob = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    }();
    blob.resize(blob.size() - 7);
    const auto bad = tmp.path / "short.ldf";
    std::ofstream(bad, std::ios::binary) << blob;
    CHECK_THROWS_AS(read_field(bad), TruncatedFileError);
  }
  SUBCASE("version mismatch") {
    auto blob = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    }();
    const auto pos = blob.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    blob[pos + std::string("\"format_version\":").size()] = '9';
    const auto bad = tmp.path / "version.ldf";
    std::ofstream(bad, std::ios::binary) << blob;
    CHECK_THROWS_AS(read_field(bad), VersionMismatchError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_field(tmp.path / "nope.ldf"), FieldIoError);
  }
}

TEST_CASE("csv export") {
  TempDir tmp;
  std::mt19937 rng(77);

  SUBCASE("2x2 field gives header plus four rows") {
    const auto field = synthetic_field(2, 2, rng);
    const auto path = tmp.path / "field.csv";
    export_field_csv(field, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line ==
          "i,j,x,y,forward,backward,total,escaped,valid");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
  }

  SUBCASE("empty ridge set gives a header-only file") {
    RidgeSet empty;
    const auto path = tmp.path / "ridges.csv";
    export_ridges_csv(empty, path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "x,y,operator_value");
    CHECK_FALSE(std::getline(in, line));
  }

  SUBCASE("17 significant digits reparse bitwise") {
    const auto field = synthetic_field(4, 3, rng);
    const auto path = tmp.path / "precise.csv";
    export_field_csv(field, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      int i, j;
      double x, y, fwd, bwd, tot;
      int esc, valid;
      REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf,%lf,%d,%d", &i,
                          &j, &x, &y, &fwd, &bwd, &tot, &esc, &valid) == 9);
      const std::size_t k = field.index(i, j);
      CHECK(fwd == field.forward[k]);
      CHECK(bwd == field.backward[k]);
      CHECK(tot == field.total[k]);
    }
  }
}

TEST_CASE("png rendering") {
  TempDir tmp;
  std::mt19937 rng(88);
  const auto field = synthetic_field(8, 6, rng);

  SUBCASE("writes a valid png and is deterministic") {
    const auto a = tmp.path / "a.png";
    const auto b = tmp.path / "b.png";
    RenderConfig rc;
    rc.width = 16;
    rc.height = 12;
    Overlay overlay;
    overlay.curve = {{-0.5, 1.0}, {1.5, 2.5}};
    overlay.markers = {{0.0, 2.0}};
    rc.overlays.push_back(overlay);
    render_png(field, rc, a);
    render_png(field, rc, b);

    auto read_all = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    };
    const auto bytes_a = read_all(a);
    CHECK(bytes_a == read_all(b));
    REQUIRE(bytes_a.size() > 8);
    CHECK(static_cast<unsigned char>(bytes_a[0]) == 0x89);
    CHECK(bytes_a.substr(1, 3) == "PNG");
    // IHDR dimensions (big-endian)
    const auto be32 = [&](std::size_t off) {
      return (static_cast<unsigned char>(bytes_a[off]) << 24) |
             (static_cast<unsigned char>(bytes_a[off + 1]) << 16) |
             (static_cast<unsigned char>(bytes_a[off + 2]) << 8) |
             static_cast<unsigned char>(bytes_a[off + 3]);
    };
    CHECK(be32(16) == 16);  // width
    CHECK(be32(20) == 12);  // height
  }

  SUBCASE("size below the grid resolution is rejected") {
    RenderConfig rc;
    rc.width = 1;
    rc.height = 1;
    CHECK_THROWS_AS(render_png(field, rc, tmp.path / "x.png"), ConfigError);
  }
  SUBCASE("non-integer upscale is rejected") {
    RenderConfig rc;
    rc.width = 12;  // 1.5x of 8
    rc.height = 12;
    CHECK_THROWS_AS(render_png(field, rc, tmp.path / "x.png"), ConfigError);
  }
  SUBCASE("unknown layer or colormap is rejected") {
    RenderConfig rc;
    rc.layer = "weird";
    CHECK_THROWS_AS(render_png(field, rc, tmp.path / "x.png"), ConfigError);
    rc.layer = "total";
    rc.colormap = "jet";
    CHECK_THROWS_AS(render_png(field, rc, tmp.path / "x.png"), ConfigError);
  }
  SUBCASE("gradient and laplacian layers render") {
    RenderConfig rc;
    rc.layer = "gradient";
    render_png(field, rc, tmp.path / "g.png");
    rc.layer = "laplacian";
    render_png(field, rc, tmp.path / "l.png");
    CHECK(fs::file_size(tmp.path / "g.png") > 0);
    CHECK(fs::file_size(tmp.path / "l.png") > 0);
  }
}
