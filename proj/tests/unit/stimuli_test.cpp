#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "vizsim/error.hpp"
#include "vizsim/stimuli.hpp"

using namespace vizsim;
using namespace vizsim::stimuli;
namespace fs = std::filesystem;

namespace {

const PaletteData& data() {
  static const PaletteData d = read_palette_data(default_palette_file());
  return d;
}

// Sum of (1 - value) over the first channel: ink area for a black mark on white.
double ink(const ImageStimulus& img) {
  double s = 0;
  for (std::size_t i = 0; i < img.width * img.height; ++i) s += 1.0 - img.pixels[i * 3];
  return s;
}

// Inked bounding box as distances from the center: {left, right, up, down}.
std::array<double, 4> ink_reach(const ImageStimulus& img) {
  const double c = img.width / 2.0;
  std::array<double, 4> r{0, 0, 0, 0};
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      if (img.at(y, x, 0) > 0.5f) continue;
      r[0] = std::max(r[0], c - x);
      r[1] = std::max(r[1], x + 1 - c);
      r[2] = std::max(r[2], c - y);
      r[3] = std::max(r[3], y + 1 - c);
    }
  return r;
}

double mean_abs_diff(const ImageStimulus& a, const ImageStimulus& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return s / static_cast<double>(a.pixels.size());
}

ImageStimulus flip_rows(const ImageStimulus& img) {
  ImageStimulus out = img;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(img.height - 1 - y, x, c);
  return out;
}

ImageStimulus transpose(const ImageStimulus& img) {
  ImageStimulus out = img;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(x, y, c);
  return out;
}

ImageStimulus glyph(Glyph g, double rotation = 0.0, std::size_t canvas = 96) {
  return render_glyph({g, canvas * 0.3, {0, 0, 0}, rotation}, canvas);
}

}  // namespace

TEST(Palettes, Counts) {
  EXPECT_EQ(palette_spec(Channel::color, data()).values.size(), 10u);
  EXPECT_EQ(palette_spec(Channel::shape, data()).values.size(), 10u);
  EXPECT_EQ(palette_spec(Channel::size, data()).values.size(), 10u);
  EXPECT_EQ(palette_spec(Channel::size_color, data()).values.size(), 16u);
  for (auto ch : {Channel::color, Channel::shape, Channel::size, Channel::size_color}) {
    EXPECT_FALSE(palette_spec(ch, data()).provenance.empty());
    EXPECT_EQ(parse_channel(channel_name(ch)), ch);
  }
}

TEST(Palettes, ColorPixelsAreExactlyBackgroundOrPaletteColor) {
  const auto spec = palette_spec(Channel::color, data());
  const auto images = gen_palette(spec);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Rgb8 c = spec.values[i].mark.color;
    std::size_t filled = 0;
    for (std::size_t p = 0; p < images[i].width * images[i].height; ++p) {
      const float r = images[i].pixels[p * 3], g = images[i].pixels[p * 3 + 1], b = images[i].pixels[p * 3 + 2];
      const bool bg = r == 1.0f && g == 1.0f && b == 1.0f;
      const bool fg = r == c.r / 255.0f && g == c.g / 255.0f && b == c.b / 255.0f;
      ASSERT_TRUE(bg || fg) << images[i].id << " pixel " << p;
      filled += fg;
    }
    EXPECT_EQ(filled, 96u * 96u) << images[i].id;
  }
}

TEST(Palettes, SizeAreaLinearInIndex) {
  const auto spec = palette_spec(Channel::size, data());
  const auto images = gen_palette(spec);
  const double rmax = spec.canvas * (1.0 - 2.0 * data().size_margin_fraction) / 2.0;
  double prev = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const double area = ink(images[i]);
    const double expected = std::numbers::pi * rmax * rmax * static_cast<double>(i + 1) / 10.0;
    EXPECT_NEAR(area / expected, 1.0, 0.01) << i;
    EXPECT_GT(area, prev);
    prev = area;
  }
  EXPECT_NEAR(spec.values.back().mark.radius, rmax, 1e-12);
}

TEST(Palettes, SizeColorIsSizeMajor) {
  const auto spec = palette_spec(Channel::size_color, data());
  const auto radii = size_radii(data(), spec.canvas);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(spec.values[i].mark.radius, radii[data().size_color_indices[i / 4] - 1]);
    EXPECT_EQ(spec.values[i].mark.color, data().size_color_colors[i % 4]);
  }
}

TEST(Palettes, ShapesAreDistinct) {
  const auto images = gen_palette(palette_spec(Channel::shape, data()));
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) EXPECT_GT(mean_abs_diff(images[i], images[j]), 0.005);
}

TEST(Glyphs, RotationRelationships) {
  const double tol = 1.0 / 255.0;
  EXPECT_LE(mean_abs_diff(glyph(Glyph::plus, 45), glyph(Glyph::cross)), tol);
  EXPECT_LE(mean_abs_diff(glyph(Glyph::square, 45), glyph(Glyph::diamond)), tol);
  EXPECT_LE(mean_abs_diff(flip_rows(glyph(Glyph::triangle_up)), glyph(Glyph::triangle_down)), tol);
  EXPECT_LE(mean_abs_diff(transpose(glyph(Glyph::triangle_up)), glyph(Glyph::triangle_left)), tol);
  EXPECT_LE(mean_abs_diff(glyph(Glyph::circle, 33), glyph(Glyph::circle)), tol);
  EXPECT_LE(mean_abs_diff(glyph(Glyph::square, 90), glyph(Glyph::square)), tol);
  EXPECT_LE(mean_abs_diff(glyph(Glyph::star, 72), glyph(Glyph::star)), tol);
}

TEST(Glyphs, OrientationIsClockwiseInImageCoordinates) {
  // The apex reaches the circumradius; the opposite edge only half of it.
  const double r = 96 * 0.3;
  const auto up = ink_reach(glyph(Glyph::triangle_up));
  EXPECT_NEAR(up[2], r, 1.0);
  EXPECT_NEAR(up[3], r / 2, 1.0);
  const auto right = ink_reach(glyph(Glyph::triangle_right));
  EXPECT_NEAR(right[1], r, 1.0);
  EXPECT_NEAR(right[0], r / 2, 1.0);
  const auto down = ink_reach(glyph(Glyph::triangle_down));
  EXPECT_NEAR(down[3], r, 1.0);
  EXPECT_NEAR(down[2], r / 2, 1.0);
  const auto left = ink_reach(glyph(Glyph::triangle_left));
  EXPECT_NEAR(left[0], r, 1.0);
  EXPECT_NEAR(left[1], r / 2, 1.0);
}

TEST(Glyphs, AreasMatchGeometry) {
  const double r = 96 * 0.3;
  EXPECT_NEAR(ink(glyph(Glyph::circle)) / (std::numbers::pi * r * r), 1.0, 0.01);
  EXPECT_NEAR(ink(glyph(Glyph::square)) / (2 * r * r), 1.0, 0.01);
  // Equilateral triangle inscribed in radius r.
  EXPECT_NEAR(ink(glyph(Glyph::triangle_up)) / (3 * std::sqrt(3.0) / 4 * r * r), 1.0, 0.01);
}

TEST(Glyphs, AntialiasedValuesAreEightBit) {
  const auto img = glyph(Glyph::star, 10);
  for (float v : img.pixels) EXPECT_FLOAT_EQ(v * 255.0f, std::round(v * 255.0f));
}

TEST(Glyphs, Names) {
  for (int g = 0; g < 10; ++g) EXPECT_EQ(parse_glyph(glyph_name(static_cast<Glyph>(g))), static_cast<Glyph>(g));
  EXPECT_THROW(parse_glyph("hexagon"), ValidationError);
  EXPECT_THROW(parse_channel("texture"), ValidationError);
}

TEST(HexColor, RoundTrip) {
  EXPECT_EQ(parse_hex_color("#1F77b4"), (Rgb8{0x1f, 0x77, 0xb4}));
  EXPECT_EQ(hex_color({0x1f, 0x77, 0xb4}), "#1f77b4");
  EXPECT_THROW(parse_hex_color("1f77b4"), ValidationError);
  EXPECT_THROW(parse_hex_color("#1f77bz"), ValidationError);
}

TEST(Palettes, Deterministic) {
  const auto spec = palette_spec(Channel::shape, data());
  const auto a = gen_palette(spec), b = gen_palette(spec);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(encode_png(a[i]), encode_png(b[i]));
}

TEST(Palettes, WrittenFilesDecodeToRenderedImages) {
  const auto dir = fs::temp_directory_path() / "vizsim_stimuli_test";
  fs::remove_all(dir);
  const auto spec = palette_spec(Channel::size_color, data());
  const auto paths = write_palette(spec, dir);
  const auto images = gen_palette(spec);
  ASSERT_EQ(paths.size(), 16u);
  EXPECT_EQ(paths[0], dir / "size-color" / "01.png");
  EXPECT_EQ(images[15].id, "size-color/16");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto back = load_image(paths[i]);
    ASSERT_EQ(back.pixels.size(), images[i].pixels.size());
    for (std::size_t p = 0; p < back.pixels.size(); ++p) ASSERT_EQ(back.pixels[p], images[i].pixels[p]);
  }
  std::ifstream in(dir / "size-color" / "palette.json");
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["values"].size(), 16u);
  EXPECT_EQ(manifest["channel"], "size-color");
  fs::remove_all(dir);
}

TEST(Palettes, ValidationRejectsBadSpecs) {
  auto spec = palette_spec(Channel::color, data());
  spec.values.pop_back();
  EXPECT_THROW(spec.validate(), ValidationError);
  spec = palette_spec(Channel::size, data());
  spec.values[9].mark.radius = 200;
  EXPECT_THROW(spec.validate(), ValidationError);
  spec = palette_spec(Channel::size, data());
  spec.canvas = 32;
  EXPECT_THROW(spec.validate(), ValidationError);
  EXPECT_THROW(parse_palette_data("{\"canvas\": 224}"), ValidationError);
}
