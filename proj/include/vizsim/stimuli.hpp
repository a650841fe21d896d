#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vizsim/preprocess.hpp"

namespace vizsim::stimuli {

enum class Channel { color, shape, size, size_color };

std::string_view channel_name(Channel channel);
Channel parse_channel(std::string_view name);

enum class Glyph {
  triangle_right,
  star,
  circle,
  square,
  plus,
  cross,
  diamond,
  triangle_up,
  triangle_left,
  triangle_down,
};

std::string_view glyph_name(Glyph glyph);
Glyph parse_glyph(std::string_view name);

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb8&) const = default;
};

/// "#rrggbb" (case-insensitive).
Rgb8 parse_hex_color(std::string_view hex);
std::string hex_color(Rgb8 color);

/// One filled mark. `radius` is the circumradius in pixels; `rotation_deg`
/// turns the base path clockwise about the canvas center.
struct Mark {
  Glyph glyph = Glyph::circle;
  double radius = 0.0;
  Rgb8 color;
  double rotation_deg = 0.0;
  bool antialias = true;
};

struct PaletteValue {
  std::string label;
  Mark mark;
};

struct PaletteSpec {
  Channel channel = Channel::color;
  std::vector<PaletteValue> values;
  std::size_t canvas = 224;
  Rgb8 background{255, 255, 255};
  std::string provenance;

  /// 10 values (16 for size-color), canvas >= 64, every mark inside the canvas.
  void validate() const;
};

/// Contents of the palette data file.
struct PaletteData {
  std::size_t canvas = 224;
  Rgb8 background{255, 255, 255};
  Rgb8 mark_color{0, 0, 0};
  double glyph_diameter_fraction = 0.6;
  double size_margin_fraction = 0.1;
  std::vector<Rgb8> colors;
  std::string color_source;
  std::vector<Glyph> shapes;
  std::string shape_source;
  std::size_t size_count = 10;
  std::string size_source;
  std::vector<std::size_t> size_color_indices;  // 1-based into the size palette
  std::vector<Rgb8> size_color_colors;
  std::string size_color_source;
};

PaletteData parse_palette_data(const std::string& json_text, const std::string& source = "<json>");
PaletteData read_palette_data(const std::filesystem::path& path);

/// VIZSIM_DATA_DIR/palettes.json when set, otherwise the installed data file.
std::filesystem::path default_palette_file();

/// Radii of the size palette: area linear in index, largest leaves the margin.
std::vector<double> size_radii(const PaletteData& data, std::size_t canvas);

PaletteSpec palette_spec(Channel channel, const PaletteData& data);

/// Supersampled coverage (8x8 per pixel) unless the mark disables antialiasing,
/// in which case a pixel is filled when its center is inside.
ImageStimulus render_glyph(const Mark& mark, std::size_t canvas, Rgb8 background = {255, 255, 255});

/// Rendered stimuli with ids "<channel>/NN" (1-based, zero-padded), quantized
/// to 8 bits so they match their PNG encoding exactly.
std::vector<ImageStimulus> gen_palette(const PaletteSpec& spec);

/// Writes <outdir>/<channel>/NN.png and <outdir>/<channel>/palette.json.
/// Returns the written PNG paths.
std::vector<std::filesystem::path> write_palette(const PaletteSpec& spec, const std::filesystem::path& outdir);

}  // namespace vizsim::stimuli
