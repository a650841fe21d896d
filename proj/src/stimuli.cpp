#include "vizsim/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vizsim/distance_matrix.hpp"
#include "vizsim/error.hpp"

#ifndef VIZSIM_DATA_DIR_DEFAULT
#define VIZSIM_DATA_DIR_DEFAULT "data"
#endif

namespace vizsim::stimuli {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Channel, std::string_view>, 4> kChannels{{
    {Channel::color, "color"},
    {Channel::shape, "shape"},
    {Channel::size, "size"},
    {Channel::size_color, "size-color"},
}};

constexpr std::array<std::pair<Glyph, std::string_view>, 10> kGlyphs{{
    {Glyph::triangle_right, "triangle-right"},
    {Glyph::star, "star"},
    {Glyph::circle, "circle"},
    {Glyph::square, "square"},
    {Glyph::plus, "plus"},
    {Glyph::cross, "cross"},
    {Glyph::diamond, "diamond"},
    {Glyph::triangle_up, "triangle-up"},
    {Glyph::triangle_left, "triangle-left"},
    {Glyph::triangle_down, "triangle-down"},
}};

constexpr std::size_t kSupersample = 8;
constexpr double kPlusHalfWidth = 0.3;
constexpr double kStarInner = 0.381966011250105;

struct Point {
  double x;
  double y;
};

bool inside_polygon(const std::vector<Point>& poly, Point p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

// Vertices on the unit circle, first one pointing up (image y grows down).
std::vector<Point> star_path() {
  std::vector<Point> pts;
  for (int k = 0; k < 10; ++k) {
    const double r = k % 2 == 0 ? 1.0 : kStarInner;
    const double a = k * std::numbers::pi / 5.0;
    pts.push_back({r * std::sin(a), -r * std::cos(a)});
  }
  return pts;
}

std::vector<Point> triangle_path() {
  std::vector<Point> pts;
  for (int k = 0; k < 3; ++k) {
    const double a = k * 2.0 * std::numbers::pi / 3.0;
    pts.push_back({std::sin(a), -std::cos(a)});
  }
  return pts;
}

// Every glyph is a base path plus a clockwise rotation.
struct BaseGlyph {
  Glyph base;
  double rotation_deg;
};

BaseGlyph base_of(Glyph g) {
  switch (g) {
    case Glyph::cross: return {Glyph::plus, 45.0};
    case Glyph::diamond: return {Glyph::square, 45.0};
    case Glyph::triangle_right: return {Glyph::triangle_up, 90.0};
    case Glyph::triangle_down: return {Glyph::triangle_up, 180.0};
    case Glyph::triangle_left: return {Glyph::triangle_up, 270.0};
    default: return {g, 0.0};
  }
}

bool inside_base(Glyph base, Point p) {
  static const std::vector<Point> star = star_path();
  static const std::vector<Point> triangle = triangle_path();
  switch (base) {
    case Glyph::circle: return p.x * p.x + p.y * p.y <= 1.0;
    case Glyph::square: {
      const double h = std::numbers::sqrt2 / 2.0;
      return std::abs(p.x) <= h && std::abs(p.y) <= h;
    }
    case Glyph::plus: {
      const double arm = std::sqrt(1.0 - kPlusHalfWidth * kPlusHalfWidth);
      const double ax = std::abs(p.x), ay = std::abs(p.y);
      return (ax <= kPlusHalfWidth && ay <= arm) || (ay <= kPlusHalfWidth && ax <= arm);
    }
    case Glyph::star: return inside_polygon(star, p);
    case Glyph::triangle_up: return inside_polygon(triangle, p);
    default: return false;
  }
}

std::uint8_t blend(std::uint8_t bg, std::uint8_t fg, double coverage) {
  const double v = bg + (static_cast<double>(fg) - bg) * coverage;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string get_source(const json& obj) { return obj.contains("source") ? obj.at("source").get<std::string>() : ""; }

}  // namespace

std::string_view channel_name(Channel channel) {
  for (const auto& [c, name] : kChannels) {
    if (c == channel) return name;
  }
  return "color";
}

Channel parse_channel(std::string_view name) {
  for (const auto& [c, n] : kChannels) {
    if (n == name) return c;
  }
  throw ValidationError(fmt::format("unknown channel '{}' (color|shape|size|size-color)", name));
}

std::string_view glyph_name(Glyph glyph) {
  for (const auto& [g, name] : kGlyphs) {
    if (g == glyph) return name;
  }
  return "circle";
}

Glyph parse_glyph(std::string_view name) {
  for (const auto& [g, n] : kGlyphs) {
    if (n == name) return g;
  }
  throw ValidationError(fmt::format("unknown glyph '{}'", name));
}

Rgb8 parse_hex_color(std::string_view hex) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ValidationError(fmt::format("invalid hex color '{}'", hex));
  };
  if (hex.size() != 7 || hex[0] != '#') throw ValidationError(fmt::format("invalid hex color '{}'", hex));
  auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])); };
  return {byte(1), byte(3), byte(5)};
}

std::string hex_color(Rgb8 c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

void PaletteSpec::validate() const {
  const std::size_t expected = channel == Channel::size_color ? 16 : 10;
  if (values.size() != expected) {
    throw ValidationError(
        fmt::format("{} palette needs {} values, got {}", channel_name(channel), expected, values.size()));
  }
  if (canvas < 64) throw ValidationError(fmt::format("canvas {} is smaller than 64", canvas));
  for (const auto& v : values) {
    if (!(v.mark.radius > 0.0) || v.mark.radius > static_cast<double>(canvas) / 2.0) {
      throw ValidationError(fmt::format("mark '{}' with radius {} does not fit a {}px canvas", v.label,
                                        v.mark.radius, canvas));
    }
  }
}

PaletteData parse_palette_data(const std::string& json_text, const std::string& source) {
  PaletteData d;
  try {
    const json doc = json::parse(json_text);
    d.canvas = doc.at("canvas").get<std::size_t>();
    d.background = parse_hex_color(doc.at("background").get<std::string>());
    d.mark_color = parse_hex_color(doc.at("mark_color").get<std::string>());
    d.glyph_diameter_fraction = doc.at("glyph_diameter_fraction").get<double>();
    d.size_margin_fraction = doc.at("size_margin_fraction").get<double>();
    const auto& color = doc.at("color");
    for (const auto& c : color.at("values")) d.colors.push_back(parse_hex_color(c.get<std::string>()));
    d.color_source = get_source(color);
    const auto& shape = doc.at("shape");
    for (const auto& g : shape.at("values")) d.shapes.push_back(parse_glyph(g.get<std::string>()));
    d.shape_source = get_source(shape);
    const auto& size = doc.at("size");
    d.size_count = size.at("count").get<std::size_t>();
    d.size_source = get_source(size);
    const auto& sc = doc.at("size-color");
    d.size_color_indices = sc.at("size_indices").get<std::vector<std::size_t>>();
    for (const auto& c : sc.at("colors")) d.size_color_colors.push_back(parse_hex_color(c.get<std::string>()));
    d.size_color_source = get_source(sc);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: invalid palette data: {}", source, e.what()));
  }
  if (d.glyph_diameter_fraction <= 0.0 || d.glyph_diameter_fraction > 1.0) {
    throw ValidationError(fmt::format("{}: glyph_diameter_fraction must be in (0, 1]", source));
  }
  if (d.size_margin_fraction < 0.0 || d.size_margin_fraction >= 0.5) {
    throw ValidationError(fmt::format("{}: size_margin_fraction must be in [0, 0.5)", source));
  }
  for (std::size_t i : d.size_color_indices) {
    if (i < 1 || i > d.size_count) throw ValidationError(fmt::format("{}: size index {} out of range", source, i));
  }
  return d;
}

PaletteData read_palette_data(const std::filesystem::path& path) {
  return parse_palette_data(read_text_file(path), path.string());
}

std::filesystem::path default_palette_file() {
  if (const char* dir = std::getenv("VIZSIM_DATA_DIR"); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / "palettes.json";
  }
  return std::filesystem::path(VIZSIM_DATA_DIR_DEFAULT) / "palettes.json";
}

std::vector<double> size_radii(const PaletteData& data, std::size_t canvas) {
  const double r_max = static_cast<double>(canvas) * (1.0 - 2.0 * data.size_margin_fraction) / 2.0;
  std::vector<double> radii;
  for (std::size_t i = 1; i <= data.size_count; ++i) {
    radii.push_back(r_max * std::sqrt(static_cast<double>(i) / static_cast<double>(data.size_count)));
  }
  return radii;
}

PaletteSpec palette_spec(Channel channel, const PaletteData& data) {
  PaletteSpec spec;
  spec.channel = channel;
  spec.canvas = data.canvas;
  spec.background = data.background;
  const double glyph_radius = static_cast<double>(data.canvas) * data.glyph_diameter_fraction / 2.0;
  switch (channel) {
    case Channel::color:
      spec.provenance = data.color_source;
      for (Rgb8 c : data.colors) spec.values.push_back({hex_color(c), {Glyph::square, glyph_radius, c, 0.0, false}});
      break;
    case Channel::shape:
      spec.provenance = data.shape_source;
      for (Glyph g : data.shapes) {
        spec.values.push_back({std::string(glyph_name(g)), {g, glyph_radius, data.mark_color}});
      }
      break;
    case Channel::size: {
      spec.provenance = data.size_source;
      const auto radii = size_radii(data, data.canvas);
      for (std::size_t i = 0; i < radii.size(); ++i) {
        spec.values.push_back({fmt::format("size-{}", i + 1), {Glyph::circle, radii[i], data.mark_color}});
      }
      break;
    }
    case Channel::size_color: {
      spec.provenance = data.size_color_source;
      const auto radii = size_radii(data, data.canvas);
      for (std::size_t idx : data.size_color_indices) {
        for (Rgb8 c : data.size_color_colors) {
          spec.values.push_back({fmt::format("size-{}/{}", idx, hex_color(c)), {Glyph::circle, radii[idx - 1], c}});
        }
      }
      break;
    }
  }
  spec.validate();
  return spec;
}

ImageStimulus render_glyph(const Mark& mark, std::size_t canvas, Rgb8 background) {
  const auto [base, base_rotation] = base_of(mark.glyph);
  const double theta = (base_rotation + mark.rotation_deg) * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const double center = static_cast<double>(canvas) / 2.0;
  const double inv_r = 1.0 / mark.radius;
  const std::size_t samples = mark.antialias ? kSupersample : 1;
  const double step = 1.0 / static_cast<double>(samples);

  // Inverse rotation of a canvas point into the base glyph's unit frame.
  auto covered = [&](double px, double py) {
    const double dx = (px - center) * inv_r, dy = (py - center) * inv_r;
    return inside_base(base, {c * dx + s * dy, -s * dx + c * dy});
  };

  ImageStimulus img;
  img.width = img.height = canvas;
  img.pixels.resize(canvas * canvas * 3);
  const std::array<std::uint8_t, 3> bg{background.r, background.g, background.b};
  const std::array<std::uint8_t, 3> fg{mark.color.r, mark.color.g, mark.color.b};
  for (std::size_t y = 0; y < canvas; ++y) {
    for (std::size_t x = 0; x < canvas; ++x) {
      std::size_t hits = 0;
      for (std::size_t sy = 0; sy < samples; ++sy) {
        for (std::size_t sx = 0; sx < samples; ++sx) {
          hits += covered(static_cast<double>(x) + (static_cast<double>(sx) + 0.5) * step,
                          static_cast<double>(y) + (static_cast<double>(sy) + 0.5) * step);
        }
      }
      const double coverage = static_cast<double>(hits) / static_cast<double>(samples * samples);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        img.at(y, x, ch) = static_cast<float>(blend(bg[ch], fg[ch], coverage)) / 255.0f;
      }
    }
  }
  return img;
}

std::vector<ImageStimulus> gen_palette(const PaletteSpec& spec) {
  spec.validate();
  std::vector<ImageStimulus> out;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    auto img = render_glyph(spec.values[i].mark, spec.canvas, spec.background);
    img.id = fmt::format("{}/{:02}", channel_name(spec.channel), i + 1);
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<std::filesystem::path> write_palette(const PaletteSpec& spec, const std::filesystem::path& outdir) {
  const auto images = gen_palette(spec);
  const auto dir = outdir / std::string(channel_name(spec.channel));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  json manifest;
  manifest["channel"] = channel_name(spec.channel);
  manifest["canvas"] = spec.canvas;
  manifest["background"] = hex_color(spec.background);
  manifest["provenance"] = spec.provenance;
  manifest["values"] = json::array();
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto file = fmt::format("{:02}.png", i + 1);
    write_png(images[i], dir / file);
    written.push_back(dir / file);
    const auto& v = spec.values[i];
    manifest["values"].push_back({{"index", i + 1},
                                  {"file", file},
                                  {"label", v.label},
                                  {"glyph", glyph_name(v.mark.glyph)},
                                  {"radius", v.mark.radius},
                                  {"color", hex_color(v.mark.color)},
                                  {"antialias", v.mark.antialias}});
  }
  write_text_file(dir / "palette.json", manifest.dump(2) + "\n");
  return written;
}

}  // namespace vizsim::stimuli
