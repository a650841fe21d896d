#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <jpeglib.h>
#include <png.h>

#include "vizsim/error.hpp"
#include "vizsim/preprocess.hpp"

namespace vizsim {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) { return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF; }

ImageStimulus decode_png(std::span<const std::uint8_t> bytes, std::string id) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw ValidationError(fmt::format("{}: undecodable PNG ({})", id, img.message));
  }
  img.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, rgba.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw ValidationError(fmt::format("{}: undecodable PNG ({})", id, msg));
  }

  ImageStimulus out;
  out.width = img.width;
  out.height = img.height;
  out.id = std::move(id);
  out.pixels.resize(out.width * out.height * 3);
  for (std::size_t i = 0; i < out.width * out.height; ++i) {
    const float alpha = rgba[i * 4 + 3] / 255.0f;
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = rgba[i * 4 + c] / 255.0f;
      out.pixels[i * 3 + c] = v * alpha + (1.0f - alpha);
    }
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Returns false with `err.message` set on failure. Kept free of objects with
// destructors so longjmp stays well-defined.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& rgb, std::size_t& width,
                     std::size_t& height, int& channels, JpegErrorManager& err) {
  jpeg_decompress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_GRAYSCALE || cinfo.jpeg_color_space == JCS_YCbCr ||
      cinfo.jpeg_color_space == JCS_RGB) {
    cinfo.out_color_space = JCS_RGB;
  }
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  channels = cinfo.output_components;
  if (channels == 3) {
    rgb.resize(width * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
  } else {
    jpeg_abort_decompress(&cinfo);
  }
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageStimulus decode_jpeg(std::span<const std::uint8_t> bytes, std::string id) {
  std::vector<std::uint8_t> rgb;
  std::size_t width = 0, height = 0;
  int channels = 0;
  JpegErrorManager err{};
  if (!decode_jpeg_raw(bytes, rgb, width, height, channels, err)) {
    throw ValidationError(fmt::format("{}: undecodable JPEG ({})", id, err.message));
  }
  if (channels != 3) throw ValidationError(fmt::format("{}: unexpected JPEG channel count {}", id, channels));
  ImageStimulus out;
  out.width = width;
  out.height = height;
  out.id = std::move(id);
  out.pixels.resize(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) out.pixels[i] = rgb[i] / 255.0f;
  return out;
}

}  // namespace

ImageStimulus decode_image(std::span<const std::uint8_t> bytes, std::string id) {
  if (is_png(bytes)) return decode_png(bytes, std::move(id));
  if (is_jpeg(bytes)) return decode_jpeg(bytes, std::move(id));
  throw ValidationError(fmt::format("{}: not a PNG or JPEG file", id.empty() ? "<memory>" : id));
}

ImageStimulus load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open image {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image(bytes, path.string());
}

std::vector<std::uint8_t> encode_png(const ImageStimulus& image) {
  if (image.color_space != ColorSpace::srgb) throw ValidationError("encode_png: image must be sRGB");
  std::vector<std::uint8_t> rgb(image.pixels.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    rgb[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw IoError(fmt::format("PNG encode failed: {}", img.message));
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw IoError(fmt::format("PNG encode failed: {}", img.message));
  }
  out.resize(size);
  return out;
}

void write_png(const ImageStimulus& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace vizsim
