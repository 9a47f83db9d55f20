#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "segaudit/dataset_io.hpp"
#include "segaudit/errors.hpp"

namespace segaudit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

enum class DecodeStatus { kOk, kNotPng, kLibpngError, kNotGray8 };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kOk;
  int height = 0;
  int width = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::string message;
};

void OnPngError(png_structp png, png_const_charp message) {
  auto* result = static_cast<DecodeResult*>(png_get_error_ptr(png));
  if (result != nullptr) result->message = message;
  png_longjmp(png, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

// Plain C-style decoder: no objects with non-trivial destructors live in this
// frame between setjmp and the libpng calls that may longjmp.
DecodeResult DecodeGray8(std::FILE* fp, std::vector<std::uint8_t>* pixels) {
  DecodeResult result;
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, fp) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    result.status = DecodeStatus::kNotPng;
    return result;
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &result,
                                           OnPngError, OnPngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    result.status = DecodeStatus::kLibpngError;
    result.message = "cannot allocate decoder";
    return result;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    result.status = DecodeStatus::kLibpngError;
    return result;
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  result.width = static_cast<int>(png_get_image_width(png, info));
  result.height = static_cast<int>(png_get_image_height(png, info));
  result.color_type = png_get_color_type(png, info);
  result.bit_depth = png_get_bit_depth(png, info);
  if (result.color_type != PNG_COLOR_TYPE_GRAY || result.bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    result.status = DecodeStatus::kNotGray8;
    return result;
  }
  const int passes = png_set_interlace_handling(png);
  png_read_update_info(png, info);
  pixels->resize(static_cast<std::size_t>(result.width) * result.height);
  for (int pass = 0; pass < passes; ++pass) {
    for (int row = 0; row < result.height; ++row) {
      png_read_row(png,
                   pixels->data() + static_cast<std::size_t>(row) * result.width,
                   nullptr);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return result;
}

}  // namespace

GrayImage ReadGrayPng(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open mask " + path.string());
  std::vector<std::uint8_t> pixels;
  const DecodeResult result = DecodeGray8(fp.get(), &pixels);
  switch (result.status) {
    case DecodeStatus::kOk:
      break;
    case DecodeStatus::kNotPng:
      throw FormatError(path.string() + ": not a PNG file");
    case DecodeStatus::kLibpngError:
      throw FormatError(path.string() + ": " + result.message);
    case DecodeStatus::kNotGray8:
      throw FormatError(path.string() + ": expected 8-bit single-channel PNG, got "
                        "color type " + std::to_string(result.color_type) +
                        " at " + std::to_string(result.bit_depth) + " bits");
  }
  return GrayImage(result.height, result.width, std::move(pixels));
}

void WriteGrayPng(const std::filesystem::path& path, const GrayImage& image) {
  png_image out;
  std::memset(&out, 0, sizeof(out));
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width());
  out.height = static_cast<png_uint_32>(image.height());
  out.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&out, nullptr, &size, 0, image.values().data(),
                                 0, nullptr)) {
    throw IoError(path.string() + ": PNG encode failed: " + out.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&out, buffer.data(), &size, 0,
                                 image.values().data(), 0, nullptr)) {
    throw IoError(path.string() + ": PNG encode failed: " + out.message);
  }
  buffer.resize(size);
  WriteFileAtomic(path, buffer);
}

AnnotatedMask ReadMask(const std::filesystem::path& path, int num_classes) {
  const GrayImage gray = ReadGrayPng(path);
  AnnotatedMask labels(gray.height(), gray.width());
  for (int i = 0; i < gray.height(); ++i) {
    for (int j = 0; j < gray.width(); ++j) {
      const int value = gray(i, j);
      if (value >= num_classes) {
        throw ValidationError(path.string() + ": class " +
                              std::to_string(value) + " at (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              ") outside [0," + std::to_string(num_classes) +
                              ")");
      }
      labels(i, j) = value;
    }
  }
  return labels;
}

void WriteMask(const std::filesystem::path& path, const AnnotatedMask& labels) {
  GrayImage gray(labels.height(), labels.width());
  for (int i = 0; i < labels.height(); ++i) {
    for (int j = 0; j < labels.width(); ++j) {
      const ClassIndex v = labels(i, j);
      if (v < 0 || v > 255) {
        throw ValidationError("class " + std::to_string(v) +
                              " does not fit an 8-bit mask");
      }
      gray(i, j) = static_cast<std::uint8_t>(v);
    }
  }
  WriteGrayPng(path, gray);
}

}  // namespace segaudit
