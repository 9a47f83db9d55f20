#include <bit>
#include <cstring>
#include <regex>
#include <string>

#include "segaudit/dataset_io.hpp"
#include "segaudit/errors.hpp"

namespace segaudit {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor codec assumes a little-endian host");

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreambleSize = 10;  // magic + version + header length

std::vector<int> ParseShapeTuple(const std::string& text) {
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == ',')) ++pos;
    if (pos >= text.size()) break;
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(text.substr(pos), &used);
    } catch (const std::exception&) {
      throw FormatError("tensor header: bad shape entry in '(" + text + ")'");
    }
    if (value < 1 || value > (1LL << 30)) {
      throw FormatError("tensor header: dimension " + std::to_string(value) +
                        " out of range");
    }
    dims.push_back(static_cast<int>(value));
    pos += used;
  }
  return dims;
}

}  // namespace

std::pair<TensorShape, std::vector<float>> ParseNpy(std::string_view bytes) {
  if (bytes.size() < kPreambleSize || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("tensor: missing \\x93NUMPY magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError("tensor: unsupported container version " +
                      std::to_string(major) + "." + std::to_string(minor));
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<unsigned char>(bytes[9]) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw FormatError("tensor: truncated header");
  }
  const std::string header(bytes.substr(kPreambleSize, header_len));

  static const std::regex kDescr(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex kFortran(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex kShape(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch match;
  if (!std::regex_search(header, match, kDescr)) {
    throw FormatError("tensor header: missing 'descr'");
  }
  if (match[1] != "<f4") {
    throw FormatError("tensor header: dtype '" + match[1].str() +
                      "' is not little-endian float32");
  }
  if (!std::regex_search(header, match, kFortran)) {
    throw FormatError("tensor header: missing 'fortran_order'");
  }
  if (match[1] != "False") {
    throw FormatError("tensor header: Fortran-ordered data is not supported");
  }
  if (!std::regex_search(header, match, kShape)) {
    throw FormatError("tensor header: missing 'shape'");
  }
  const std::vector<int> dims = ParseShapeTuple(match[1].str());
  if (dims.size() != 3) {
    throw FormatError("tensor header: expected shape (h, w, K), got " +
                      std::to_string(dims.size()) + " dimensions");
  }

  const TensorShape shape{dims[0], dims[1], dims[2]};
  const std::size_t count = static_cast<std::size_t>(shape.height) *
                            shape.width * shape.num_classes;
  const std::string_view payload = bytes.substr(kPreambleSize + header_len);
  if (payload.size() != count * sizeof(float)) {
    throw FormatError("tensor: payload holds " + std::to_string(payload.size()) +
                      " bytes, header implies " +
                      std::to_string(count * sizeof(float)));
  }
  std::vector<float> values(count);
  std::memcpy(values.data(), payload.data(), payload.size());
  return {shape, std::move(values)};
}

std::string EncodeNpy(const TensorShape& shape, std::span<const float> values) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                     std::to_string(shape.height) + ", " +
                     std::to_string(shape.width) + ", " +
                     std::to_string(shape.num_classes) + "), }";
  // Pad so preamble + header is a multiple of 64, newline-terminated.
  const std::size_t unpadded = kPreambleSize + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::string out(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out += dict;
  const std::size_t data_offset = out.size();
  out.resize(data_offset + values.size() * sizeof(float));
  std::memcpy(out.data() + data_offset, values.data(),
              values.size() * sizeof(float));
  return out;
}

ProbabilityMap ReadTensor(const std::filesystem::path& path,
                          const TensorExpectation& expect) {
  auto [shape, raw] = [&] {
    try {
      return ParseNpy(ReadFile(path));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }();
  const auto check = [&](const std::optional<int>& want, int got,
                         const char* what) {
    if (want && *want != got) {
      throw ShapeError(path.string() + ": " + what + " is " +
                       std::to_string(got) + ", expected " +
                       std::to_string(*want));
    }
  };
  check(expect.num_classes, shape.num_classes, "class count");
  check(expect.height, shape.height, "height");
  check(expect.width, shape.width, "width");

  std::vector<double> values(raw.begin(), raw.end());
  try {
    return ProbabilityMap::FromValues(shape.height, shape.width,
                                      shape.num_classes, std::move(values));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void WriteTensor(const std::filesystem::path& path,
                 const ProbabilityMap& probs) {
  std::vector<float> values(probs.values().begin(), probs.values().end());
  WriteFileAtomic(path, EncodeNpy({probs.height(), probs.width(),
                                   probs.num_classes()},
                                  values));
}

}  // namespace segaudit
