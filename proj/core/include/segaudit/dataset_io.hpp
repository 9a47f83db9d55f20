#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "segaudit/grid.hpp"
#include "segaudit/injection.hpp"
#include "segaudit/metrics.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

// ---------------------------------------------------------------------------
// Probability tensors: .npy v1.0, little-endian float32, C order, (h, w, K).

struct TensorShape {
  int height = 0;
  int width = 0;
  int num_classes = 0;
};

// Optional expectations checked against the container header. Mismatches
// raise ShapeError.
struct TensorExpectation {
  std::optional<int> num_classes;
  std::optional<int> height;
  std::optional<int> width;
};

// Parses an in-memory .npy buffer. FormatError on malformed or unsupported
// containers.
std::pair<TensorShape, std::vector<float>> ParseNpy(std::string_view bytes);
std::string EncodeNpy(const TensorShape& shape, std::span<const float> values);

ProbabilityMap ReadTensor(const std::filesystem::path& path,
                          const TensorExpectation& expect = {});
// Stores the map as float32.
void WriteTensor(const std::filesystem::path& path, const ProbabilityMap& probs);

// ---------------------------------------------------------------------------
// Label masks: 8-bit single-channel PNG, one class index per pixel.

struct GrayTag {};
using GrayImage = Grid<std::uint8_t, GrayTag>;

GrayImage ReadGrayPng(const std::filesystem::path& path);
void WriteGrayPng(const std::filesystem::path& path, const GrayImage& image);

// ValidationError when a value is >= num_classes; FormatError on anything but
// 8-bit grayscale.
AnnotatedMask ReadMask(const std::filesystem::path& path, int num_classes);
void WriteMask(const std::filesystem::path& path, const AnnotatedMask& labels);

// ---------------------------------------------------------------------------
// Dataset manifest.

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path prob_path;   // as written; relative to the manifest
  std::filesystem::path label_path;  // directory unless absolute
  int height = 0;
  int width = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int num_classes = 0;
  ClassIndex unlabeled_class = 0;
  // Directory relative paths resolve against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path ResolveProb(std::size_t index) const;
  std::filesystem::path ResolveLabel(std::size_t index) const;

  // Unique ids, K >= 2, K <= 256, 0 <= unlabeled < K, positive dims.
  void Validate() const;
};

DatasetManifest ParseManifest(std::string_view json_text,
                              const std::filesystem::path& base_dir);
DatasetManifest ReadManifest(const std::filesystem::path& path);
std::string SerializeManifest(const DatasetManifest& manifest);
void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest);

struct LoadedImage {
  ProbabilityMap probs;
  AnnotatedMask labels;
};

// Reads tensor and mask of one entry and checks them against the declared
// dimensions and K.
LoadedImage LoadImage(const DatasetManifest& manifest, std::size_t index);
AnnotatedMask LoadMask(const DatasetManifest& manifest, std::size_t index);

// ---------------------------------------------------------------------------
// Score reports.

enum class Method { kCcp, kTccp, kCil, kSoftmin, kClc, kIou, kCoco };

inline constexpr Method kAllMethods[] = {Method::kCcp,  Method::kTccp,
                                         Method::kCil,  Method::kSoftmin,
                                         Method::kClc,  Method::kIou,
                                         Method::kCoco};

std::string_view ToString(Method method);
Method ParseMethod(std::string_view text);  // case-insensitive

struct ScoreRecord {
  std::string image_id;
  Method method = Method::kCil;
  double score = 0.0;
  std::int64_t rank = 0;  // 1 = lowest score

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Ranks one method's scores: ascending score, ties by image_id.
std::vector<ScoreRecord> RankScores(
    Method method, std::span<const std::pair<std::string, double>> scores);

enum class ReportFormat { kCsv, kJson };
ReportFormat ParseReportFormat(std::string_view text);

// Deterministic serialization, rows sorted by (method, rank).
std::string SerializeReport(std::span<const ScoreRecord> records,
                            ReportFormat format);
void WriteReport(std::span<const ScoreRecord> records,
                 const std::filesystem::path& path, ReportFormat format);
// Accepts either format (detected from content).
std::vector<ScoreRecord> ParseReport(std::string_view text);
std::vector<ScoreRecord> ReadReport(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Error logs: JSON lines; first line is a header naming the generator.

struct ErrorLogHeader {
  std::string generator;
  std::uint64_t seed = 0;
  ErrorType error_type = ErrorType::kNone;
  double proportion = 0.0;
  std::pair<int, int> shift_radius_range{0, 0};
};

std::string SerializeErrorLog(const ErrorLogHeader& header,
                              std::span<const ErrorLog> logs);
void WriteErrorLog(const std::filesystem::path& path,
                   const ErrorLogHeader& header, std::span<const ErrorLog> logs);
std::vector<ErrorLog> ParseErrorLog(std::string_view text);
std::vector<ErrorLog> ReadErrorLog(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation report: {method: {auroc, auprc, lift_at_E, ...}}.

std::string SerializeEvaluation(const std::map<Method, DetectionMetrics>& table);
void WriteEvaluation(const std::filesystem::path& path,
                     const std::map<Method, DetectionMetrics>& table);

// ---------------------------------------------------------------------------
// Suggested-error overlays.

struct OverlayInfo {
  std::int64_t marked_pixels = 0;
};

// Marks (255) pixels with s < threshold or b == 0; everything else is 0.
GrayImage OverlayMask(const PixelScoreMap& scores, const FlagMask& flags,
                      double threshold);
OverlayInfo EmitOverlay(std::string_view image_id, const PixelScoreMap& scores,
                        const FlagMask& flags, double threshold,
                        const std::filesystem::path& path);

// ---------------------------------------------------------------------------

std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);
// Shortest round-trip decimal form.
std::string FormatDouble(double value);

}  // namespace segaudit
