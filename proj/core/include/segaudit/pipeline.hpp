#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segaudit/components.hpp"
#include "segaudit/confident_learning.hpp"
#include "segaudit/dataset_io.hpp"
#include "segaudit/image_scores.hpp"
#include "segaudit/injection.hpp"
#include "segaudit/metrics.hpp"

namespace segaudit {

struct ScoreConfig {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  SoftminParams softmin;
  TccpParams tccp;
  int pool_factor = kDefaultPoolFactor;
  CocoOptions coco;
  unsigned threads = 1;
  // When set, one overlay PNG per image is written to overlay_dir.
  std::optional<double> overlay_threshold;
  std::filesystem::path overlay_dir;

  void Validate() const;
};

// All requested scores for one image. `thresholds` is required when CLC is
// requested.
std::map<Method, double> ScoreImage(const ProbabilityMap& probs,
                                    const AnnotatedMask& labels,
                                    const ScoreConfig& config,
                                    const ClassThresholds* thresholds);

// Dataset pass over pooled maps; bit-identical for any thread count.
ClassThresholds ComputeClassThresholds(const DatasetManifest& manifest,
                                       int pool_factor, unsigned threads);

struct ScoreOutput {
  std::vector<ScoreRecord> records;  // one per (image, method)
  std::optional<ClassThresholds> thresholds;
  std::map<std::string, OverlayInfo> overlays;
};

// Two passes when CLC or overlays are requested (thresholds, then scores),
// one otherwise. Errors carry the failing image id.
ScoreOutput ScoreDataset(const DatasetManifest& manifest,
                         const ScoreConfig& config);

struct OverlayConfig {
  double threshold = 0.1;
  int pool_factor = kDefaultPoolFactor;
  unsigned threads = 1;
  // Restrict to these ids; empty means every image.
  std::vector<std::string> image_ids;
};

std::map<std::string, OverlayInfo> EmitOverlays(
    const DatasetManifest& manifest, const OverlayConfig& config,
    const std::filesystem::path& out_dir);

struct CorruptionOutput {
  DatasetManifest manifest;
  std::vector<ErrorLog> logs;
  ErrorLogHeader header;
};

// Writes masks/, manifest.json and error_log.jsonl under out_dir. Outputs are
// a pure function of (manifest, plan) and do not depend on `threads`.
CorruptionOutput CorruptDataset(const DatasetManifest& manifest,
                                const CorruptionPlan& plan,
                                const std::filesystem::path& out_dir,
                                unsigned threads = 1);

// Joins report rows to ground truth and evaluates each method. Throws
// JoinError naming report ids absent from the log.
std::map<Method, DetectionMetrics> EvaluateReport(
    std::span<const ScoreRecord> records, std::span<const ErrorLog> logs);

// File-name-safe form of an image id.
std::string SafeFileStem(std::string_view image_id);

}  // namespace segaudit
