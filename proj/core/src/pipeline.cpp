#include "segaudit/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "segaudit/parallel.hpp"
#include "segaudit/pixel_scores.hpp"
#include "segaudit/random.hpp"

namespace segaudit {
namespace {

// Images per in-order reduction step of the threshold pass.
constexpr std::size_t kThresholdBatch = 32;

bool Wants(const ScoreConfig& config, Method method) {
  return std::find(config.methods.begin(), config.methods.end(), method) !=
         config.methods.end();
}

// Rethrows the in-flight exception with the image id prefixed, keeping its
// type so callers can still map it to an exit code.
[[noreturn]] void RethrowForImage(const std::string& image_id) {
  const std::string prefix = "image '" + image_id + "': ";
  try {
    throw;
  } catch (const ClassNotPresentError& e) {
    throw ClassNotPresentError(prefix + e.what());
  } catch (const JoinError& e) {
    throw JoinError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const DegenerateShiftError& e) {
    throw DegenerateShiftError(prefix + e.what());
  } catch (const InfeasiblePlanError& e) {
    throw InfeasiblePlanError(prefix + e.what());
  } catch (const UndefinedMetricError& e) {
    throw UndefinedMetricError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

std::vector<std::string> MaskFileNames(const DatasetManifest& manifest) {
  std::vector<std::string> names;
  std::set<std::string> used;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    std::string stem = SafeFileStem(manifest.entries[i].image_id);
    if (!used.insert(stem).second) {
      stem += "_" + std::to_string(i);
      used.insert(stem);
    }
    names.push_back(stem + ".png");
  }
  return names;
}

}  // namespace

std::string SafeFileStem(std::string_view image_id) {
  std::string out(image_id);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void ScoreConfig::Validate() const {
  if (methods.empty()) throw ValidationError("no scoring methods selected");
  softmin.Validate();
  tccp.Validate();
  if (pool_factor < 1) {
    throw ValidationError("downsample factor must be >= 1, got " +
                          std::to_string(pool_factor));
  }
  if (overlay_threshold &&
      !(*overlay_threshold >= 0.0 && *overlay_threshold <= 1.0)) {
    throw ValidationError("overlay threshold must be in [0,1]");
  }
}

std::map<Method, double> ScoreImage(const ProbabilityMap& probs,
                                    const AnnotatedMask& labels,
                                    const ScoreConfig& config,
                                    const ClassThresholds* thresholds) {
  std::map<Method, double> scores;
  const PredictedMask predicted = PredictedMaskOf(probs);
  const PixelScoreMap self_confidence = SelfConfidence(probs, labels);
  for (Method method : config.methods) {
    switch (method) {
      case Method::kCcp:
        scores[method] = CorrectlyClassifiedPixels(predicted, labels);
        break;
      case Method::kTccp:
        scores[method] = ThresholdedCcp(probs, labels, config.tccp);
        break;
      case Method::kCil:
        scores[method] = ConfidenceInLabel(self_confidence);
        break;
      case Method::kSoftmin:
        scores[method] = Softmin(self_confidence, config.softmin);
        break;
      case Method::kIou:
        scores[method] = MeanIou(predicted, labels, probs.num_classes());
        break;
      case Method::kClc:
      case Method::kCoco:
        break;  // pooled below
    }
  }
  if (Wants(config, Method::kClc) || Wants(config, Method::kCoco)) {
    const PooledImage pooled = Downsample(probs, labels, config.pool_factor);
    if (Wants(config, Method::kClc)) {
      if (thresholds == nullptr) {
        throw ValidationError("CLC requested without class thresholds");
      }
      scores[Method::kClc] =
          ClcScore(FlagMaskOf(pooled.probs, pooled.labels, *thresholds));
    }
    if (Wants(config, Method::kCoco)) {
      scores[Method::kCoco] =
          CocoScore(pooled.probs, PredictedMaskOf(pooled.probs), pooled.labels,
                    config.coco);
    }
  }
  return scores;
}

ClassThresholds ComputeClassThresholds(const DatasetManifest& manifest,
                                       int pool_factor, unsigned threads) {
  const std::size_t n = manifest.entries.size();
  if (n == 0) throw ValidationError("class thresholds: empty dataset");
  ThresholdAccumulator total(manifest.num_classes);
  std::vector<ThresholdAccumulator> batch;
  for (std::size_t start = 0; start < n; start += kThresholdBatch) {
    const std::size_t count = std::min(kThresholdBatch, n - start);
    batch.assign(count, ThresholdAccumulator(manifest.num_classes));
    ParallelFor(count, threads, [&](std::size_t b) {
      const std::size_t i = start + b;
      try {
        const LoadedImage image = LoadImage(manifest, i);
        const PooledImage pooled = Downsample(image.probs, image.labels, pool_factor);
        batch[b].Add(pooled.probs, pooled.labels);
      } catch (const Error&) {
        RethrowForImage(manifest.entries[i].image_id);
      }
    });
    for (const ThresholdAccumulator& partial : batch) total.Merge(partial);
  }
  return total.Finish();
}

ScoreOutput ScoreDataset(const DatasetManifest& manifest,
                         const ScoreConfig& config) {
  manifest.Validate();
  config.Validate();
  const std::size_t n = manifest.entries.size();
  if (n == 0) throw ValidationError("manifest has no entries");

  ScoreOutput output;
  if (Wants(config, Method::kClc) || config.overlay_threshold) {
    output.thresholds =
        ComputeClassThresholds(manifest, config.pool_factor, config.threads);
  }
  if (config.overlay_threshold) {
    std::filesystem::create_directories(config.overlay_dir);
  }

  // per_image[i][m]: score of method m (index into config.methods).
  std::vector<std::vector<double>> per_image(n);
  std::vector<OverlayInfo> overlays(config.overlay_threshold ? n : 0);
  const std::vector<std::string> overlay_names =
      config.overlay_threshold ? MaskFileNames(manifest) : std::vector<std::string>{};
  const ClassThresholds* thresholds =
      output.thresholds ? &*output.thresholds : nullptr;

  ParallelFor(n, config.threads, [&](std::size_t i) {
    const std::string& id = manifest.entries[i].image_id;
    try {
      const LoadedImage image = LoadImage(manifest, i);
      const std::map<Method, double> scores =
          ScoreImage(image.probs, image.labels, config, thresholds);
      for (Method m : config.methods) per_image[i].push_back(scores.at(m));
      if (config.overlay_threshold) {
        const PooledImage pooled =
            Downsample(image.probs, image.labels, config.pool_factor);
        const FlagMask flags = UpsampleFlags(
            FlagMaskOf(pooled.probs, pooled.labels, *thresholds),
            config.pool_factor, image.probs.height(), image.probs.width());
        overlays[i] = EmitOverlay(id, SelfConfidence(image.probs, image.labels),
                                  flags, *config.overlay_threshold,
                                  config.overlay_dir / overlay_names[i]);
      }
    } catch (const Error&) {
      RethrowForImage(id);
    }
  });

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    std::vector<std::pair<std::string, double>> column;
    column.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      column.emplace_back(manifest.entries[i].image_id, per_image[i][m]);
    }
    const std::vector<ScoreRecord> ranked = RankScores(config.methods[m], column);
    output.records.insert(output.records.end(), ranked.begin(), ranked.end());
  }
  for (std::size_t i = 0; i < overlays.size(); ++i) {
    output.overlays[manifest.entries[i].image_id] = overlays[i];
  }
  return output;
}

std::map<std::string, OverlayInfo> EmitOverlays(
    const DatasetManifest& manifest, const OverlayConfig& config,
    const std::filesystem::path& out_dir) {
  manifest.Validate();
  std::vector<std::size_t> selected;
  if (config.image_ids.empty()) {
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) selected.push_back(i);
  } else {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      index[manifest.entries[i].image_id] = i;
    }
    for (const std::string& id : config.image_ids) {
      const auto it = index.find(id);
      if (it == index.end()) {
        throw ValidationError("image '" + id + "' is not in the manifest");
      }
      selected.push_back(it->second);
    }
  }
  const ClassThresholds thresholds =
      ComputeClassThresholds(manifest, config.pool_factor, config.threads);
  std::filesystem::create_directories(out_dir);
  const std::vector<std::string> names = MaskFileNames(manifest);
  std::vector<OverlayInfo> infos(selected.size());
  ParallelFor(selected.size(), config.threads, [&](std::size_t s) {
    const std::size_t i = selected[s];
    const std::string& id = manifest.entries[i].image_id;
    try {
      const LoadedImage image = LoadImage(manifest, i);
      const PooledImage pooled =
          Downsample(image.probs, image.labels, config.pool_factor);
      const FlagMask flags = UpsampleFlags(
          FlagMaskOf(pooled.probs, pooled.labels, thresholds),
          config.pool_factor, image.probs.height(), image.probs.width());
      infos[s] = EmitOverlay(id, SelfConfidence(image.probs, image.labels), flags,
                             config.threshold, out_dir / names[i]);
    } catch (const Error&) {
      RethrowForImage(id);
    }
  });
  std::map<std::string, OverlayInfo> out;
  for (std::size_t s = 0; s < selected.size(); ++s) {
    out[manifest.entries[selected[s]].image_id] = infos[s];
  }
  return out;
}

CorruptionOutput CorruptDataset(const DatasetManifest& manifest,
                                const CorruptionPlan& plan,
                                const std::filesystem::path& out_dir,
                                unsigned threads) {
  manifest.Validate();
  plan.Validate();
  const std::size_t n = manifest.entries.size();

  CorruptionInput input;
  input.unlabeled_class = manifest.unlabeled_class;
  input.classes_present.resize(n);
  for (const ManifestEntry& e : manifest.entries) input.image_ids.push_back(e.image_id);
  ParallelFor(n, threads, [&](std::size_t i) {
    try {
      input.classes_present[i] = ClassesPresent(LoadMask(manifest, i));
    } catch (const Error&) {
      RethrowForImage(manifest.entries[i].image_id);
    }
  });
  input.load_mask = [&manifest](std::size_t i) { return LoadMask(manifest, i); };

  CorruptionOutput output;
  output.logs = PlanCorruption(input, plan);
  output.header = {SeededRng::kAlgorithm, plan.seed, plan.error_type,
                   plan.proportion, plan.shift_radius_range};

  const std::vector<std::string> names = MaskFileNames(manifest);
  std::filesystem::create_directories(out_dir / "masks");
  ParallelFor(n, threads, [&](std::size_t i) {
    try {
      const InjectionResult result = ApplyError(
          LoadMask(manifest, i), output.logs[i], manifest.unlabeled_class);
      output.logs[i].pixels_changed = result.log.pixels_changed;
      WriteMask(out_dir / "masks" / names[i], result.labels);
    } catch (const Error&) {
      RethrowForImage(manifest.entries[i].image_id);
    }
  });

  output.manifest = manifest;
  output.manifest.base_dir = out_dir;
  for (std::size_t i = 0; i < n; ++i) {
    ManifestEntry& e = output.manifest.entries[i];
    e.prob_path = std::filesystem::weakly_canonical(manifest.ResolveProb(i));
    e.label_path = std::filesystem::path("masks") / names[i];
  }
  WriteErrorLog(out_dir / "error_log.jsonl", output.header, output.logs);
  WriteManifest(out_dir / "manifest.json", output.manifest);
  return output;
}

std::map<Method, DetectionMetrics> EvaluateReport(
    std::span<const ScoreRecord> records, std::span<const ErrorLog> logs) {
  std::unordered_map<std::string, bool> truth;
  for (const ErrorLog& log : logs) truth[log.image_id] = log.is_error();

  std::set<std::string> missing;
  std::map<Method, std::vector<LabeledScore>> by_method;
  for (const ScoreRecord& r : records) {
    const auto it = truth.find(r.image_id);
    if (it == truth.end()) {
      missing.insert(r.image_id);
      continue;
    }
    by_method[r.method].push_back({r.image_id, r.score, it->second});
  }
  if (!missing.empty()) {
    std::string list;
    std::size_t shown = 0;
    for (const std::string& id : missing) {
      if (shown++ == 20) {
        list += ", ...";
        break;
      }
      list += (list.empty() ? "" : ", ") + id;
    }
    throw JoinError(std::to_string(missing.size()) +
                    " report image(s) missing from the error log: " + list);
  }
  if (by_method.empty()) throw ValidationError("report has no records");
  std::map<Method, DetectionMetrics> table;
  for (const auto& [method, items] : by_method) {
    table[method] = EvaluateDetection(items);
  }
  return table;
}

}  // namespace segaudit
