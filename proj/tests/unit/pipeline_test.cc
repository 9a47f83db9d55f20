#include "segaudit/pipeline.hpp"

#include <gtest/gtest.h>

#include <set>

#include "segaudit/errors.hpp"
#include "segaudit/pixel_scores.hpp"
#include "segaudit/synthetic.hpp"
#include "test_support.hpp"

namespace segaudit {
namespace {

using testing::TempDir;

SyntheticConfig SmallConfig(int n) {
  SyntheticConfig config;
  config.num_images = n;
  config.height = 20;
  config.width = 18;
  config.num_classes = 4;
  config.min_blob_radius = 2;
  config.max_blob_radius = 6;
  config.seed = 3;
  return config;
}

TEST(ScoreDatasetTest, OneRowPerImageAndMethod) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(5), dir.path());
  const ScoreOutput out = ScoreDataset(manifest, ScoreConfig{});
  EXPECT_EQ(out.records.size(), 35u);
  ASSERT_TRUE(out.thresholds.has_value());
  std::map<Method, std::set<std::int64_t>> ranks;
  for (const ScoreRecord& r : out.records) ranks[r.method].insert(r.rank);
  EXPECT_EQ(ranks.size(), 7u);
  for (const auto& [method, seen] : ranks) {
    EXPECT_EQ(seen, (std::set<std::int64_t>{1, 2, 3, 4, 5}));
  }
}

TEST(ScoreDatasetTest, SingleMethodSkipsThresholdPass) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(3), dir.path());
  ScoreConfig config;
  config.methods = {Method::kCil};
  const ScoreOutput out = ScoreDataset(manifest, config);
  EXPECT_EQ(out.records.size(), 3u);
  EXPECT_FALSE(out.thresholds.has_value());
}

TEST(ScoreDatasetTest, MatchesPerImageScoring) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(4), dir.path());
  const ScoreConfig config;
  const ScoreOutput out = ScoreDataset(manifest, config);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const LoadedImage image = LoadImage(manifest, i);
    const auto scores = ScoreImage(image.probs, image.labels, config, &*out.thresholds);
    for (const ScoreRecord& r : out.records) {
      if (r.image_id == manifest.entries[i].image_id) {
        EXPECT_EQ(r.score, scores.at(r.method));
      }
    }
  }
}

TEST(ScoreDatasetTest, ThreadCountDoesNotChangeResults) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(40), dir.path());
  ScoreConfig config;
  const ScoreOutput one = ScoreDataset(manifest, config);
  config.threads = 3;
  const ScoreOutput three = ScoreDataset(manifest, config);
  EXPECT_EQ(one.records, three.records);
  EXPECT_EQ(one.thresholds->threshold, three.thresholds->threshold);
}

TEST(ScoreDatasetTest, MissingTensorNamesImage) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(3), dir.path());
  std::filesystem::remove(manifest.ResolveProb(1));
  try {
    ScoreDataset(manifest, ScoreConfig{});
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(manifest.entries[1].image_id),
              std::string::npos);
  }
}

TEST(ScoreDatasetTest, WrongDeclaredSizeIsShapeError) {
  TempDir dir;
  DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(2), dir.path());
  manifest.entries[0].height += 1;
  EXPECT_THROW(ScoreDataset(manifest, ScoreConfig{}), ShapeError);
}

TEST(ScoreDatasetTest, OverlaysAreWritten) {
  TempDir dir;
  const DatasetManifest manifest = WriteSyntheticDataset(SmallConfig(2), dir / "data");
  ScoreConfig config;
  config.methods = {Method::kSoftmin};
  config.overlay_threshold = 0.5;
  config.overlay_dir = dir / "overlays";
  const ScoreOutput out = ScoreDataset(manifest, config);
  EXPECT_EQ(out.overlays.size(), 2u);
  for (const ManifestEntry& e : manifest.entries) {
    EXPECT_TRUE(std::filesystem::exists(dir / "overlays" / (SafeFileStem(e.image_id) + ".png")));
  }
}

TEST(CorruptDatasetTest, WritesConsistentOutputs) {
  TempDir dir;
  const DatasetManifest clean = WriteSyntheticDataset(SmallConfig(10), dir / "data");
  const CorruptionPlan plan{ErrorType::kDrop, 0.3, 7};
  const CorruptionOutput out = CorruptDataset(clean, plan, dir / "out");
  int errors = 0;
  for (std::size_t i = 0; i < out.logs.size(); ++i) {
    const ErrorLog& log = out.logs[i];
    EXPECT_EQ(log.image_id, clean.entries[i].image_id);
    const AnnotatedMask before = LoadMask(clean, i);
    const AnnotatedMask after = LoadMask(out.manifest, i);
    if (log.is_error()) {
      ++errors;
      EXPECT_GT(log.pixels_changed, 0);
      EXPECT_NE(before, after);
    } else {
      EXPECT_EQ(before, after);
    }
  }
  EXPECT_EQ(errors, 3);
  EXPECT_EQ(ReadErrorLog(dir / "out" / "error_log.jsonl"), out.logs);
  const DatasetManifest reread = ReadManifest(dir / "out" / "manifest.json");
  EXPECT_EQ(reread.entries, out.manifest.entries);
  // Corrupted manifests still point at the original tensors.
  EXPECT_EQ(reread.ResolveProb(0), std::filesystem::weakly_canonical(clean.ResolveProb(0)));
}

TEST(CorruptDatasetTest, ByteIdenticalAcrossRunsAndThreads) {
  TempDir dir;
  const DatasetManifest clean = WriteSyntheticDataset(SmallConfig(12), dir / "data");
  const CorruptionPlan plan{ErrorType::kShift, 0.5, 13, {1, 2}};
  CorruptDataset(clean, plan, dir / "a", 1);
  CorruptDataset(clean, plan, dir / "b", 4);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir / "a");
    EXPECT_EQ(ReadFile(entry.path()), ReadFile(dir / "b" / rel)) << rel;
  }
}

TEST(EvaluateReportTest, JoinsAndEvaluates) {
  const std::vector<ScoreRecord> records{
      {"a", Method::kCil, 0.1, 1}, {"b", Method::kCil, 0.9, 2},
      {"a", Method::kCcp, 0.9, 2}, {"b", Method::kCcp, 0.1, 1}};
  const std::vector<ErrorLog> logs{{"a", ErrorType::kDrop, DropParams{1}, 3},
                                   {"b", ErrorType::kNone, {}, 0}};
  const auto table = EvaluateReport(records, logs);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table.at(Method::kCil).auroc, 1.0);
  EXPECT_EQ(table.at(Method::kCcp).auroc, 0.0);
}

TEST(EvaluateReportTest, MissingIdsAreJoinErrors) {
  const std::vector<ScoreRecord> records{{"a", Method::kCil, 0.1, 1},
                                         {"zzz", Method::kCil, 0.9, 2}};
  const std::vector<ErrorLog> logs{{"a", ErrorType::kDrop, DropParams{1}, 3}};
  try {
    EvaluateReport(records, logs);
    FAIL() << "expected JoinError";
  } catch (const JoinError& e) {
    EXPECT_NE(std::string(e.what()).find("zzz"), std::string::npos);
  }
}

TEST(SafeFileStemTest, ReplacesSeparators) {
  EXPECT_EQ(SafeFileStem("img_001"), "img_001");
  EXPECT_EQ(SafeFileStem("a/b"), SafeFileStem("a/b"));
  EXPECT_EQ(SafeFileStem("a/b").find('/'), std::string::npos);
}

TEST(SyntheticTest, ImagesDependOnlyOnConfigAndIndex) {
  const SyntheticConfig config = SmallConfig(10);
  const SyntheticImage a = GenerateSyntheticImage(config, 7);
  const SyntheticImage b = GenerateSyntheticImage(config, 7);
  EXPECT_EQ(a.probs, b.probs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(GenerateSyntheticImage(config, 6).labels, a.labels);
}

}  // namespace
}  // namespace segaudit
