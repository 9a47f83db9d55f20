#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "segaudit/dataset_io.hpp"
#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

// Seeded stand-in for a segmentation dataset plus out-of-sample predictions
// of a reasonably calibrated model. Masks are random ellipses painted over an
// unlabeled background; probabilities mix a softened one-hot of the model's
// belief with a spatially smoothed random simplex. The belief equals the clean
// mask except on "confused" blobs, where the model splits its mass between the
// true class and another one, so clean images are not all scored perfectly.
struct SyntheticConfig {
  int num_images = 500;
  int height = 64;
  int width = 64;
  int num_classes = 5;
  ClassIndex unlabeled_class = 0;
  int min_blobs = 3;
  int max_blobs = 7;
  int min_blob_radius = 4;
  int max_blob_radius = 16;
  // Weight of the (boundary-softened) one-hot term.
  double onehot_weight = 0.8;
  // Box radius used to soften class boundaries of the one-hot term.
  int boundary_blur = 1;
  // Box radius used to smooth the random simplex noise.
  int noise_blur = 2;
  // Per-blob probability that the model is confused about the blob, and the
  // range of mass it moves to the wrong class when it is.
  double confusion_probability = 0.3;
  double min_confusion = 0.2;
  double max_confusion = 0.6;
  std::uint64_t seed = 0;
};

struct SyntheticImage {
  std::string image_id;
  ProbabilityMap probs;
  AnnotatedMask labels;
};

// Image `index` depends only on (config, index).
SyntheticImage GenerateSyntheticImage(const SyntheticConfig& config,
                                      std::size_t index);

// Writes tensors/, masks/ and manifest.json under `dir`; returns the manifest.
DatasetManifest WriteSyntheticDataset(const SyntheticConfig& config,
                                      const std::filesystem::path& dir,
                                      unsigned threads = 1);

}  // namespace segaudit
