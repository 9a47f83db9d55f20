#include "segaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "segaudit/parallel.hpp"
#include "segaudit/random.hpp"

namespace segaudit {
namespace {

std::string ImageId(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "img_%05zu", index);
  return buffer;
}

// Mean over a clipped (2r+1)^2 box, per channel, via a summed-area table.
std::vector<double> BoxBlur(const std::vector<double>& values, int h, int w,
                            int channels, int radius) {
  if (radius <= 0) return values;
  const int sh = h + 1;
  const int sw = w + 1;
  std::vector<double> table(static_cast<std::size_t>(sh) * sw * channels, 0.0);
  const auto at = [&](int i, int j, int c) -> double& {
    return table[(static_cast<std::size_t>(i) * sw + j) * channels + c];
  };
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < channels; ++c) {
        at(i + 1, j + 1, c) =
            values[(static_cast<std::size_t>(i) * w + j) * channels + c] +
            at(i, j + 1, c) + at(i + 1, j, c) - at(i, j, c);
      }
    }
  }
  std::vector<double> out(values.size());
  for (int i = 0; i < h; ++i) {
    const int i0 = std::max(0, i - radius);
    const int i1 = std::min(h, i + radius + 1);
    for (int j = 0; j < w; ++j) {
      const int j0 = std::max(0, j - radius);
      const int j1 = std::min(w, j + radius + 1);
      const double area = static_cast<double>((i1 - i0) * (j1 - j0));
      for (int c = 0; c < channels; ++c) {
        const double sum = at(i1, j1, c) - at(i0, j1, c) - at(i1, j0, c) +
                           at(i0, j0, c);
        out[(static_cast<std::size_t>(i) * w + j) * channels + c] = sum / area;
      }
    }
  }
  return out;
}

}  // namespace

SyntheticImage GenerateSyntheticImage(const SyntheticConfig& config,
                                      std::size_t index) {
  const int h = config.height;
  const int w = config.width;
  const int k = config.num_classes;
  if (k < 2) throw ValidationError("synthetic data needs at least two classes");
  // Per-image stream: seeds are spread with the golden-ratio increment.
  SeededRng rng(config.seed + 0x9E3779B97F4A7C15ULL * (index + 1));

  const auto draw_class = [&] {
    ClassIndex cls;
    do {
      cls = static_cast<ClassIndex>(rng.UniformInt(0, k - 1));
    } while (cls == config.unlabeled_class);
    return cls;
  };

  AnnotatedMask labels(h, w, config.unlabeled_class);
  // Model belief per pixel: main class, confused class, mass moved to it.
  std::vector<ClassIndex> confused_with(static_cast<std::size_t>(h) * w, -1);
  std::vector<double> confusion(static_cast<std::size_t>(h) * w, 0.0);
  const int blobs = static_cast<int>(rng.UniformInt(config.min_blobs, config.max_blobs));
  for (int b = 0; b < blobs; ++b) {
    const ClassIndex cls = draw_class();
    const int ci = static_cast<int>(rng.UniformInt(0, h - 1));
    const int cj = static_cast<int>(rng.UniformInt(0, w - 1));
    const int ri = static_cast<int>(
        rng.UniformInt(config.min_blob_radius, config.max_blob_radius));
    const int rj = static_cast<int>(
        rng.UniformInt(config.min_blob_radius, config.max_blob_radius));
    ClassIndex other = -1;
    double amount = 0.0;
    if (rng.UniformReal() < config.confusion_probability) {
      do {
        other = static_cast<ClassIndex>(rng.UniformInt(0, k - 1));
      } while (other == cls);
      amount = config.min_confusion +
               (config.max_confusion - config.min_confusion) * rng.UniformReal();
    }
    for (int i = std::max(0, ci - ri); i <= std::min(h - 1, ci + ri); ++i) {
      for (int j = std::max(0, cj - rj); j <= std::min(w - 1, cj + rj); ++j) {
        const double di = static_cast<double>(i - ci) / ri;
        const double dj = static_cast<double>(j - cj) / rj;
        if (di * di + dj * dj > 1.0) continue;
        const std::size_t px = static_cast<std::size_t>(i) * w + j;
        labels(i, j) = cls;
        confused_with[px] = other;
        confusion[px] = amount;
      }
    }
  }

  const std::size_t cells = static_cast<std::size_t>(h) * w * k;
  std::vector<double> onehot(cells, 0.0);
  std::vector<double> noise(cells, 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t px = static_cast<std::size_t>(i) * w + j;
      const std::size_t base = px * k;
      onehot[base + labels(i, j)] = 1.0 - confusion[px];
      if (confused_with[px] >= 0) onehot[base + confused_with[px]] += confusion[px];
      // Uniform point on the simplex: normalized exponentials.
      double total = 0.0;
      for (int c = 0; c < k; ++c) {
        noise[base + c] = -std::log1p(-rng.UniformReal());
        total += noise[base + c];
      }
      for (int c = 0; c < k; ++c) noise[base + c] /= total;
    }
  }
  onehot = BoxBlur(onehot, h, w, k, config.boundary_blur);
  noise = BoxBlur(noise, h, w, k, config.noise_blur);

  std::vector<double> probs(cells);
  for (std::size_t px = 0; px < static_cast<std::size_t>(h) * w; ++px) {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      const double v = config.onehot_weight * onehot[px * k + c] +
                       (1.0 - config.onehot_weight) * noise[px * k + c];
      probs[px * k + c] = v;
      total += v;
    }
    // Quantize to the float32 grid of the tensor container.
    for (int c = 0; c < k; ++c) {
      probs[px * k + c] = static_cast<float>(probs[px * k + c] / total);
    }
  }
  return {ImageId(index),
          ProbabilityMap::FromValues(h, w, k, std::move(probs)),
          std::move(labels)};
}

DatasetManifest WriteSyntheticDataset(const SyntheticConfig& config,
                                      const std::filesystem::path& dir,
                                      unsigned threads) {
  if (config.num_images < 1) throw ValidationError("synthetic dataset is empty");
  std::filesystem::create_directories(dir / "tensors");
  std::filesystem::create_directories(dir / "masks");
  DatasetManifest manifest;
  manifest.base_dir = dir;
  manifest.num_classes = config.num_classes;
  manifest.unlabeled_class = config.unlabeled_class;
  manifest.entries.resize(config.num_images);
  ParallelFor(manifest.entries.size(), threads, [&](std::size_t i) {
    const SyntheticImage image = GenerateSyntheticImage(config, i);
    ManifestEntry& entry = manifest.entries[i];
    entry.image_id = image.image_id;
    entry.prob_path = std::filesystem::path("tensors") / (image.image_id + ".npy");
    entry.label_path = std::filesystem::path("masks") / (image.image_id + ".png");
    entry.height = config.height;
    entry.width = config.width;
    WriteTensor(dir / entry.prob_path, image.probs);
    WriteMask(dir / entry.label_path, image.labels);
  });
  WriteManifest(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace segaudit
