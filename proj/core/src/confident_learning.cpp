#include "segaudit/confident_learning.hpp"

#include <algorithm>
#include <string>

#include "segaudit/pixel_scores.hpp"

namespace segaudit {
namespace {

int CeilDiv(int a, int b) { return (a + b - 1) / b; }

}  // namespace

PooledImage Downsample(const ProbabilityMap& probs, const AnnotatedMask& labels,
                       int factor) {
  RequireSameShape(probs, labels, "downsample");
  if (factor < 1) {
    throw ValidationError("pool factor must be >= 1, got " +
                          std::to_string(factor));
  }
  const int num_classes = probs.num_classes();
  RequireLabelsBelow(labels, num_classes);
  if (factor == 1) return {probs, labels};

  const int out_h = CeilDiv(probs.height(), factor);
  const int out_w = CeilDiv(probs.width(), factor);
  std::vector<double> pooled(static_cast<std::size_t>(out_h) * out_w *
                             num_classes);
  AnnotatedMask pooled_labels(out_h, out_w);
  std::vector<double> sum(num_classes);
  std::vector<int> votes(num_classes);

  for (int oi = 0; oi < out_h; ++oi) {
    for (int oj = 0; oj < out_w; ++oj) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(votes.begin(), votes.end(), 0);
      const int i_end = std::min(probs.height(), (oi + 1) * factor);
      const int j_end = std::min(probs.width(), (oj + 1) * factor);
      int count = 0;
      for (int i = oi * factor; i < i_end; ++i) {
        for (int j = oj * factor; j < j_end; ++j) {
          const auto row = probs.pixel(i, j);
          for (int k = 0; k < num_classes; ++k) sum[k] += row[k];
          ++votes[labels(i, j)];
          ++count;
        }
      }
      double* out = pooled.data() +
                    (static_cast<std::size_t>(oi) * out_w + oj) * num_classes;
      for (int k = 0; k < num_classes; ++k) out[k] = sum[k] / count;
      pooled_labels(oi, oj) = static_cast<ClassIndex>(
          std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  }
  return {ProbabilityMap::FromValues(out_h, out_w, num_classes,
                                     std::move(pooled), 1e-9),
          std::move(pooled_labels)};
}

ThresholdAccumulator::ThresholdAccumulator(int num_classes)
    : sums_(num_classes, 0.0), counts_(num_classes, 0) {}

void ThresholdAccumulator::Add(const ProbabilityMap& probs,
                               const AnnotatedMask& labels) {
  RequireSameShape(probs, labels, "class thresholds");
  if (probs.num_classes() != num_classes()) {
    throw ShapeError("class thresholds: expected " +
                     std::to_string(num_classes()) + " classes, got " +
                     std::to_string(probs.num_classes()));
  }
  RequireLabelsBelow(labels, num_classes());
  // Per-image partials first so the dataset-level sum does not depend on how
  // pixels are chunked.
  std::vector<double> image_sums(sums_.size(), 0.0);
  for (int i = 0; i < probs.height(); ++i) {
    for (int j = 0; j < probs.width(); ++j) {
      const ClassIndex label = labels(i, j);
      image_sums[label] += probs(i, j, label);
      ++counts_[label];
    }
  }
  for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += image_sums[k];
}

void ThresholdAccumulator::Merge(const ThresholdAccumulator& other) {
  if (other.num_classes() != num_classes()) {
    throw ShapeError("cannot merge threshold accumulators of different K");
  }
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    sums_[k] += other.sums_[k];
    counts_[k] += other.counts_[k];
  }
}

ClassThresholds ThresholdAccumulator::Finish() const {
  ClassThresholds out;
  out.threshold.assign(sums_.size(), 0.0);
  out.defined.assign(sums_.size(), false);
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    if (counts_[k] == 0) continue;
    out.threshold[k] = sums_[k] / static_cast<double>(counts_[k]);
    out.defined[k] = true;
  }
  return out;
}

ClassThresholds ClassThresholdsOf(std::span<const PooledImage> dataset) {
  if (dataset.empty()) throw ValidationError("class thresholds: empty dataset");
  ThresholdAccumulator acc(dataset.front().probs.num_classes());
  for (const PooledImage& image : dataset) acc.Add(image.probs, image.labels);
  return acc.Finish();
}

FlagMask FlagMaskOf(const ProbabilityMap& probs, const AnnotatedMask& labels,
                    const ClassThresholds& thresholds) {
  RequireSameShape(probs, labels, "flag mask");
  const int num_classes = probs.num_classes();
  if (thresholds.num_classes() != num_classes) {
    throw ShapeError("flag mask: thresholds cover " +
                     std::to_string(thresholds.num_classes()) +
                     " classes, probabilities " + std::to_string(num_classes));
  }
  RequireLabelsBelow(labels, num_classes);
  FlagMask flags(probs.height(), probs.width(), 1);
  for (int i = 0; i < probs.height(); ++i) {
    for (int j = 0; j < probs.width(); ++j) {
      const auto row = probs.pixel(i, j);
      int confident = -1;
      for (int k = 0; k < num_classes; ++k) {
        if (!thresholds.defined[k] || row[k] < thresholds.threshold[k]) continue;
        if (confident < 0 || row[k] > row[confident]) confident = k;
      }
      if (confident >= 0 && confident != labels(i, j)) flags(i, j) = 0;
    }
  }
  return flags;
}

double ClcScore(const FlagMask& flags) {
  std::int64_t unflagged = 0;
  for (std::uint8_t b : flags.values()) unflagged += b != 0;
  return static_cast<double>(unflagged) / static_cast<double>(flags.size());
}

FlagMask UpsampleFlags(const FlagMask& flags, int factor, int height,
                       int width) {
  if (factor < 1) throw ValidationError("upsample factor must be >= 1");
  if (CeilDiv(height, factor) != flags.height() ||
      CeilDiv(width, factor) != flags.width()) {
    throw ShapeError("pooled flag mask does not match target dimensions");
  }
  FlagMask out(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) out(i, j) = flags(i / factor, j / factor);
  }
  return out;
}

}  // namespace segaudit
