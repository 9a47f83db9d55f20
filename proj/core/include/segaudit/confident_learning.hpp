#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

inline constexpr int kDefaultPoolFactor = 4;

struct PooledImage {
  ProbabilityMap probs;
  AnnotatedMask labels;
};

// Pools factor x factor windows: probabilities are mean pooled (partial edge
// windows average what they cover) and renormalized; labels take the window's
// majority class with ties to the lowest index. Output is
// ceil(h/factor) x ceil(w/factor).
PooledImage Downsample(const ProbabilityMap& probs, const AnnotatedMask& labels,
                       int factor = kDefaultPoolFactor);

// Per-class confident-learning thresholds: t_k is the mean self-confidence of
// pooled pixels annotated k. Classes never annotated are left undefined and
// never enter the confident set.
struct ClassThresholds {
  std::vector<double> threshold;
  std::vector<bool> defined;

  int num_classes() const { return static_cast<int>(threshold.size()); }
};

// Streaming reduction behind ClassThresholdsOf. Add() is order-sensitive only
// in floating-point rounding; feed images in a fixed order for bit-identical
// output.
class ThresholdAccumulator {
 public:
  explicit ThresholdAccumulator(int num_classes);

  void Add(const ProbabilityMap& probs, const AnnotatedMask& labels);
  void Merge(const ThresholdAccumulator& other);
  ClassThresholds Finish() const;

  int num_classes() const { return static_cast<int>(sums_.size()); }

 private:
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
};

ClassThresholds ClassThresholdsOf(std::span<const PooledImage> dataset);

// b = 0 where the confident class (argmax over classes at or above their
// threshold) exists and differs from the annotation.
FlagMask FlagMaskOf(const ProbabilityMap& probs, const AnnotatedMask& labels,
                    const ClassThresholds& thresholds);

// Fraction of unflagged pixels; higher is better.
double ClcScore(const FlagMask& flags);

// Nearest-neighbour expansion of a pooled flag mask back to height x width.
FlagMask UpsampleFlags(const FlagMask& flags, int factor, int height,
                       int width);

}  // namespace segaudit
