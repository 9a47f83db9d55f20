#pragma once

#include <vector>

#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

struct SoftminParams {
  double tau = 0.1;

  void Validate() const;
};

enum class TccpMode {
  // acc_k(t) = mean over pixels of [(l == k) <=> (p_k > t)].
  kMembershipAgreement,
  // acc_k(t) = #{l == k and p_k > t} / (h*w), as the formula is printed.
  // Always selects the smallest threshold.
  kLiteral,
};

struct TccpParams {
  // Strictly increasing, all inside (0,1).
  std::vector<double> thresholds = DefaultThresholds();
  TccpMode mode = TccpMode::kMembershipAgreement;

  // {0.05, 0.10, ..., 0.95}
  static std::vector<double> DefaultThresholds();
  void Validate() const;
};

// Fraction of pixels whose prediction equals the annotation.
double CorrectlyClassifiedPixels(const PredictedMask& predicted,
                                 const AnnotatedMask& labels);

// Mean over classes of the per-class accuracy at that class's best
// threshold. Thresholds are selected per image; ties go to the smallest.
double ThresholdedCcp(const ProbabilityMap& probs, const AnnotatedMask& labels,
                      const TccpParams& params = {});

// Mean of the pixel scores.
double ConfidenceInLabel(const PixelScoreMap& scores);

// Weighted mean of pixel scores with weights exp((1 - s)/tau), normalized.
// Interpolates between min(s) (tau -> 0) and mean(s) (tau -> inf).
double Softmin(const PixelScoreMap& scores, const SoftminParams& params = {});

// Per-class Jaccard index averaged over classes present in either mask.
double MeanIou(const PredictedMask& predicted, const AnnotatedMask& labels,
               int num_classes);

}  // namespace segaudit
