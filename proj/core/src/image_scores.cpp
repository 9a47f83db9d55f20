#include "segaudit/image_scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "segaudit/pixel_scores.hpp"

namespace segaudit {

void SoftminParams::Validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("softmin temperature must be positive and finite, got " +
                          std::to_string(tau));
  }
}

std::vector<double> TccpParams::DefaultThresholds() {
  std::vector<double> thresholds;
  for (int step = 1; step <= 19; ++step) thresholds.push_back(step / 20.0);
  return thresholds;
}

void TccpParams::Validate() const {
  if (thresholds.empty()) {
    throw ValidationError("TCCP threshold set is empty");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t > 0.0 && t < 1.0)) {
      throw ValidationError("TCCP threshold " + std::to_string(t) +
                            " outside (0,1)");
    }
    if (i > 0 && !(thresholds[i - 1] < t)) {
      throw ValidationError("TCCP thresholds must be strictly increasing");
    }
  }
}

double CorrectlyClassifiedPixels(const PredictedMask& predicted,
                                 const AnnotatedMask& labels) {
  RequireSameShape(predicted, labels, "CCP");
  const auto p = predicted.values();
  const auto l = labels.values();
  std::int64_t agree = 0;
  for (std::size_t idx = 0; idx < p.size(); ++idx) agree += p[idx] == l[idx];
  return static_cast<double>(agree) / static_cast<double>(p.size());
}

double ThresholdedCcp(const ProbabilityMap& probs, const AnnotatedMask& labels,
                      const TccpParams& params) {
  RequireSameShape(probs, labels, "TCCP");
  RequireLabelsBelow(labels, probs.num_classes());
  params.Validate();

  const int num_classes = probs.num_classes();
  const std::size_t num_thresholds = params.thresholds.size();
  const std::size_t pixels = probs.num_pixels();
  const auto label_values = labels.values();
  const auto prob_values = probs.values();

  // counts[k * T + t]: pixels counted for class k at threshold t.
  std::vector<std::int64_t> counts(num_classes * num_thresholds, 0);
  for (std::size_t px = 0; px < pixels; ++px) {
    const ClassIndex label = label_values[px];
    const double* row = prob_values.data() + px * num_classes;
    for (int k = 0; k < num_classes; ++k) {
      const bool annotated = label == k;
      std::int64_t* class_counts = counts.data() + k * num_thresholds;
      for (std::size_t t = 0; t < num_thresholds; ++t) {
        const bool above = row[k] > params.thresholds[t];
        if (params.mode == TccpMode::kMembershipAgreement) {
          class_counts[t] += annotated == above;
        } else {
          class_counts[t] += annotated && above;
        }
      }
    }
  }

  double total = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    const std::int64_t* class_counts = counts.data() + k * num_thresholds;
    // max_element returns the first maximum, i.e. the smallest threshold.
    const std::int64_t best =
        *std::max_element(class_counts, class_counts + num_thresholds);
    total += static_cast<double>(best) / static_cast<double>(pixels);
  }
  return total / num_classes;
}

double ConfidenceInLabel(const PixelScoreMap& scores) {
  double sum = 0.0;
  for (double s : scores.values()) sum += s;
  return sum / static_cast<double>(scores.size());
}

double Softmin(const PixelScoreMap& scores, const SoftminParams& params) {
  params.Validate();
  const auto values = scores.values();
  const double min_score = *std::min_element(values.begin(), values.end());
  // Largest exponent (1 - min)/tau is shifted to zero.
  double weighted = 0.0;
  double normalizer = 0.0;
  for (double s : values) {
    const double w = std::exp((min_score - s) / params.tau);
    weighted += s * w;
    normalizer += w;
  }
  return weighted / normalizer;
}

double MeanIou(const PredictedMask& predicted, const AnnotatedMask& labels,
               int num_classes) {
  RequireSameShape(predicted, labels, "IoU");
  if (num_classes < 1) throw ValidationError("IoU needs at least one class");
  const auto p = predicted.values();
  const auto l = labels.values();
  std::vector<std::int64_t> intersection(num_classes, 0);
  std::vector<std::int64_t> predicted_count(num_classes, 0);
  std::vector<std::int64_t> annotated_count(num_classes, 0);
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    if (p[idx] < 0 || p[idx] >= num_classes || l[idx] < 0 ||
        l[idx] >= num_classes) {
      throw ValidationError("IoU: class index outside [0," +
                            std::to_string(num_classes) + ")");
    }
    ++predicted_count[p[idx]];
    ++annotated_count[l[idx]];
    if (p[idx] == l[idx]) ++intersection[p[idx]];
  }
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < num_classes; ++k) {
    const std::int64_t uni =
        predicted_count[k] + annotated_count[k] - intersection[k];
    if (uni == 0) continue;
    sum += static_cast<double>(intersection[k]) / static_cast<double>(uni);
    ++present;
  }
  return sum / present;
}

}  // namespace segaudit
