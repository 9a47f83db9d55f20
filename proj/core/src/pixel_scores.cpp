#include "segaudit/pixel_scores.hpp"

#include <string>

namespace segaudit {

PredictedMask PredictedMaskOf(const ProbabilityMap& probs) {
  PredictedMask predicted(probs.height(), probs.width());
  for (int i = 0; i < probs.height(); ++i) {
    for (int j = 0; j < probs.width(); ++j) {
      const auto row = probs.pixel(i, j);
      ClassIndex best = 0;
      for (int k = 1; k < probs.num_classes(); ++k) {
        if (row[k] > row[best]) best = k;
      }
      predicted(i, j) = best;
    }
  }
  return predicted;
}

void RequireLabelsBelow(const AnnotatedMask& labels, int num_classes) {
  for (int i = 0; i < labels.height(); ++i) {
    for (int j = 0; j < labels.width(); ++j) {
      const ClassIndex label = labels(i, j);
      if (label < 0 || label >= num_classes) {
        throw ValidationError("label " + std::to_string(label) + " at (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              ") outside [0," + std::to_string(num_classes) +
                              ")");
      }
    }
  }
}

PixelScoreMap SelfConfidence(const ProbabilityMap& probs,
                             const AnnotatedMask& labels) {
  RequireSameShape(probs, labels, "self-confidence");
  RequireLabelsBelow(labels, probs.num_classes());
  PixelScoreMap scores(probs.height(), probs.width());
  for (int i = 0; i < probs.height(); ++i) {
    for (int j = 0; j < probs.width(); ++j) {
      scores(i, j) = probs(i, j, labels(i, j));
    }
  }
  return scores;
}

}  // namespace segaudit
