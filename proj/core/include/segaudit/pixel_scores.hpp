#pragma once

#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

// P[i][j] = argmax_k p[i][j][k]; ties go to the lowest class index.
PredictedMask PredictedMaskOf(const ProbabilityMap& probs);

// s[i][j] = p[i][j][l[i][j]], the model likelihood of the annotated class.
PixelScoreMap SelfConfidence(const ProbabilityMap& probs,
                             const AnnotatedMask& labels);

// Throws ValidationError if any label is outside [0, num_classes).
void RequireLabelsBelow(const AnnotatedMask& labels, int num_classes);

}  // namespace segaudit
