#pragma once

#include <utility>
#include <vector>

#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit {

enum class Connectivity { kFour = 4, kEight = 8 };

// How per-component scores are pooled into an image score.
enum class ComponentPooling {
  // Unweighted mean over all components.
  kFlatMean,
  // Mean within each annotated class, then mean over those classes.
  kClassMean,
};

struct Component {
  std::vector<std::pair<int, int>> pixels;  // (row, col), scan order
  ClassIndex annotated_class = 0;
  ClassIndex predicted_class = 0;
  std::vector<double> mean_probs;  // p_c, filled by ScoreComponents
  double score = 0.0;              // s_c = p_c[annotated_class]
};

struct ComponentIdTag {};

// Component id per pixel plus the number of components. Ids are assigned in
// raster order of each component's first pixel.
struct ComponentLabels {
  Grid<int, ComponentIdTag> ids;
  int count = 0;
};

// Maximal connected regions of constant (predicted, annotated) pair.
ComponentLabels LabelComponents(const PredictedMask& predicted,
                                const AnnotatedMask& labels,
                                Connectivity connectivity = Connectivity::kFour);

// Component skeletons (pixels and class pair); mean_probs and score empty.
std::vector<Component> ExtractComponents(
    const PredictedMask& predicted, const AnnotatedMask& labels,
    Connectivity connectivity = Connectivity::kFour);

// Fills mean_probs and score for each component from `probs`.
void ScoreComponents(const ProbabilityMap& probs,
                     std::vector<Component>& components);

struct CocoOptions {
  Connectivity connectivity = Connectivity::kFour;
  ComponentPooling pooling = ComponentPooling::kFlatMean;
};

// CoCo image score over (already pooled) maps.
double CocoScore(const ProbabilityMap& probs, const PredictedMask& predicted,
                 const AnnotatedMask& labels, const CocoOptions& options = {});

}  // namespace segaudit
