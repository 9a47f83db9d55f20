#include "segaudit/components.hpp"

#include <map>
#include <numeric>

#include "segaudit/pixel_scores.hpp"

namespace segaudit {
namespace {

// Union-find with path halving; roots are always the smallest index in the
// set so that the relabel pass is deterministic.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void Unite(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

ComponentLabels LabelComponents(const PredictedMask& predicted,
                                const AnnotatedMask& labels,
                                Connectivity connectivity) {
  RequireSameShape(predicted, labels, "connected components");
  const int h = labels.height();
  const int w = labels.width();
  const auto index = [w](int i, int j) {
    return static_cast<std::size_t>(i) * w + j;
  };
  const auto same = [&](int i0, int j0, int i1, int j1) {
    return predicted(i0, j0) == predicted(i1, j1) &&
           labels(i0, j0) == labels(i1, j1);
  };

  DisjointSets sets(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      // Backward neighbours only; forward ones are visited later.
      if (j > 0 && same(i, j, i, j - 1)) sets.Unite(index(i, j), index(i, j - 1));
      if (i > 0 && same(i, j, i - 1, j)) sets.Unite(index(i, j), index(i - 1, j));
      if (connectivity == Connectivity::kEight && i > 0) {
        if (j > 0 && same(i, j, i - 1, j - 1)) {
          sets.Unite(index(i, j), index(i - 1, j - 1));
        }
        if (j + 1 < w && same(i, j, i - 1, j + 1)) {
          sets.Unite(index(i, j), index(i - 1, j + 1));
        }
      }
    }
  }

  ComponentLabels out{Grid<int, ComponentIdTag>(h, w, -1), 0};
  std::vector<int> root_id(static_cast<std::size_t>(h) * w, -1);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const std::size_t root = sets.Find(index(i, j));
      if (root_id[root] < 0) root_id[root] = out.count++;
      out.ids(i, j) = root_id[root];
    }
  }
  return out;
}

std::vector<Component> ExtractComponents(const PredictedMask& predicted,
                                         const AnnotatedMask& labels,
                                         Connectivity connectivity) {
  const ComponentLabels labeled =
      LabelComponents(predicted, labels, connectivity);
  std::vector<Component> components(labeled.count);
  for (int i = 0; i < labels.height(); ++i) {
    for (int j = 0; j < labels.width(); ++j) {
      Component& c = components[labeled.ids(i, j)];
      if (c.pixels.empty()) {
        c.annotated_class = labels(i, j);
        c.predicted_class = predicted(i, j);
      }
      c.pixels.emplace_back(i, j);
    }
  }
  return components;
}

void ScoreComponents(const ProbabilityMap& probs,
                     std::vector<Component>& components) {
  const int num_classes = probs.num_classes();
  for (Component& c : components) {
    if (c.annotated_class < 0 || c.annotated_class >= num_classes) {
      throw ValidationError("component annotated class " +
                            std::to_string(c.annotated_class) +
                            " outside [0," + std::to_string(num_classes) + ")");
    }
    c.mean_probs.assign(num_classes, 0.0);
    for (const auto& [i, j] : c.pixels) {
      const auto row = probs.pixel(i, j);
      for (int k = 0; k < num_classes; ++k) c.mean_probs[k] += row[k];
    }
    for (double& v : c.mean_probs) v /= static_cast<double>(c.pixels.size());
    c.score = c.mean_probs[c.annotated_class];
  }
}

double CocoScore(const ProbabilityMap& probs, const PredictedMask& predicted,
                 const AnnotatedMask& labels, const CocoOptions& options) {
  RequireSameShape(probs, labels, "CoCo");
  RequireLabelsBelow(labels, probs.num_classes());
  std::vector<Component> components =
      ExtractComponents(predicted, labels, options.connectivity);
  ScoreComponents(probs, components);

  if (options.pooling == ComponentPooling::kFlatMean) {
    double sum = 0.0;
    for (const Component& c : components) sum += c.score;
    return sum / static_cast<double>(components.size());
  }
  std::map<ClassIndex, std::pair<double, int>> per_class;
  for (const Component& c : components) {
    auto& [sum, count] = per_class[c.annotated_class];
    sum += c.score;
    ++count;
  }
  double total = 0.0;
  for (const auto& [cls, entry] : per_class) {
    total += entry.first / entry.second;
  }
  return total / static_cast<double>(per_class.size());
}

}  // namespace segaudit
