#include "segaudit/probability_map.hpp"

#include <cmath>
#include <string>

#include "segaudit/errors.hpp"

namespace segaudit {

ProbabilityMap ProbabilityMap::FromValues(int height, int width,
                                          int num_classes,
                                          std::vector<double> values,
                                          double sum_tolerance) {
  if (height < 1 || width < 1 || num_classes < 1) {
    throw ShapeError("probability map dimensions must be positive, got " +
                     std::to_string(height) + "x" + std::to_string(width) +
                     "x" + std::to_string(num_classes));
  }
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  if (values.size() != pixels * num_classes) {
    throw ShapeError("probability map expects " +
                     std::to_string(pixels * num_classes) + " values, got " +
                     std::to_string(values.size()));
  }
  for (std::size_t px = 0; px < pixels; ++px) {
    double* row = values.data() + px * num_classes;
    double sum = 0.0;
    for (int k = 0; k < num_classes; ++k) {
      if (!std::isfinite(row[k]) || row[k] < 0.0 || row[k] > 1.0) {
        throw ValidationError("probability out of [0,1] at pixel " +
                              std::to_string(px) + " class " +
                              std::to_string(k));
      }
      sum += row[k];
    }
    if (!(std::abs(sum - 1.0) <= sum_tolerance)) {
      throw ValidationError("probabilities at pixel " + std::to_string(px) +
                            " sum to " + std::to_string(sum));
    }
    for (int k = 0; k < num_classes; ++k) row[k] /= sum;
  }

  ProbabilityMap map;
  map.height_ = height;
  map.width_ = width;
  map.num_classes_ = num_classes;
  map.values_ = std::move(values);
  return map;
}

}  // namespace segaudit
