#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace segaudit {

// Per-pixel class probabilities p[i][j][k], stored h x w x K (class-last).
//
// Every instance satisfies the simplex invariant: entries in [0,1] and each
// pixel row summing to 1 (rows are renormalized on construction after a
// tolerance check).
class ProbabilityMap {
 public:
  static constexpr double kDefaultSumTolerance = 1e-3;

  ProbabilityMap() = default;

  // Throws ShapeError on bad dimensions and ValidationError when a value is
  // non-finite, outside [0,1], or a row sum is farther than `sum_tolerance`
  // from 1.
  static ProbabilityMap FromValues(int height, int width, int num_classes,
                                   std::vector<double> values,
                                   double sum_tolerance = kDefaultSumTolerance);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }
  std::size_t num_pixels() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double operator()(int i, int j, int k) const {
    return values_[Offset(i, j) + k];
  }
  std::span<const double> pixel(int i, int j) const {
    return {values_.data() + Offset(i, j),
            static_cast<std::size_t>(num_classes_)};
  }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const ProbabilityMap&,
                         const ProbabilityMap&) = default;

 private:
  std::size_t Offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * width_ + j) * num_classes_;
  }

  int height_ = 0;
  int width_ = 0;
  int num_classes_ = 0;
  std::vector<double> values_;
};

}  // namespace segaudit
