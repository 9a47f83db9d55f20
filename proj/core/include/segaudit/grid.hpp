#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segaudit/errors.hpp"

namespace segaudit {

// Row-major h x w grid. The Tag parameter keeps semantically different grids
// (annotated vs predicted labels, scores vs flags) from mixing silently.
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width) {
    if (height < 1 || width < 1) {
      throw ShapeError("grid dimensions must be positive, got " +
                       std::to_string(height) + "x" + std::to_string(width));
    }
    values_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  Grid(int height, int width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height < 1 || width < 1 ||
        values_.size() != static_cast<std::size_t>(height) * width) {
      throw ShapeError("grid of " + std::to_string(height) + "x" +
                       std::to_string(width) + " given " +
                       std::to_string(values_.size()) + " values");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  T& operator()(int i, int j) {
    return values_[static_cast<std::size_t>(i) * width_ + j];
  }
  const T& operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * width_ + j];
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool SameShape(int height, int width) const {
    return height_ == height && width_ == width;
  }
  template <typename U, typename OtherTag>
  bool SameShape(const Grid<U, OtherTag>& other) const {
    return SameShape(other.height(), other.width());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

using ClassIndex = std::int32_t;

struct AnnotatedTag {};
struct PredictedTag {};
struct ScoreTag {};
struct FlagTag {};

// l: annotated class per pixel.
using AnnotatedMask = Grid<ClassIndex, AnnotatedTag>;
// P: argmax class per pixel.
using PredictedMask = Grid<ClassIndex, PredictedTag>;
// s: annotated-class likelihood per pixel.
using PixelScoreMap = Grid<double, ScoreTag>;
// b: 0 where a pixel is flagged as likely mislabeled, 1 otherwise.
using FlagMask = Grid<std::uint8_t, FlagTag>;

template <typename A, typename B>
void RequireSameShape(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

}  // namespace segaudit
