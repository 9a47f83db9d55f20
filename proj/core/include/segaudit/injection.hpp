#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "segaudit/grid.hpp"

namespace segaudit {

enum class ErrorType { kNone, kDrop, kSwap, kShift };
enum class MorphOp { kErode, kDilate };

std::string_view ToString(ErrorType type);  // "NONE", "DROP", ...
std::string_view ToString(MorphOp op);      // "erode" / "dilate"
ErrorType ParseErrorType(std::string_view text);  // case-insensitive
MorphOp ParseMorphOp(std::string_view text);

struct DropParams {
  ClassIndex dropped_class = 0;
  friend bool operator==(const DropParams&, const DropParams&) = default;
};
struct SwapParams {
  ClassIndex class_a = 0;
  ClassIndex class_b = 0;
  friend bool operator==(const SwapParams&, const SwapParams&) = default;
};
struct ShiftParams {
  ClassIndex shifted_class = 0;
  MorphOp op = MorphOp::kDilate;
  int radius = 1;
  friend bool operator==(const ShiftParams&, const ShiftParams&) = default;
};

using ErrorParams =
    std::variant<std::monostate, DropParams, SwapParams, ShiftParams>;

// Ground truth for one image. pixels_changed > 0 for every injected error.
struct ErrorLog {
  std::string image_id;
  ErrorType error_type = ErrorType::kNone;
  ErrorParams params;
  std::int64_t pixels_changed = 0;

  bool is_error() const { return error_type != ErrorType::kNone; }
  friend bool operator==(const ErrorLog&, const ErrorLog&) = default;
};

struct InjectionResult {
  AnnotatedMask labels;
  ErrorLog log;  // image_id left empty
};

// Pixels of `dropped_class` become `unlabeled_class`.
InjectionResult InjectDrop(const AnnotatedMask& labels, ClassIndex dropped_class,
                           ClassIndex unlabeled_class);

// Interchanges two classes; an involution.
InjectionResult InjectSwap(const AnnotatedMask& labels, ClassIndex class_a,
                           ClassIndex class_b);

// Morphological erosion or dilation of one class's binary mask with a disc of
// the given radius (offsets with dy^2 + dx^2 <= r^2). Dilation overwrites
// neighbours. Eroded pixels take the majority class among the nearest
// pixels not originally of that class (ties to the lowest index). Pixels
// outside the image count as part of the class for erosion.
// Throws DegenerateShiftError when nothing changes.
InjectionResult InjectShift(const AnnotatedMask& labels, ClassIndex shifted_class,
                            MorphOp op, int radius);

// Applies planned params to a clean mask; NONE returns the mask unchanged.
InjectionResult ApplyError(const AnnotatedMask& labels, const ErrorLog& planned,
                           ClassIndex unlabeled_class);

struct CorruptionPlan {
  ErrorType error_type = ErrorType::kDrop;
  double proportion = 0.2;
  std::uint64_t seed = 0;
  std::pair<int, int> shift_radius_range{3, 25};

  // Throws ValidationError on a malformed plan (type NONE, proportion outside
  // (0,1], bad radius range).
  void Validate() const;
};

// round-half-up(proportion * n)
std::size_t CorruptedImageCount(double proportion, std::size_t num_images);

// Sorted class indices present in `labels`.
std::vector<ClassIndex> ClassesPresent(const AnnotatedMask& labels);

struct CorruptionInput {
  std::vector<std::string> image_ids;
  // Sorted classes present per image, aligned with image_ids.
  std::vector<std::vector<ClassIndex>> classes_present;
  ClassIndex unlabeled_class = 0;
  // Loads the clean mask of image `index`; only called for Shift candidates.
  std::function<AnnotatedMask(std::size_t index)> load_mask;
};

// Seeded selection pass: picks round(proportion * N) distinct images and
// draws their error parameters. Returns one log per image (in input order)
// with pixels_changed still 0; ApplyError fills it in. Single-threaded and a
// pure function of (input, plan).
std::vector<ErrorLog> PlanCorruption(const CorruptionInput& input,
                                     const CorruptionPlan& plan);

struct DistanceTag {};
struct SetMaskTag {};
using BinaryMask = Grid<std::uint8_t, SetMaskTag>;
using SquaredDistanceMap = Grid<std::int64_t, DistanceTag>;
inline constexpr std::int64_t kNoSetPixel = INT64_MAX;

// Squared Euclidean distance from every pixel to the nearest nonzero pixel of
// `in_set` (exact separable lower-envelope transform). kNoSetPixel when the
// set is empty.
SquaredDistanceMap SquaredDistanceTransform(const BinaryMask& in_set);

}  // namespace segaudit
