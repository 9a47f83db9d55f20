#include "segaudit/injection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "segaudit/random.hpp"

namespace segaudit {
namespace {

constexpr int kMaxShiftAttempts = 16;

std::string Lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::int64_t CountChanged(const AnnotatedMask& before,
                          const AnnotatedMask& after) {
  std::int64_t changed = 0;
  const auto a = before.values();
  const auto b = after.values();
  for (std::size_t i = 0; i < a.size(); ++i) changed += a[i] != b[i];
  return changed;
}

std::int64_t CountClass(const AnnotatedMask& labels, ClassIndex cls) {
  return std::count(labels.values().begin(), labels.values().end(), cls);
}

void RequirePresent(const AnnotatedMask& labels, ClassIndex cls) {
  if (CountClass(labels, cls) == 0) {
    throw ClassNotPresentError("class " + std::to_string(cls) +
                               " not present in mask");
  }
}

// Lower envelope of parabolas for one line; f and d may alias.
void DistanceTransform1d(std::vector<std::int64_t>& f,
                         std::vector<int>& sites,
                         std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kNoSetPixel) continue;
    const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
    if (k < 0) {
      k = 0;
      sites[0] = q;
      bounds[0] = -std::numeric_limits<double>::infinity();
      bounds[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    while (true) {
      const int v = sites[k];
      const double fv = static_cast<double>(f[v]) + static_cast<double>(v) * v;
      const double s = (fq - fv) / (2.0 * (q - v));
      if (s <= bounds[k]) {
        --k;  // bounds[0] is -inf, so k stays >= 0
        continue;
      }
      ++k;
      sites[k] = q;
      bounds[k] = s;
      bounds[k + 1] = std::numeric_limits<double>::infinity();
      break;
    }
  }
  if (k < 0) return;  // no finite sites; line stays at kNoSetPixel

  std::vector<std::int64_t> out(n);
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (bounds[j + 1] < q) ++j;
    const std::int64_t dq = q - sites[j];
    out[q] = dq * dq + f[sites[j]];
  }
  f = std::move(out);
}

}  // namespace

std::string_view ToString(ErrorType type) {
  switch (type) {
    case ErrorType::kNone: return "NONE";
    case ErrorType::kDrop: return "DROP";
    case ErrorType::kSwap: return "SWAP";
    case ErrorType::kShift: return "SHIFT";
  }
  return "NONE";
}

std::string_view ToString(MorphOp op) {
  return op == MorphOp::kErode ? "erode" : "dilate";
}

ErrorType ParseErrorType(std::string_view text) {
  const std::string lower = Lower(text);
  if (lower == "none") return ErrorType::kNone;
  if (lower == "drop") return ErrorType::kDrop;
  if (lower == "swap") return ErrorType::kSwap;
  if (lower == "shift") return ErrorType::kShift;
  throw ValidationError("unknown error type '" + std::string(text) + "'");
}

MorphOp ParseMorphOp(std::string_view text) {
  const std::string lower = Lower(text);
  if (lower == "erode") return MorphOp::kErode;
  if (lower == "dilate") return MorphOp::kDilate;
  throw ValidationError("unknown morphological op '" + std::string(text) + "'");
}

SquaredDistanceMap SquaredDistanceTransform(const BinaryMask& in_set) {
  const int h = in_set.height();
  const int w = in_set.width();
  SquaredDistanceMap dist(h, w, kNoSetPixel);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (in_set(i, j) != 0) dist(i, j) = 0;
    }
  }
  const int n = std::max(h, w);
  std::vector<int> sites(n);
  std::vector<double> bounds(n + 1);
  std::vector<std::int64_t> line;

  for (int j = 0; j < w; ++j) {
    line.resize(h);
    for (int i = 0; i < h; ++i) line[i] = dist(i, j);
    DistanceTransform1d(line, sites, bounds);
    for (int i = 0; i < h; ++i) dist(i, j) = line[i];
  }
  for (int i = 0; i < h; ++i) {
    line.resize(w);
    for (int j = 0; j < w; ++j) line[j] = dist(i, j);
    DistanceTransform1d(line, sites, bounds);
    for (int j = 0; j < w; ++j) dist(i, j) = line[j];
  }
  return dist;
}

InjectionResult InjectDrop(const AnnotatedMask& labels, ClassIndex dropped_class,
                           ClassIndex unlabeled_class) {
  if (dropped_class == unlabeled_class) {
    throw ValidationError("cannot drop the unlabeled class");
  }
  RequirePresent(labels, dropped_class);
  AnnotatedMask out = labels;
  std::int64_t changed = 0;
  for (ClassIndex& v : out.values()) {
    if (v == dropped_class) {
      v = unlabeled_class;
      ++changed;
    }
  }
  return {std::move(out),
          ErrorLog{{}, ErrorType::kDrop, DropParams{dropped_class}, changed}};
}

InjectionResult InjectSwap(const AnnotatedMask& labels, ClassIndex class_a,
                           ClassIndex class_b) {
  if (class_a == class_b) throw ValidationError("swap needs two distinct classes");
  RequirePresent(labels, class_a);
  RequirePresent(labels, class_b);
  AnnotatedMask out = labels;
  std::int64_t changed = 0;
  for (ClassIndex& v : out.values()) {
    if (v == class_a) {
      v = class_b;
      ++changed;
    } else if (v == class_b) {
      v = class_a;
      ++changed;
    }
  }
  return {std::move(out), ErrorLog{{}, ErrorType::kSwap,
                                   SwapParams{class_a, class_b}, changed}};
}

InjectionResult InjectShift(const AnnotatedMask& labels, ClassIndex shifted_class,
                            MorphOp op, int radius) {
  if (radius < 1) {
    throw ValidationError("shift radius must be >= 1, got " +
                          std::to_string(radius));
  }
  RequirePresent(labels, shifted_class);
  const int h = labels.height();
  const int w = labels.width();
  const std::int64_t reach = static_cast<std::int64_t>(radius) * radius;

  AnnotatedMask out = labels;
  if (op == MorphOp::kDilate) {
    BinaryMask member(h, w);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) member(i, j) = labels(i, j) == shifted_class;
    }
    const SquaredDistanceMap dist = SquaredDistanceTransform(member);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (dist(i, j) <= reach) out(i, j) = shifted_class;
      }
    }
  } else {
    BinaryMask outside(h, w);
    ClassIndex max_label = 0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        outside(i, j) = labels(i, j) != shifted_class;
        max_label = std::max(max_label, labels(i, j));
      }
    }
    const SquaredDistanceMap dist = SquaredDistanceTransform(outside);
    std::vector<int> votes(static_cast<std::size_t>(max_label) + 1);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const std::int64_t d2 = dist(i, j);
        if (labels(i, j) != shifted_class || d2 > reach) continue;
        // Exposed pixel: vote among the non-class pixels exactly at the
        // nearest distance.
        std::fill(votes.begin(), votes.end(), 0);
        const int dy_max = static_cast<int>(std::sqrt(static_cast<double>(d2)));
        for (int dy = -dy_max - 1; dy <= dy_max + 1; ++dy) {
          const std::int64_t rem = d2 - static_cast<std::int64_t>(dy) * dy;
          if (rem < 0) continue;
          int dx = static_cast<int>(std::llround(std::sqrt(static_cast<double>(rem))));
          if (static_cast<std::int64_t>(dx) * dx != rem) continue;
          for (int sign : {1, -1}) {
            if (sign < 0 && dx == 0) break;
            const int ni = i + dy;
            const int nj = j + sign * dx;
            if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
            const ClassIndex neighbour = labels(ni, nj);
            if (neighbour != shifted_class) ++votes[neighbour];
          }
        }
        out(i, j) = static_cast<ClassIndex>(
            std::max_element(votes.begin(), votes.end()) - votes.begin());
      }
    }
  }

  const std::int64_t changed = CountChanged(labels, out);
  if (changed == 0) {
    throw DegenerateShiftError(std::string(ToString(op)) + " of class " +
                               std::to_string(shifted_class) + " with radius " +
                               std::to_string(radius) + " changed no pixels");
  }
  return {std::move(out),
          ErrorLog{{}, ErrorType::kShift,
                   ShiftParams{shifted_class, op, radius}, changed}};
}

InjectionResult ApplyError(const AnnotatedMask& labels, const ErrorLog& planned,
                           ClassIndex unlabeled_class) {
  InjectionResult result;
  switch (planned.error_type) {
    case ErrorType::kNone:
      result = {labels, ErrorLog{{}, ErrorType::kNone, std::monostate{}, 0}};
      break;
    case ErrorType::kDrop: {
      const auto& p = std::get<DropParams>(planned.params);
      result = InjectDrop(labels, p.dropped_class, unlabeled_class);
      break;
    }
    case ErrorType::kSwap: {
      const auto& p = std::get<SwapParams>(planned.params);
      result = InjectSwap(labels, p.class_a, p.class_b);
      break;
    }
    case ErrorType::kShift: {
      const auto& p = std::get<ShiftParams>(planned.params);
      result = InjectShift(labels, p.shifted_class, p.op, p.radius);
      break;
    }
  }
  result.log.image_id = planned.image_id;
  return result;
}

void CorruptionPlan::Validate() const {
  if (error_type == ErrorType::kNone) {
    throw ValidationError("corruption plan needs an error type");
  }
  if (!(proportion > 0.0 && proportion <= 1.0)) {
    throw ValidationError("proportion must be in (0,1], got " +
                          std::to_string(proportion));
  }
  if (shift_radius_range.first < 1 ||
      shift_radius_range.second < shift_radius_range.first) {
    throw ValidationError("shift radius range must satisfy 1 <= min <= max");
  }
}

std::size_t CorruptedImageCount(double proportion, std::size_t num_images) {
  return static_cast<std::size_t>(
      std::floor(proportion * static_cast<double>(num_images) + 0.5));
}

std::vector<ClassIndex> ClassesPresent(const AnnotatedMask& labels) {
  std::vector<ClassIndex> classes(labels.values().begin(),
                                  labels.values().end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

std::vector<ErrorLog> PlanCorruption(const CorruptionInput& input,
                                     const CorruptionPlan& plan) {
  plan.Validate();
  const std::size_t n = input.image_ids.size();
  if (input.classes_present.size() != n) {
    throw ShapeError("class presence list does not match image list");
  }
  const std::size_t target = CorruptedImageCount(plan.proportion, n);
  if (target < 1) {
    throw InfeasiblePlanError("proportion " + std::to_string(plan.proportion) +
                              " of " + std::to_string(n) +
                              " images rounds to zero");
  }

  std::vector<ErrorLog> logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i].image_id = input.image_ids[i];

  SeededRng rng(plan.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.Shuffle(std::span<std::size_t>(order));

  const auto pick = [&rng](const std::vector<ClassIndex>& from) {
    return from[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(from.size()) - 1))];
  };

  std::size_t chosen = 0;
  for (std::size_t idx : order) {
    if (chosen == target) break;
    std::vector<ClassIndex> eligible;
    for (ClassIndex c : input.classes_present[idx]) {
      if (c != input.unlabeled_class) eligible.push_back(c);
    }
    ErrorLog& log = logs[idx];
    switch (plan.error_type) {
      case ErrorType::kDrop:
        if (eligible.empty()) continue;
        log.error_type = ErrorType::kDrop;
        log.params = DropParams{pick(eligible)};
        break;
      case ErrorType::kSwap: {
        if (eligible.size() < 2) continue;
        const ClassIndex a = pick(eligible);
        std::erase(eligible, a);
        const ClassIndex b = pick(eligible);
        log.error_type = ErrorType::kSwap;
        log.params = SwapParams{a, b};
        break;
      }
      case ErrorType::kShift: {
        if (eligible.empty()) continue;
        const AnnotatedMask labels = input.load_mask(idx);
        bool placed = false;
        for (int attempt = 0; attempt < kMaxShiftAttempts && !placed; ++attempt) {
          const ClassIndex cls = pick(eligible);
          const MorphOp op = rng.Coin() ? MorphOp::kErode : MorphOp::kDilate;
          const int radius = static_cast<int>(rng.UniformInt(
              plan.shift_radius_range.first, plan.shift_radius_range.second));
          try {
            InjectShift(labels, cls, op, radius);
          } catch (const DegenerateShiftError&) {
            continue;
          }
          log.error_type = ErrorType::kShift;
          log.params = ShiftParams{cls, op, radius};
          placed = true;
        }
        if (!placed) continue;
        break;
      }
      case ErrorType::kNone:
        break;
    }
    ++chosen;
  }
  if (chosen < target) {
    throw InfeasiblePlanError("only " + std::to_string(chosen) + " of " +
                              std::to_string(target) +
                              " requested images can receive a " +
                              std::string(ToString(plan.error_type)) + " error");
  }
  return logs;
}

}  // namespace segaudit
