#include "segaudit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "segaudit/errors.hpp"

namespace segaudit {
namespace {

std::size_t CountErrors(std::span<const LabeledScore> items) {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(),
                    [](const LabeledScore& s) { return s.is_error; }));
}

void RequireFinite(std::span<const LabeledScore> items) {
  for (const LabeledScore& s : items) {
    if (!std::isfinite(s.score)) {
      throw ValidationError("non-finite score for image '" + s.image_id + "'");
    }
  }
}

void RequireTop(std::span<const LabeledScore> items, std::size_t top) {
  if (top < 1 || top > items.size()) {
    throw ValidationError("T must be in [1, " + std::to_string(items.size()) +
                          "], got " + std::to_string(top));
  }
}

std::int64_t ErrorsInTop(std::span<const LabeledScore> items, std::size_t top) {
  const std::vector<LabeledScore> ranked = RankAscending(items);
  std::int64_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) hits += ranked[r].is_error;
  return hits;
}

}  // namespace

Fraction Fraction::operator*(const Fraction& other) const {
  return {num * other.num, den * other.den};
}

bool Fraction::operator==(const Fraction& other) const {
  return static_cast<__int128>(num) * other.den ==
         static_cast<__int128>(other.num) * den;
}

std::vector<LabeledScore> RankAscending(std::span<const LabeledScore> items) {
  std::vector<LabeledScore> ranked(items.begin(), items.end());
  std::sort(ranked.begin(), ranked.end(),
            [](const LabeledScore& a, const LabeledScore& b) {
              if (a.score != b.score) return a.score < b.score;
              return a.image_id < b.image_id;
            });
  return ranked;
}

double Auroc(std::span<const LabeledScore> items) {
  RequireFinite(items);
  const std::size_t errors = CountErrors(items);
  const std::size_t clean = items.size() - errors;
  if (errors == 0 || clean == 0) {
    throw UndefinedMetricError("AUROC needs both error and clean items");
  }
  std::vector<LabeledScore> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) {
              return a.score < b.score;
            });
  // Twice the Mann-Whitney U for "error below clean", kept integral.
  std::int64_t twice_u = 0;
  std::int64_t errors_below = 0;
  for (std::size_t start = 0; start < sorted.size();) {
    std::size_t end = start;
    std::int64_t group_errors = 0;
    std::int64_t group_clean = 0;
    while (end < sorted.size() && sorted[end].score == sorted[start].score) {
      (sorted[end].is_error ? group_errors : group_clean) += 1;
      ++end;
    }
    twice_u += group_clean * (2 * errors_below + group_errors);
    errors_below += group_errors;
    start = end;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(errors) * static_cast<double>(clean));
}

double Auprc(std::span<const LabeledScore> items) {
  RequireFinite(items);
  const std::size_t errors = CountErrors(items);
  if (errors == 0) throw UndefinedMetricError("AUPRC needs at least one error");
  const std::vector<LabeledScore> ranked = RankAscending(items);
  double sum = 0.0;
  std::int64_t hits = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (!ranked[r].is_error) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(errors);
}

Fraction PrecisionAtTRatio(std::span<const LabeledScore> items,
                           std::size_t top) {
  RequireFinite(items);
  RequireTop(items, top);
  return {ErrorsInTop(items, top), static_cast<std::int64_t>(top)};
}

double PrecisionAtT(std::span<const LabeledScore> items, std::size_t top) {
  return PrecisionAtTRatio(items, top).value();
}

Fraction Prevalence(std::span<const LabeledScore> items) {
  if (items.empty()) throw UndefinedMetricError("prevalence of an empty set");
  return {static_cast<std::int64_t>(CountErrors(items)),
          static_cast<std::int64_t>(items.size())};
}

Fraction LiftAtTRatio(std::span<const LabeledScore> items, std::size_t top) {
  const Fraction precision = PrecisionAtTRatio(items, top);
  const Fraction prevalence = Prevalence(items);
  if (prevalence.num == 0) {
    throw UndefinedMetricError("lift is undefined without errors");
  }
  return {precision.num * prevalence.den, precision.den * prevalence.num};
}

double LiftAtT(std::span<const LabeledScore> items, std::size_t top) {
  return LiftAtTRatio(items, top).value();
}

DetectionMetrics EvaluateDetection(std::span<const LabeledScore> items) {
  DetectionMetrics m;
  m.num_items = items.size();
  m.num_errors = CountErrors(items);
  m.auroc = Auroc(items);
  m.auprc = Auprc(items);
  const std::size_t top_100 = std::min<std::size_t>(100, items.size());
  m.precision_at_errors = PrecisionAtT(items, m.num_errors);
  m.lift_at_errors = LiftAtT(items, m.num_errors);
  m.precision_at_100 = PrecisionAtT(items, top_100);
  m.lift_at_100 = LiftAtT(items, top_100);
  return m;
}

}  // namespace segaudit
