#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace segaudit {

// One image's label-quality score with its ground truth. Low score means
// "predicted mislabeled".
struct LabeledScore {
  std::string image_id;
  double score = 0.0;
  bool is_error = false;
};

// Exact non-negative rational; metrics that are ratios of counts are computed
// as Fractions first so identities between them hold exactly.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  Fraction operator*(const Fraction& other) const;
  // Value equality (cross-multiplication, 128-bit).
  bool operator==(const Fraction& other) const;
};

// Items ordered by ascending score, ties by image_id.
std::vector<LabeledScore> RankAscending(std::span<const LabeledScore> items);

// P(score of random error < score of random clean item), ties credited 1/2.
// Throws UndefinedMetricError unless both classes are present.
double Auroc(std::span<const LabeledScore> items);

// Average precision (step interpolation) over the ascending-score ranking.
double Auprc(std::span<const LabeledScore> items);

// Errors among the T lowest-scored items, divided by T. 1 <= T <= N.
Fraction PrecisionAtTRatio(std::span<const LabeledScore> items, std::size_t top);
double PrecisionAtT(std::span<const LabeledScore> items, std::size_t top);

// PrecisionAtT / (E/N). Throws UndefinedMetricError when E == 0.
Fraction LiftAtTRatio(std::span<const LabeledScore> items, std::size_t top);
double LiftAtT(std::span<const LabeledScore> items, std::size_t top);

// Error prevalence E/N.
Fraction Prevalence(std::span<const LabeledScore> items);

struct DetectionMetrics {
  double auroc = 0.0;
  double auprc = 0.0;
  double lift_at_errors = 0.0;      // T = E
  double lift_at_100 = 0.0;         // T = min(100, N)
  double precision_at_errors = 0.0;
  double precision_at_100 = 0.0;
  std::size_t num_items = 0;
  std::size_t num_errors = 0;
};

DetectionMetrics EvaluateDetection(std::span<const LabeledScore> items);

}  // namespace segaudit
