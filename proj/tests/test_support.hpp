#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "reference/naive_reference.hpp"
#include "segaudit/grid.hpp"
#include "segaudit/probability_map.hpp"

namespace segaudit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("segaudit_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline AnnotatedMask MaskFrom(const std::vector<std::vector<int>>& rows) {
  AnnotatedMask mask(static_cast<int>(rows.size()),
                     static_cast<int>(rows.front().size()));
  for (int i = 0; i < mask.height(); ++i)
    for (int j = 0; j < mask.width(); ++j) mask(i, j) = rows[i][j];
  return mask;
}

inline PredictedMask PredictedFrom(const std::vector<std::vector<int>>& rows) {
  const AnnotatedMask m = MaskFrom(rows);
  return PredictedMask(m.height(), m.width(),
                       std::vector<ClassIndex>(m.values().begin(), m.values().end()));
}

// Random instance: Dirichlet-ish rows from exponential draws, labels that
// agree with the argmax most of the time so that every score is exercised.
inline reference::RefImage RandomRefImage(std::mt19937_64& rng, int h, int w,
                                          int k) {
  reference::RefImage img;
  img.h = h;
  img.w = w;
  img.k = k;
  img.p.resize(static_cast<std::size_t>(h) * w * k);
  img.l.resize(static_cast<std::size_t>(h) * w);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> cls(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Blocky base labels so that components have some size.
  const int block = 1 + static_cast<int>(rng() % 4);
  std::vector<int> base((h / block + 1) * (w / block + 1));
  for (int& v : base) v = cls(rng);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int truth = base[(i / block) * (w / block + 1) + j / block];
      double sum = 0.0;
      for (int c = 0; c < k; ++c) {
        double v = expo(rng);
        if (c == truth) v += 2.0 * expo(rng);
        img.p[(i * w + j) * k + c] = v;
        sum += v;
      }
      for (int c = 0; c < k; ++c) img.p[(i * w + j) * k + c] /= sum;
      img.l[i * w + j] = unit(rng) < 0.8 ? truth : cls(rng);
    }
  }
  return img;
}

inline ProbabilityMap ToMap(const reference::RefImage& img) {
  return ProbabilityMap::FromValues(img.h, img.w, img.k, img.p);
}

inline AnnotatedMask ToMask(const reference::RefImage& img) {
  return AnnotatedMask(img.h, img.w,
                       std::vector<ClassIndex>(img.l.begin(), img.l.end()));
}

// The library renormalizes rows on construction; mirror that so both sides
// see identical inputs.
inline reference::RefImage FromMap(const ProbabilityMap& probs,
                                   const AnnotatedMask& labels) {
  reference::RefImage img;
  img.h = probs.height();
  img.w = probs.width();
  img.k = probs.num_classes();
  img.p.assign(probs.values().begin(), probs.values().end());
  img.l.assign(labels.values().begin(), labels.values().end());
  return img;
}

// Random instance in both representations. The reference copy is read back
// from the constructed map, so both sides see bit-identical probabilities.
struct Instance {
  ProbabilityMap probs;
  AnnotatedMask labels;
  reference::RefImage ref;
};

inline Instance RandomInstance(std::mt19937_64& rng, int h, int w, int k) {
  const reference::RefImage raw = RandomRefImage(rng, h, w, k);
  Instance out{ToMap(raw), ToMask(raw), {}};
  out.ref = FromMap(out.probs, out.labels);
  return out;
}

inline ProbabilityMap UniformRowsExcept(int h, int w, int k,
                                        const std::vector<double>& row) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(h) * w * k);
  for (int px = 0; px < h * w; ++px) values.insert(values.end(), row.begin(), row.end());
  return ProbabilityMap::FromValues(h, w, k, std::move(values));
}

}  // namespace segaudit::testing
