#pragma once

// Naive reference implementations used as test oracles. Everything here works
// on plain vectors with straightforward loops and deliberately shares no code
// with the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace segaudit::reference {

struct RefImage {
  int h = 0;
  int w = 0;
  int k = 0;
  std::vector<double> p;  // h*w*k, class-last
  std::vector<int> l;     // h*w

  double prob(int i, int j, int c) const { return p[(i * w + j) * k + c]; }
  int label(int i, int j) const { return l[i * w + j]; }
};

inline int ArgmaxAt(const RefImage& img, int i, int j) {
  int best = 0;
  for (int c = 1; c < img.k; ++c) {
    if (img.prob(i, j, c) > img.prob(i, j, best)) best = c;
  }
  return best;
}

inline std::vector<int> Argmax(const RefImage& img) {
  std::vector<int> out(img.h * img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) out[i * img.w + j] = ArgmaxAt(img, i, j);
  return out;
}

inline std::vector<double> SelfConfidence(const RefImage& img) {
  std::vector<double> s(img.h * img.w);
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j) s[i * img.w + j] = img.prob(i, j, img.label(i, j));
  return s;
}

inline double Ccp(const RefImage& img) {
  const std::vector<int> pred = Argmax(img);
  int agree = 0;
  for (int i = 0; i < img.h; ++i)
    for (int j = 0; j < img.w; ++j)
      if (pred[i * img.w + j] == img.label(i, j)) ++agree;
  return static_cast<double>(agree) / (img.h * img.w);
}

// Membership-agreement TCCP, or the literal one-sided count when `literal`.
inline double Tccp(const RefImage& img, const std::vector<double>& thresholds,
                   bool literal = false) {
  double total = 0.0;
  for (int c = 0; c < img.k; ++c) {
    double best = -1.0;
    for (double t : thresholds) {
      int count = 0;
      for (int i = 0; i < img.h; ++i) {
        for (int j = 0; j < img.w; ++j) {
          const bool annotated = img.label(i, j) == c;
          const bool above = img.prob(i, j, c) > t;
          if (literal ? (annotated && above) : (annotated == above)) ++count;
        }
      }
      const double acc = static_cast<double>(count) / (img.h * img.w);
      if (acc > best) best = acc;
    }
    total += best;
  }
  return total / img.k;
}

inline double Cil(const std::vector<double>& s) {
  long double sum = 0;
  for (double v : s) sum += v;
  return static_cast<double>(sum / s.size());
}

// Direct evaluation without the max-shift; long double keeps exp() finite
// for tau down to ~1e-4.
inline double Softmin(const std::vector<double>& s, double tau) {
  long double num = 0, den = 0;
  for (double v : s) {
    const long double wgt = std::exp(static_cast<long double>(1.0 - v) / tau);
    num += v * wgt;
    den += wgt;
  }
  return static_cast<double>(num / den);
}

inline double Iou(const std::vector<int>& pred, const std::vector<int>& lab) {
  std::set<int> classes(pred.begin(), pred.end());
  classes.insert(lab.begin(), lab.end());
  double sum = 0.0;
  for (int c : classes) {
    int inter = 0, uni = 0;
    for (std::size_t px = 0; px < pred.size(); ++px) {
      const bool a = pred[px] == c, b = lab[px] == c;
      inter += a && b;
      uni += a || b;
    }
    sum += static_cast<double>(inter) / uni;
  }
  return sum / classes.size();
}

inline RefImage Downsample(const RefImage& img, int f) {
  RefImage out;
  out.h = (img.h + f - 1) / f;
  out.w = (img.w + f - 1) / f;
  out.k = img.k;
  out.p.assign(out.h * out.w * out.k, 0.0);
  out.l.assign(out.h * out.w, 0);
  for (int oi = 0; oi < out.h; ++oi) {
    for (int oj = 0; oj < out.w; ++oj) {
      std::vector<double> sum(img.k, 0.0);
      std::vector<int> votes(img.k, 0);
      int n = 0;
      for (int i = oi * f; i < std::min(img.h, oi * f + f); ++i) {
        for (int j = oj * f; j < std::min(img.w, oj * f + f); ++j) {
          for (int c = 0; c < img.k; ++c) sum[c] += img.prob(i, j, c);
          ++votes[img.label(i, j)];
          ++n;
        }
      }
      double row = 0.0;
      std::vector<double> mean(img.k);
      for (int c = 0; c < img.k; ++c) {
        mean[c] = sum[c] / n;
        row += mean[c];
      }
      for (int c = 0; c < img.k; ++c) out.p[(oi * out.w + oj) * out.k + c] = mean[c] / row;
      int best = 0;
      for (int c = 1; c < img.k; ++c)
        if (votes[c] > votes[best]) best = c;
      out.l[oi * out.w + oj] = best;
    }
  }
  return out;
}

struct RefThresholds {
  std::vector<double> t;
  std::vector<bool> defined;
};

inline RefThresholds Thresholds(const std::vector<RefImage>& pooled) {
  const int k = pooled.front().k;
  RefThresholds out{std::vector<double>(k, 0.0), std::vector<bool>(k, false)};
  for (int c = 0; c < k; ++c) {
    long double sum = 0;
    long long n = 0;
    for (const RefImage& img : pooled)
      for (int i = 0; i < img.h; ++i)
        for (int j = 0; j < img.w; ++j)
          if (img.label(i, j) == c) {
            sum += img.prob(i, j, c);
            ++n;
          }
    if (n > 0) {
      out.t[c] = static_cast<double>(sum / n);
      out.defined[c] = true;
    }
  }
  return out;
}

// Confident rule materialized per pixel: collect the confident set, then pick
// its argmax.
inline std::vector<int> Flags(const RefImage& img, const RefThresholds& th) {
  std::vector<int> b(img.h * img.w, 1);
  for (int i = 0; i < img.h; ++i) {
    for (int j = 0; j < img.w; ++j) {
      std::vector<int> confident;
      for (int c = 0; c < img.k; ++c)
        if (th.defined[c] && img.prob(i, j, c) >= th.t[c]) confident.push_back(c);
      if (confident.empty()) continue;
      int best = confident.front();
      for (int c : confident)
        if (img.prob(i, j, c) > img.prob(i, j, best)) best = c;
      if (best != img.label(i, j)) b[i * img.w + j] = 0;
    }
  }
  return b;
}

inline double Clc(const std::vector<int>& b) {
  int ones = 0;
  for (int v : b) ones += v;
  return static_cast<double>(ones) / b.size();
}

// Flood fill with an explicit stack; returns the component id grid.
inline std::vector<int> FloodFillComponents(const std::vector<int>& pred,
                                            const std::vector<int>& lab, int h,
                                            int w, bool eight = false,
                                            int* count = nullptr) {
  std::vector<int> id(h * w, -1);
  int next = 0;
  for (int s = 0; s < h * w; ++s) {
    if (id[s] >= 0) continue;
    std::vector<int> stack{s};
    id[s] = next;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int ci = cur / w, cj = cur % w;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (!eight && di != 0 && dj != 0) continue;
          const int ni = ci + di, nj = cj + dj;
          if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
          const int nb = ni * w + nj;
          if (id[nb] >= 0 || pred[nb] != pred[s] || lab[nb] != lab[s]) continue;
          id[nb] = next;
          stack.push_back(nb);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return id;
}

inline double Coco(const RefImage& pooled) {
  const std::vector<int> pred = Argmax(pooled);
  int count = 0;
  const std::vector<int> id =
      FloodFillComponents(pred, pooled.l, pooled.h, pooled.w, false, &count);
  double total = 0.0;
  for (int c = 0; c < count; ++c) {
    long double sum = 0;
    int n = 0, annotated = -1;
    for (int px = 0; px < pooled.h * pooled.w; ++px) {
      if (id[px] != c) continue;
      annotated = pooled.l[px];
      sum += pooled.p[px * pooled.k + annotated];
      ++n;
    }
    total += static_cast<double>(sum / n);
  }
  return total / count;
}

// O(N^2) pairwise AUROC with half credit for ties.
inline double PairwiseAuroc(const std::vector<std::pair<double, bool>>& items) {
  double credit = 0.0;
  long long pairs = 0;
  for (const auto& [se, e] : items) {
    if (!e) continue;
    for (const auto& [sc, c] : items) {
      if (c) continue;
      ++pairs;
      if (se < sc) credit += 1.0;
      else if (se == sc) credit += 0.5;
    }
  }
  return credit / pairs;
}

}  // namespace segaudit::reference
