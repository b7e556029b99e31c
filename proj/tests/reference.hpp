#pragma once

// Independent scalar reference implementations shared by the unit tests and
// the acceptance runner.

#include <cmath>
#include <cstddef>
#include <vector>

namespace gknet::testing {

struct ScalarAdam {
  double lr, b1, b2, eps;
  double m = 0, v = 0;
  int t = 0;
  double step(double w, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return w - lr * mh / (std::sqrt(vh) + eps);
  }
};

struct ScalarRmsProp {
  double lr, rho, eps;
  double s = 0;
  double step(double w, double g) {
    s = rho * s + (1 - rho) * g * g;
    return w - lr * g / (std::sqrt(s) + eps);
  }
};

/// Gradient of the quadratic 0.5 * 3 * (w - 1.5)^2.
inline double quad_grad(double w) { return 3.0 * (w - 1.5); }

struct CountedMetrics {
  double precision, recall, f1;
  std::size_t support;
};

/// One-vs-rest metrics by direct counting over the label vectors.
inline std::vector<CountedMetrics> count_metrics(const std::vector<int>& truth, const std::vector<int>& pred,
                                                 int classes) {
  std::vector<CountedMetrics> out;
  for (int c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0;
    std::size_t support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c) ++support;
      if (truth[i] == c && pred[i] == c) ++tp;
      if (truth[i] != c && pred[i] == c) ++fp;
      if (truth[i] == c && pred[i] != c) ++fn;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    out.push_back({p, r, f, support});
  }
  return out;
}

inline double counted_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace gknet::testing
