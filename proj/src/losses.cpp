#include "gknet/losses.hpp"

#include <algorithm>
#include <cmath>

namespace gknet {

namespace {

void require_match(const Tensor& predicted, const Tensor& target) {
  if (predicted.shape() != target.shape()) {
    throw ShapeError("loss: predicted " + shape_string(predicted.shape()) + " vs target " +
                     shape_string(target.shape()));
  }
}

double rows(const Tensor& t) { return static_cast<double>(t.rank() >= 2 ? t.extent(0) : 1); }

}  // namespace

LossKind parse_loss(std::string_view name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "mae") return LossKind::kMae;
  if (name == "upper_bound") return LossKind::kUpperBound;
  if (name == "cce" || name == "categorical_cross_entropy") return LossKind::kCategoricalCrossEntropy;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::kMae: return "mae";
    case LossKind::kUpperBound: return "upper_bound";
    case LossKind::kCategoricalCrossEntropy: return "categorical_cross_entropy";
  }
  return "mse";
}

double loss(LossKind kind, const Tensor& predicted, const Tensor& target) {
  require_match(predicted, target);
  auto x = predicted.data();
  auto y = target.data();
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  switch (kind) {
    case LossKind::kMse:
      for (std::size_t i = 0; i < x.size(); ++i) acc += (y[i] - x[i]) * (y[i] - x[i]);
      return acc / n;
    case LossKind::kMae:
      for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(y[i] - x[i]);
      return acc / n;
    case LossKind::kUpperBound:
      for (std::size_t i = 0; i < x.size(); ++i) acc += std::max({1.0 - x[i], y[i], 0.0});
      return acc / n;
    case LossKind::kCategoricalCrossEntropy:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] != 0.0) acc -= y[i] * std::log(std::clamp(x[i], kProbabilityFloor, 1.0));
      }
      return acc / rows(predicted);
  }
  return acc;
}

Tensor loss_gradient(LossKind kind, const Tensor& predicted, const Tensor& target) {
  require_match(predicted, target);
  Tensor grad(predicted.shape());
  auto g = grad.data();
  auto x = predicted.data();
  auto y = target.data();
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case LossKind::kMse:
        g[i] = 2.0 * (x[i] - y[i]) / n;
        break;
      case LossKind::kMae:
        g[i] = x[i] > y[i] ? 1.0 / n : (x[i] < y[i] ? -1.0 / n : 0.0);
        break;
      case LossKind::kUpperBound: {
        const double lead = 1.0 - x[i];
        g[i] = (lead > y[i] && lead > 0.0) ? -1.0 / n : 0.0;
        break;
      }
      case LossKind::kCategoricalCrossEntropy:
        g[i] = x[i] < kProbabilityFloor ? 0.0 : -y[i] / (x[i] * rows(predicted));
        break;
    }
  }
  return grad;
}

Tensor softmax_cross_entropy_logit_gradient(const Tensor& probabilities, const Tensor& target) {
  require_match(probabilities, target);
  return scale(sub(probabilities, target), 1.0 / rows(probabilities));
}

Tensor one_hot(std::span<const int> labels, std::size_t classes) {
  Tensor out({std::max<std::size_t>(labels.size(), 1), classes});
  if (labels.empty()) throw ShapeError("one_hot of an empty label list");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw ConfigError("label " + std::to_string(labels[i]) + " out of range");
    }
    out.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return out;
}

}  // namespace gknet
