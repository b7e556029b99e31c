#pragma once

#include <string>
#include <string_view>

#include "gknet/tensor.hpp"

namespace gknet {

enum class LossKind { kMse, kMae, kUpperBound, kCategoricalCrossEntropy };

LossKind parse_loss(std::string_view name);
std::string loss_name(LossKind kind);

/// Probabilities are clipped to this floor before taking the log.
inline constexpr double kProbabilityFloor = 1e-12;

/// Scalar loss of `predicted` against `target` (equal shapes).
///
/// mse, mae and upper_bound average over every element. Categorical
/// cross-entropy treats axis 0 as the batch: -sum(target * log(predicted))
/// per row, averaged over rows.
double loss(LossKind kind, const Tensor& predicted, const Tensor& target);

/// Analytic dLoss/dPredicted with the same normalisation as loss().
Tensor loss_gradient(LossKind kind, const Tensor& predicted, const Tensor& target);

/// Fused softmax + cross-entropy gradient at the logits: (y - target) / rows.
Tensor softmax_cross_entropy_logit_gradient(const Tensor& probabilities, const Tensor& target);

/// One-hot rows [labels.size(), classes].
Tensor one_hot(std::span<const int> labels, std::size_t classes);

}  // namespace gknet
