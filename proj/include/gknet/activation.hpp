#pragma once

#include <string>
#include <string_view>

#include "gknet/tensor.hpp"

namespace gknet {

enum class Activation { kIdentity, kSigmoid, kTanh, kRelu };

/// Accepts "sigmoid", "tanh", "relu" and "linear"/"identity"; throws ConfigError otherwise.
Activation parse_activation(std::string_view name);
std::string activation_name(Activation act);

double activate(Activation act, double z);
/// Derivative with respect to the pre-activation z; relu'(0) is taken as 0.
double activate_derivative(Activation act, double z);

Tensor activation_apply(Activation act, const Tensor& z);
Tensor activation_apply(std::string_view name, const Tensor& z);
Tensor activation_derivative(Activation act, const Tensor& z);
Tensor activation_derivative(std::string_view name, const Tensor& z);

/// Numerically stable softmax of a vector (max-subtracted).
Tensor softmax(const Tensor& z);
void softmax_inplace(std::span<double> row);

}  // namespace gknet
