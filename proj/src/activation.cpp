#include "gknet/activation.hpp"

#include <algorithm>
#include <cmath>

namespace gknet {

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "linear" || name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "linear";
  }
  return "linear";
}

double activate(Activation act, double z) {
  switch (act) {
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z < 0.0 ? 0.0 : z;  // NaN passes through
    case Activation::kIdentity: return z;
  }
  return z;
}

double activate_derivative(Activation act, double z) {
  switch (act) {
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

Tensor activation_apply(Activation act, const Tensor& z) {
  Tensor out = z;
  for (double& v : out.data()) v = activate(act, v);
  return out;
}

Tensor activation_apply(std::string_view name, const Tensor& z) {
  return activation_apply(parse_activation(name), z);
}

Tensor activation_derivative(Activation act, const Tensor& z) {
  Tensor out = z;
  for (double& v : out.data()) v = activate_derivative(act, v);
  return out;
}

Tensor activation_derivative(std::string_view name, const Tensor& z) {
  return activation_derivative(parse_activation(name), z);
}

void softmax_inplace(std::span<double> row) {
  const double top = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : row) v /= total;
}

Tensor softmax(const Tensor& z) {
  Tensor out = z;
  softmax_inplace(out.data());
  return out;
}

}  // namespace gknet
