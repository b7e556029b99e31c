#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gknet/tensor.hpp"

namespace gknet {

enum class OptimizerKind { kSgd, kRmsProp, kAdam };

OptimizerKind parse_optimizer(std::string_view name);
std::string optimizer_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.001;
  double rho = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  /// Learning rate used when none is given: 0.01 for SGD, 0.001 otherwise.
  static double default_learning_rate(OptimizerKind kind);
  static OptimizerConfig defaults(OptimizerKind kind);

  /// Throws ConfigError unless 0 < lr <= 1, 0 < rho, beta1, beta2 < 1, epsilon > 0.
  void validate() const;
  std::map<std::string, std::string> echo() const;
};

/// Per-parameter slot tensors; unused slots stay empty.
struct OptimizerState {
  std::vector<Tensor> first_moment;   // Adam m
  std::vector<Tensor> second_moment;  // Adam v
  std::vector<Tensor> square_avg;     // RMSProp s
  std::uint64_t step = 0;
};

// Single-tensor update rules.
void sgd_step(Tensor& param, const Tensor& grad, const OptimizerConfig& cfg);
void rmsprop_step(Tensor& param, const Tensor& grad, Tensor& square_avg, const OptimizerConfig& cfg);
/// `step` is the 1-based index of this update (used for bias correction).
void adam_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t step,
               const OptimizerConfig& cfg);

/// Applies one update to a fixed list of parameters, owning the slot state.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  const OptimizerConfig& config() const { return config_; }
  const OptimizerState& state() const { return state_; }
  std::uint64_t steps() const { return state_.step; }

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

 private:
  void ensure_slots(std::span<Tensor* const> params);

  OptimizerConfig config_;
  OptimizerState state_;
};

}  // namespace gknet
