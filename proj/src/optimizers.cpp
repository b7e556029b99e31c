#include "gknet/optimizers.hpp"

#include <cmath>
#include <charconv>

namespace gknet {

namespace {

void require_match(const Tensor& param, const Tensor& other, const char* what) {
  if (param.shape() != other.shape()) {
    throw ShapeError(std::string(what) + " shape " + shape_string(other.shape()) +
                     " does not match parameter " + shape_string(param.shape()));
  }
}

std::string number(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd, rmsprop or adam)");
}

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kRmsProp: return "rmsprop";
    case OptimizerKind::kAdam: return "adam";
  }
  return "sgd";
}

double OptimizerConfig::default_learning_rate(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? 0.01 : 0.001;
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig cfg;
  cfg.kind = kind;
  cfg.learning_rate = default_learning_rate(kind);
  return cfg;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning rate must lie in (0, 1], got " + number(learning_rate));
  }
  auto unit_open = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
  };
  unit_open(rho, "rho");
  unit_open(beta1, "beta1");
  unit_open(beta2, "beta2");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

std::map<std::string, std::string> OptimizerConfig::echo() const {
  std::map<std::string, std::string> out{{"optimizer", optimizer_name(kind)},
                                         {"lr", number(learning_rate)}};
  if (kind == OptimizerKind::kRmsProp) {
    out["rho"] = number(rho);
    out["epsilon"] = number(epsilon);
  } else if (kind == OptimizerKind::kAdam) {
    out["beta1"] = number(beta1);
    out["beta2"] = number(beta2);
    out["epsilon"] = number(epsilon);
  }
  return out;
}

void sgd_step(Tensor& param, const Tensor& grad, const OptimizerConfig& cfg) {
  cfg.validate();
  require_match(param, grad, "gradient");
  auto w = param.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * g[i];
}

void rmsprop_step(Tensor& param, const Tensor& grad, Tensor& square_avg, const OptimizerConfig& cfg) {
  cfg.validate();
  require_match(param, grad, "gradient");
  require_match(param, square_avg, "rmsprop slot");
  auto w = param.data();
  auto g = grad.data();
  auto s = square_avg.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    s[i] = cfg.rho * s[i] + (1.0 - cfg.rho) * g[i] * g[i];
    w[i] -= cfg.learning_rate * g[i] / (std::sqrt(s[i]) + cfg.epsilon);
  }
}

void adam_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t step,
               const OptimizerConfig& cfg) {
  cfg.validate();
  require_match(param, grad, "gradient");
  require_match(param, m, "adam first-moment slot");
  require_match(param, v, "adam second-moment slot");
  if (step == 0) throw ConfigError("adam step index is 1-based");
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto w = param.data();
  auto g = grad.data();
  auto mm = m.data();
  auto vv = v.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g[i];
    vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = mm[i] / c1;
    const double v_hat = vv[i] / c2;
    w[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::ensure_slots(std::span<Tensor* const> params) {
  auto fill = [&](std::vector<Tensor>& slots) {
    if (slots.empty()) {
      for (Tensor* p : params) slots.emplace_back(p->shape());
    } else if (slots.size() != params.size()) {
      throw ShapeError("optimizer bound to a different parameter list");
    }
  };
  if (config_.kind == OptimizerKind::kRmsProp) fill(state_.square_avg);
  if (config_.kind == OptimizerKind::kAdam) {
    fill(state_.first_moment);
    fill(state_.second_moment);
  }
}

void Optimizer::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) throw ShapeError("optimizer: parameter/gradient count mismatch");
  ensure_slots(params);
  const std::uint64_t t = state_.step + 1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    switch (config_.kind) {
      case OptimizerKind::kSgd:
        sgd_step(*params[i], grads[i], config_);
        break;
      case OptimizerKind::kRmsProp:
        rmsprop_step(*params[i], grads[i], state_.square_avg[i], config_);
        break;
      case OptimizerKind::kAdam:
        adam_step(*params[i], grads[i], state_.first_moment[i], state_.second_moment[i], t, config_);
        break;
    }
  }
  state_.step = t;
}

}  // namespace gknet
