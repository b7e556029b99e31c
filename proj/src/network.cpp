#include "gknet/network.hpp"

namespace gknet {

Network::Network(Shape input_shape, std::vector<LayerPtr> layers, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)), seed_(seed), rng_(seed) {
  if (input_shape_.empty()) throw ShapeError("network input shape is empty");
  if (layers_.empty() || layers_.back()->kind() != LayerKind::kSoftmax) {
    throw ShapeError("network must end with a softmax layer");
  }
  Shape s = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      s = layers_[i]->output_shape(s);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + layer_kind_name(layers_[i]->kind()) +
                       "): " + e.what());
    }
  }
  class_count_ = shape_size(s);
  for (auto& layer : layers_) layer->initialize(rng_);
}

void Network::set_class_names(std::vector<std::string> names) {
  if (!names.empty() && names.size() != class_count_) {
    throw ConfigError("class name count " + std::to_string(names.size()) +
                      " does not match network outputs " + std::to_string(class_count_));
  }
  class_names_ = std::move(names);
}

void Network::check_batch(const Tensor& batch) const {
  if (batch.rank() != input_shape_.size() + 1 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), batch.shape().begin() + 1)) {
    throw ShapeError("batch shape " + shape_string(batch.shape()) + " does not match input " +
                     shape_string(input_shape_));
  }
}

Tensor Network::forward(const Tensor& batch, bool training) {
  check_batch(batch);
  ForwardContext ctx{training, &rng_};
  Tensor x = batch;
  for (auto& layer : layers_) x = layer->forward(x, ctx);
  return x;
}

Tensor Network::infer(const Tensor& batch) const {
  check_batch(batch);
  Tensor x = batch;
  for (const auto& layer : layers_) x = layer->infer(x);
  return x;
}

GradientSet Network::backward_through(std::size_t end, Tensor grad) {
  GradientSet out;
  out.deltas.resize(layers_.size());  // slot of a skipped softmax stays default
  for (std::size_t i = end; i-- > 0;) {
    out.deltas[i] = grad;
    grad = layers_[i]->backward(grad);
  }
  out.input = std::move(grad);
  for (auto& layer : layers_) {
    for (Tensor* g : layer->gradients()) out.params.push_back(*g);
  }
  return out;
}

GradientSet Network::backward(const Tensor& loss_grad) {
  return backward_through(layers_.size(), loss_grad);
}

GradientSet Network::backward_from_logits(const Tensor& logit_grad) {
  return backward_through(layers_.size() - 1, logit_grad);
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> params;
  for (auto& layer : layers_) {
    for (Tensor* p : layer->parameters()) params.push_back(p);
  }
  return params;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> params;
  for (const auto& layer : layers_) {
    for (Tensor* p : const_cast<Layer&>(*layer).parameters()) params.push_back(p);
  }
  return params;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* p : parameters()) n += p->size();
  return n;
}

std::vector<Tensor> Network::snapshot() const {
  std::vector<Tensor> out;
  for (const Tensor* p : parameters()) out.push_back(*p);
  return out;
}

void Network::restore(const std::vector<Tensor>& values) {
  auto params = parameters();
  if (values.size() != params.size()) throw ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].shape() != params[i]->shape()) throw ShapeError("restore: parameter shape mismatch");
    *params[i] = values[i];
  }
}

}  // namespace gknet
