#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gknet/layers.hpp"

namespace gknet {

/// Gradients produced by one backward pass.
struct GradientSet {
  /// dC/dθ for every parameter tensor, in Network::parameters() order.
  std::vector<Tensor> params;
  /// dC/d(output of layer i) for every layer i.
  std::vector<Tensor> deltas;
  /// dC/d(network input).
  Tensor input;
};

/// Ordered stack of layers ending in a softmax over `class_count` outputs.
///
/// Owns its seeded generator: initialization and dropout masks are drawn
/// from it, so (topology, seed) fixes every random choice. Not thread-safe
/// except for infer().
class Network {
 public:
  Network(Shape input_shape, std::vector<LayerPtr> layers, std::uint64_t seed);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Shape& input_shape() const { return input_shape_; }
  std::size_t class_count() const { return class_count_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Class probabilities [B, classes] for a batch [B, input_shape...].
  Tensor forward(const Tensor& batch, bool training);
  /// Inference-mode forward that touches no caches.
  Tensor infer(const Tensor& batch) const;

  /// Back-propagate dC/d(probabilities). Parameters are not modified.
  GradientSet backward(const Tensor& loss_grad);
  /// Back-propagate dC/d(logits), bypassing the terminal softmax (used for
  /// the fused softmax + cross-entropy gradient).
  GradientSet backward_from_logits(const Tensor& logit_grad);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;

  /// Copies of every parameter tensor; restore() writes them back.
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  /// Model spec text this network was built from (echoed into checkpoints).
  const std::string& topology() const { return topology_; }
  void set_topology(std::string text) { topology_ = std::move(text); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  void set_class_names(std::vector<std::string> names);

 private:
  GradientSet backward_through(std::size_t end, Tensor grad);
  void check_batch(const Tensor& batch) const;

  Shape input_shape_;
  std::vector<LayerPtr> layers_;
  std::uint64_t seed_;
  Rng rng_;
  std::size_t class_count_ = 0;
  std::string topology_;
  std::vector<std::string> class_names_;
};

}  // namespace gknet
