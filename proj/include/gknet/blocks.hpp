#pragma once

#include <array>

#include "gknet/layers.hpp"

namespace gknet {

/// Branch widths of an inception module.
struct InceptionWidths {
  std::size_t b1 = 1;       // 1x1
  std::size_t b3_reduce = 1;
  std::size_t b3 = 1;       // 1x1 -> 3x3
  std::size_t b5_reduce = 1;
  std::size_t b5 = 1;       // 1x1 -> 5x5
  std::size_t pool_proj = 1;  // 3x3 maxpool (stride 1) -> 1x1
  std::size_t total() const { return b1 + b3 + b5 + pool_proj; }
  friend bool operator==(const InceptionWidths&, const InceptionWidths&) = default;
};

/// Four parallel branches concatenated along channels; all convolutions use
/// ReLU and zero padding so the spatial size is preserved.
class InceptionBlock : public Layer {
 public:
  InceptionBlock(std::size_t in_channels, const InceptionWidths& widths);

  LayerKind kind() const override { return LayerKind::kInception; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) override;
  void initialize(Rng& rng) override;

  /// Branch i as an ordered chain of layers (i = 0..3 in the order above).
  std::vector<LayerPtr>& branch(std::size_t i) { return branches_[i]; }
  const InceptionWidths& widths() const { return widths_; }

 private:
  std::size_t in_channels_;
  InceptionWidths widths_;
  std::array<std::vector<LayerPtr>, 4> branches_;
  bool cached_ = false;
};

/// relu(conv3x3(relu(conv3x3(x))) + x) with the channel count preserved.
class ResidualBlock : public Layer {
 public:
  explicit ResidualBlock(std::size_t channels);

  LayerKind kind() const override { return LayerKind::kResidual; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) override;
  void initialize(Rng& rng) override;

  Conv2D& first() { return first_; }
  Conv2D& second() { return second_; }
  std::size_t channels() const { return channels_; }

 private:
  std::size_t channels_;
  Conv2D first_, second_;
  std::optional<Tensor> sum_;  // pre-activation F(x) + x
};

/// Densely connected block: `layers` repetitions of
/// 1x1 conv (4*growth, relu) -> 3x3 conv (growth, relu), each fed the
/// channel concatenation of the block input and every earlier output.
class DenseBlock : public Layer {
 public:
  static constexpr std::size_t kBottleneckFactor = 4;

  DenseBlock(std::size_t in_channels, std::size_t layers, std::size_t growth);

  LayerKind kind() const override { return LayerKind::kDenseBlock; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) override;
  void initialize(Rng& rng) override;

  std::size_t out_channels() const { return in_channels_ + layers_ * growth_; }
  Conv2D& bottleneck(std::size_t i) { return *bottlenecks_[i]; }
  Conv2D& expand(std::size_t i) { return *expands_[i]; }

 private:
  std::size_t in_channels_, layers_, growth_;
  std::vector<std::unique_ptr<Conv2D>> bottlenecks_, expands_;
  bool cached_ = false;
};

}  // namespace gknet
