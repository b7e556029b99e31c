#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gknet/activation.hpp"
#include "gknet/tensor.hpp"

namespace gknet {

enum class LayerKind {
  kDense,
  kConv,
  kMaxPool,
  kAvgPool,
  kGlobalAvgPool,
  kFlatten,
  kDropout,
  kActivation,
  kSoftmax,
  kInception,
  kResidual,
  kDenseBlock,
};

std::string layer_kind_name(LayerKind kind);

using Rng = std::mt19937_64;

struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;  // required when a dropout layer runs in training mode
};

/// A differentiable stage of a network.
///
/// Tensors passed to forward/infer/backward carry a leading batch axis; the
/// shapes used by output_shape() are per-sample. forward() caches what
/// backward() needs. backward() takes dC/d(output), overwrites this layer's
/// parameter gradients with the batch sum and returns dC/d(input).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor forward(const Tensor& x, const ForwardContext& ctx) = 0;
  /// Cache-free forward in inference mode; safe to call concurrently.
  virtual Tensor infer(const Tensor& x) const = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;

  /// Appends (parameter, gradient slot) pairs in a fixed order.
  virtual void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
    (void)params;
    (void)grads;
  }
  virtual void initialize(Rng& rng) { (void)rng; }

  std::vector<Tensor*> parameters();
  std::vector<Tensor*> gradients();
};

using LayerPtr = std::unique_ptr<Layer>;

/// Fully connected layer: z = W a + b, a' = act(z). Inputs of any
/// per-sample rank are flattened.
class Dense : public Layer {
 public:
  Dense(std::size_t inputs, std::size_t units, Activation act);

  LayerKind kind() const override { return LayerKind::kDense; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) override;
  void initialize(Rng& rng) override;

  Tensor& weights() { return weights_; }
  Tensor& bias() { return bias_; }
  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }
  const Tensor& weight_grad() const { return weight_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }
  /// Cached pre-activation / activation of the last forward().
  const std::optional<Tensor>& z() const { return z_; }
  const std::optional<Tensor>& a() const { return a_; }
  Activation activation() const { return act_; }

 private:
  Tensor linear(const Tensor& x) const;

  std::size_t inputs_, units_;
  Activation act_;
  Tensor weights_, bias_, weight_grad_, bias_grad_;
  std::optional<Tensor> input_, z_, a_;
  Shape input_shape_;
};

struct ConvParams {
  std::size_t in_channels = 1;
  std::size_t filters = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  Activation act = Activation::kIdentity;
  bool feeds_relu = false;  // He init even without a fused relu (residual tails)
};

/// 2-D convolution (cross-correlation) with per-filter bias, optional
/// symmetric zero padding and activation.
class Conv2D : public Layer {
 public:
  explicit Conv2D(const ConvParams& params);

  LayerKind kind() const override { return LayerKind::kConv; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) override;
  void initialize(Rng& rng) override;

  const ConvParams& params() const { return p_; }
  Tensor& kernels() { return kernels_; }
  Tensor& bias() { return bias_; }
  const Tensor& kernel_grad() const { return kernel_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }

 private:
  kernels::ConvGeometry geometry(const Shape& batch_shape) const;
  /// Pre-activation for the whole batch; fills `columns` when non-null.
  Tensor linear(const Tensor& x, std::vector<double>* columns) const;

  ConvParams p_;
  Tensor kernels_, bias_, kernel_grad_, bias_grad_;
  std::optional<Tensor> z_;
  std::vector<double> columns_;
  Shape input_shape_;
};

/// Max or average pooling with optional symmetric zero padding. Max-pool
/// gradients route to the first maximal cell in row-major order; padded
/// cells count toward the average.
class Pool2D : public Layer {
 public:
  Pool2D(PoolMode mode, std::size_t window, std::size_t stride, std::size_t pad = 0);

  LayerKind kind() const override {
    return mode_ == PoolMode::kMax ? LayerKind::kMaxPool : LayerKind::kAvgPool;
  }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

  PoolMode mode() const { return mode_; }
  std::size_t window() const { return window_; }
  std::size_t stride() const { return stride_; }

 private:
  Tensor run(const Tensor& x, std::vector<std::ptrdiff_t>* argmax) const;

  PoolMode mode_;
  std::size_t window_, stride_, pad_;
  std::vector<std::ptrdiff_t> argmax_;  // -1 marks a padded cell
  std::optional<Shape> input_shape_;
};

class GlobalAvgPool : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::kGlobalAvgPool; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::optional<Shape> input_shape_;
};

class Flatten : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::kFlatten; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::optional<Shape> input_shape_;
};

/// Inverted dropout: survivors are scaled by 1/(1-p); inference is identity.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate);

  LayerKind kind() const override { return LayerKind::kDropout; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override { return x; }
  Tensor backward(const Tensor& grad_out) override;

  double rate() const { return rate_; }
  /// While frozen, training-mode forward reuses the cached mask.
  void set_frozen(bool frozen) { frozen_ = frozen; }
  const std::optional<Tensor>& mask() const { return mask_; }

 private:
  double rate_;
  bool frozen_ = false;
  std::optional<Tensor> mask_;  // holds 0 or 1/(1-p) per cell; absent in inference
  bool last_training_ = false;
};

class ActivationLayer : public Layer {
 public:
  explicit ActivationLayer(Activation act) : act_(act) {}

  LayerKind kind() const override { return LayerKind::kActivation; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Activation act_;
  std::optional<Tensor> z_;
};

/// Row-wise softmax over the flattened per-sample values.
class Softmax : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::kSoftmax; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x, const ForwardContext& ctx) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::optional<Tensor> y_;
  Shape input_shape_;
};

// Batch helpers shared by the composite blocks.
Shape batch_shape(std::size_t batch, const Shape& sample);
Shape sample_shape(const Tensor& batch);
/// Split [B,C,H,W] along axis 1 into pieces of the given channel counts.
std::vector<Tensor> split_channels(const Tensor& x, const std::vector<std::size_t>& counts);

}  // namespace gknet
