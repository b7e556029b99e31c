#include "gknet/blocks.hpp"

namespace gknet {

namespace {

LayerPtr conv(std::size_t in, std::size_t out, std::size_t k) {
  ConvParams p;
  p.in_channels = in;
  p.filters = out;
  p.kernel = k;
  p.stride = 1;
  p.pad = k / 2;
  p.act = Activation::kRelu;
  return std::make_unique<Conv2D>(p);
}

Shape chain_shape(const std::vector<LayerPtr>& chain, Shape s) {
  for (const auto& layer : chain) s = layer->output_shape(s);
  return s;
}

Tensor chain_forward(std::vector<LayerPtr>& chain, Tensor x, const ForwardContext& ctx) {
  for (auto& layer : chain) x = layer->forward(x, ctx);
  return x;
}

Tensor chain_infer(const std::vector<LayerPtr>& chain, Tensor x) {
  for (const auto& layer : chain) x = layer->infer(x);
  return x;
}

Tensor chain_backward(std::vector<LayerPtr>& chain, Tensor g) {
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void add_into(Tensor& acc, const Tensor& x) {
  auto a = acc.data();
  auto b = x.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

// ---------------------------------------------------------------- InceptionBlock

InceptionBlock::InceptionBlock(std::size_t in_channels, const InceptionWidths& w)
    : in_channels_(in_channels), widths_(w) {
  if (in_channels == 0 || w.b1 == 0 || w.b3_reduce == 0 || w.b3 == 0 || w.b5_reduce == 0 ||
      w.b5 == 0 || w.pool_proj == 0) {
    throw ConfigError("inception: branch channel counts must be positive");
  }
  branches_[0].push_back(conv(in_channels, w.b1, 1));
  branches_[1].push_back(conv(in_channels, w.b3_reduce, 1));
  branches_[1].push_back(conv(w.b3_reduce, w.b3, 3));
  branches_[2].push_back(conv(in_channels, w.b5_reduce, 1));
  branches_[2].push_back(conv(w.b5_reduce, w.b5, 5));
  branches_[3].push_back(std::make_unique<Pool2D>(PoolMode::kMax, 3, 1, 1));
  branches_[3].push_back(conv(in_channels, w.pool_proj, 1));
}

Shape InceptionBlock::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_) {
    throw ShapeError("inception: expected " + std::to_string(in_channels_) +
                     "-channel [C,H,W] input, got " + shape_string(input));
  }
  Shape out = chain_shape(branches_[0], input);
  for (std::size_t i = 1; i < 4; ++i) {
    const Shape s = chain_shape(branches_[i], input);
    if (s[1] != out[1] || s[2] != out[2]) throw ShapeError("inception: branch spatial mismatch");
    out[0] += s[0];
  }
  return out;
}

Tensor InceptionBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  std::vector<Tensor> outs;
  for (auto& b : branches_) outs.push_back(chain_forward(b, x, ctx));
  cached_ = true;
  return concat_channels(outs);
}

Tensor InceptionBlock::infer(const Tensor& x) const {
  std::vector<Tensor> outs;
  for (const auto& b : branches_) outs.push_back(chain_infer(b, x));
  return concat_channels(outs);
}

Tensor InceptionBlock::backward(const Tensor& grad_out) {
  if (!cached_) throw StateError("inception: backward called before forward");
  auto parts = split_channels(grad_out, {widths_.b1, widths_.b3, widths_.b5, widths_.pool_proj});
  Tensor grad_in = chain_backward(branches_[0], parts[0]);
  for (std::size_t i = 1; i < 4; ++i) add_into(grad_in, chain_backward(branches_[i], parts[i]));
  return grad_in;
}

void InceptionBlock::collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
  for (auto& b : branches_)
    for (auto& layer : b) layer->collect(params, grads);
}

void InceptionBlock::initialize(Rng& rng) {
  for (auto& b : branches_)
    for (auto& layer : b) layer->initialize(rng);
}

// ---------------------------------------------------------------- ResidualBlock

namespace {
ConvParams residual_conv(std::size_t channels, Activation act) {
  ConvParams p;
  p.in_channels = channels;
  p.filters = channels;
  p.kernel = 3;
  p.pad = 1;
  p.act = act;
  p.feeds_relu = true;
  return p;
}
}  // namespace

ResidualBlock::ResidualBlock(std::size_t channels)
    : channels_(channels),
      first_(residual_conv(channels, Activation::kRelu)),
      second_(residual_conv(channels, Activation::kIdentity)) {
  if (channels == 0) throw ConfigError("residual: channel count must be positive");
}

Shape ResidualBlock::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != channels_) {
    throw ShapeError("residual: expected " + std::to_string(channels_) +
                     "-channel [C,H,W] input, got " + shape_string(input));
  }
  return second_.output_shape(first_.output_shape(input));
}

Tensor ResidualBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  Tensor s = second_.forward(first_.forward(x, ctx), ctx);
  add_into(s, x);
  Tensor out = activation_apply(Activation::kRelu, s);
  sum_ = std::move(s);
  return out;
}

Tensor ResidualBlock::infer(const Tensor& x) const {
  Tensor s = second_.infer(first_.infer(x));
  add_into(s, x);
  return activation_apply(Activation::kRelu, s);
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  if (!sum_) throw StateError("residual: backward called before forward");
  Tensor gs = grad_out;
  auto g = gs.data();
  auto s = sum_->data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activate_derivative(Activation::kRelu, s[i]);
  Tensor grad_in = first_.backward(second_.backward(gs));
  add_into(grad_in, gs);
  return grad_in;
}

void ResidualBlock::collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
  first_.collect(params, grads);
  second_.collect(params, grads);
}

void ResidualBlock::initialize(Rng& rng) {
  first_.initialize(rng);
  second_.initialize(rng);
}

// ---------------------------------------------------------------- DenseBlock

DenseBlock::DenseBlock(std::size_t in_channels, std::size_t layers, std::size_t growth)
    : in_channels_(in_channels), layers_(layers), growth_(growth) {
  if (in_channels == 0) throw ConfigError("denseblock: input channel count must be positive");
  if (layers > 0 && growth == 0) throw ConfigError("denseblock: growth must be positive");
  for (std::size_t i = 0; i < layers; ++i) {
    const std::size_t width = in_channels + i * growth;
    ConvParams b;
    b.in_channels = width;
    b.filters = kBottleneckFactor * growth;
    b.kernel = 1;
    b.act = Activation::kRelu;
    bottlenecks_.push_back(std::make_unique<Conv2D>(b));
    ConvParams e;
    e.in_channels = kBottleneckFactor * growth;
    e.filters = growth;
    e.kernel = 3;
    e.pad = 1;
    e.act = Activation::kRelu;
    expands_.push_back(std::make_unique<Conv2D>(e));
  }
}

Shape DenseBlock::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_) {
    throw ShapeError("denseblock: expected " + std::to_string(in_channels_) +
                     "-channel [C,H,W] input, got " + shape_string(input));
  }
  return {out_channels(), input[1], input[2]};
}

Tensor DenseBlock::forward(const Tensor& x, const ForwardContext& ctx) {
  std::vector<Tensor> features{x};
  for (std::size_t i = 0; i < layers_; ++i) {
    Tensor joined = features.size() == 1 ? features.front() : concat_channels(features);
    features.push_back(expands_[i]->forward(bottlenecks_[i]->forward(joined, ctx), ctx));
  }
  cached_ = true;
  return features.size() == 1 ? x : concat_channels(features);
}

Tensor DenseBlock::infer(const Tensor& x) const {
  std::vector<Tensor> features{x};
  for (std::size_t i = 0; i < layers_; ++i) {
    Tensor joined = features.size() == 1 ? features.front() : concat_channels(features);
    features.push_back(expands_[i]->infer(bottlenecks_[i]->infer(joined)));
  }
  return features.size() == 1 ? x : concat_channels(features);
}

Tensor DenseBlock::backward(const Tensor& grad_out) {
  if (!cached_) throw StateError("denseblock: backward called before forward");
  if (layers_ == 0) return grad_out;
  std::vector<std::size_t> widths{in_channels_};
  for (std::size_t i = 0; i < layers_; ++i) widths.push_back(growth_);
  std::vector<Tensor> grads = split_channels(grad_out, widths);
  for (std::size_t i = layers_; i-- > 0;) {
    Tensor g_joined = bottlenecks_[i]->backward(expands_[i]->backward(grads[i + 1]));
    const std::vector<std::size_t> prefix(widths.begin(), widths.begin() + static_cast<std::ptrdiff_t>(i + 1));
    std::vector<Tensor> pieces = prefix.size() == 1 ? std::vector<Tensor>{g_joined}
                                                    : split_channels(g_joined, prefix);
    for (std::size_t j = 0; j <= i; ++j) add_into(grads[j], pieces[j]);
  }
  return grads[0];
}

void DenseBlock::collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
  for (std::size_t i = 0; i < layers_; ++i) {
    bottlenecks_[i]->collect(params, grads);
    expands_[i]->collect(params, grads);
  }
}

void DenseBlock::initialize(Rng& rng) {
  for (std::size_t i = 0; i < layers_; ++i) {
    bottlenecks_[i]->initialize(rng);
    expands_[i]->initialize(rng);
  }
}

}  // namespace gknet
