#include "gknet/layers.hpp"

#include <algorithm>
#include <cmath>

namespace gknet {

namespace {

void require_cache(bool present, const char* layer) {
  if (!present) throw StateError(std::string(layer) + ": backward called before forward");
}

void require_batch_rank(const Tensor& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(layer) + ": expected batched rank " + std::to_string(rank) +
                     " input, got " + shape_string(x.shape()));
  }
}

void he_normal(Tensor& t, std::size_t fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : t.data()) v = dist(rng);
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.data()) v = dist(rng);
}

// delta = grad * act'(z), skipping the multiply for the identity.
Tensor activation_delta(Activation act, const Tensor& grad, const Tensor& z) {
  if (grad.shape() != z.shape()) throw ShapeError("gradient shape does not match cached output");
  if (act == Activation::kIdentity) return grad;
  Tensor delta = grad;
  auto d = delta.data();
  auto zz = z.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= activate_derivative(act, zz[i]);
  return delta;
}

}  // namespace

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv: return "conv";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kAvgPool: return "avgpool";
    case LayerKind::kGlobalAvgPool: return "globalavgpool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kActivation: return "activation";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kInception: return "inception";
    case LayerKind::kResidual: return "residual";
    case LayerKind::kDenseBlock: return "denseblock";
  }
  return "unknown";
}

std::vector<Tensor*> Layer::parameters() {
  std::vector<Tensor*> params, grads;
  collect(params, grads);
  return params;
}

std::vector<Tensor*> Layer::gradients() {
  std::vector<Tensor*> params, grads;
  collect(params, grads);
  return grads;
}

Shape batch_shape(std::size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

Shape sample_shape(const Tensor& batch) {
  if (batch.rank() < 2) throw ShapeError("batched tensor needs rank >= 2");
  return Shape(batch.shape().begin() + 1, batch.shape().end());
}

std::vector<Tensor> split_channels(const Tensor& x, const std::vector<std::size_t>& counts) {
  if (x.rank() != 4) throw ShapeError("split_channels expects [B,C,H,W]");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total != x.extent(1)) throw ShapeError("split_channels: channel counts do not sum to input");
  const std::size_t batch = x.extent(0), plane = x.extent(2) * x.extent(3);
  std::vector<Tensor> parts;
  parts.reserve(counts.size());
  for (std::size_t c : counts) parts.emplace_back(Shape{batch, c, x.extent(2), x.extent(3)});
  const double* src = x.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const std::size_t block = counts[i] * plane;
      std::copy(src, src + block, parts[i].data().data() + n * block);
      src += block;
    }
  }
  return parts;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t inputs, std::size_t units, Activation act)
    : inputs_(inputs),
      units_(units),
      act_(act),
      weights_({units, inputs}),
      bias_({units}),
      weight_grad_({units, inputs}),
      bias_grad_({units}) {}

Shape Dense::output_shape(const Shape& input) const {
  if (shape_size(input) != inputs_) {
    throw ShapeError("dense: expected " + std::to_string(inputs_) + " inputs, got " +
                     shape_string(input));
  }
  return {units_};
}

Tensor Dense::linear(const Tensor& x) const {
  if (x.rank() < 2) throw ShapeError("dense: input must carry a batch axis");
  const std::size_t batch = x.extent(0);
  if (x.size() != batch * inputs_) {
    throw ShapeError("dense: expected " + std::to_string(inputs_) + " inputs per sample, got " +
                     shape_string(x.shape()));
  }
  Tensor z({batch, units_});
  double* zd = z.data().data();
  for (std::size_t n = 0; n < batch; ++n) std::copy(bias_.data().begin(), bias_.data().end(), zd + n * units_);
  kernels::gemm_nt(batch, units_, inputs_, x.data().data(), weights_.data().data(), zd);
  return z;
}

Tensor Dense::forward(const Tensor& x, const ForwardContext&) {
  Tensor z = linear(x);
  input_shape_ = x.shape();
  input_ = x.reshaped({x.extent(0), inputs_});
  a_ = activation_apply(act_, z);
  z_ = std::move(z);
  return *a_;
}

Tensor Dense::infer(const Tensor& x) const { return activation_apply(act_, linear(x)); }

Tensor Dense::backward(const Tensor& grad_out) {
  require_cache(z_.has_value(), "dense");
  const Tensor delta = activation_delta(act_, grad_out.reshaped(z_->shape()), *z_);
  const std::size_t batch = delta.extent(0);
  weight_grad_.fill(0.0);
  bias_grad_.fill(0.0);
  kernels::gemm_tn(units_, inputs_, batch, delta.data().data(), input_->data().data(),
                   weight_grad_.data().data());
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t j = 0; j < units_; ++j) bias_grad_[j] += delta[n * units_ + j];
  Tensor grad_in({batch, inputs_});
  kernels::gemm_nn(batch, inputs_, units_, delta.data().data(), weights_.data().data(),
                   grad_in.data().data());
  return grad_in.reshaped(input_shape_);
}

void Dense::collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
  params.push_back(&weights_);
  params.push_back(&bias_);
  grads.push_back(&weight_grad_);
  grads.push_back(&bias_grad_);
}

void Dense::initialize(Rng& rng) {
  if (act_ == Activation::kRelu) {
    he_normal(weights_, inputs_, rng);
  } else {
    glorot_uniform(weights_, inputs_, units_, rng);
  }
  bias_.fill(0.0);
}

// ---------------------------------------------------------------- Conv2D

Conv2D::Conv2D(const ConvParams& params)
    : p_(params),
      kernels_({params.filters, params.in_channels, params.kernel, params.kernel}),
      bias_({params.filters}),
      kernel_grad_({params.filters, params.in_channels, params.kernel, params.kernel}),
      bias_grad_({params.filters}) {
  if (p_.stride == 0) throw ConfigError("conv: stride must be positive");
  if (p_.kernel % 2 == 0) throw ConfigError("conv: kernel size must be odd, got " + std::to_string(p_.kernel));
  if (p_.filters == 0 || p_.in_channels == 0) throw ConfigError("conv: channel counts must be positive");
}

Shape Conv2D::output_shape(const Shape& input) const {
  if (input.size() != 3) throw ShapeError("conv: expected [C,H,W] input, got " + shape_string(input));
  if (input[0] != p_.in_channels) {
    throw ShapeError("conv: expected " + std::to_string(p_.in_channels) + " channels, got " +
                     std::to_string(input[0]));
  }
  return {p_.filters, conv_output_extent(input[1], p_.kernel, p_.stride, p_.pad),
          conv_output_extent(input[2], p_.kernel, p_.stride, p_.pad)};
}

kernels::ConvGeometry Conv2D::geometry(const Shape& s) const {
  return {s[1], s[2], s[3], p_.kernel, p_.kernel, p_.stride, p_.pad};
}

Tensor Conv2D::linear(const Tensor& x, std::vector<double>* columns) const {
  require_batch_rank(x, 4, "conv");
  const Shape out_sample = output_shape(sample_shape(x));
  const auto g = geometry(x.shape());
  const std::size_t batch = x.extent(0), patch = g.patch(), cells = g.out_h() * g.out_w();
  const std::size_t in_block = g.channels * g.height * g.width;
  Tensor z(batch_shape(batch, out_sample));
  std::vector<double> scratch;
  if (columns) {
    columns->assign(batch * patch * cells, 0.0);
  } else {
    scratch.resize(patch * cells);
  }
  for (std::size_t n = 0; n < batch; ++n) {
    double* cols = columns ? columns->data() + n * patch * cells : scratch.data();
    kernels::im2col(g, x.data().data() + n * in_block, cols);
    double* zn = z.data().data() + n * p_.filters * cells;
    for (std::size_t f = 0; f < p_.filters; ++f) std::fill(zn + f * cells, zn + (f + 1) * cells, bias_[f]);
    kernels::gemm_nn(p_.filters, cells, patch, kernels_.data().data(), cols, zn);
  }
  return z;
}

Tensor Conv2D::forward(const Tensor& x, const ForwardContext&) {
  Tensor z = linear(x, &columns_);
  input_shape_ = x.shape();
  Tensor a = activation_apply(p_.act, z);
  z_ = std::move(z);
  return a;
}

Tensor Conv2D::infer(const Tensor& x) const { return activation_apply(p_.act, linear(x, nullptr)); }

Tensor Conv2D::backward(const Tensor& grad_out) {
  require_cache(z_.has_value(), "conv");
  const Tensor delta = activation_delta(p_.act, grad_out, *z_);
  const auto g = geometry(input_shape_);
  const std::size_t batch = input_shape_[0], patch = g.patch(), cells = g.out_h() * g.out_w();
  const std::size_t in_block = g.channels * g.height * g.width;
  kernel_grad_.fill(0.0);
  bias_grad_.fill(0.0);
  Tensor grad_in(input_shape_);
  std::vector<double> dcols(patch * cells);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* dn = delta.data().data() + n * p_.filters * cells;
    const double* cols = columns_.data() + n * patch * cells;
    kernels::gemm_nt(p_.filters, patch, cells, dn, cols, kernel_grad_.data().data());
    for (std::size_t f = 0; f < p_.filters; ++f) {
      double s = 0.0;
      for (std::size_t i = 0; i < cells; ++i) s += dn[f * cells + i];
      bias_grad_[f] += s;
    }
    std::fill(dcols.begin(), dcols.end(), 0.0);
    kernels::gemm_tn(patch, cells, p_.filters, kernels_.data().data(), dn, dcols.data());
    kernels::col2im(g, dcols.data(), grad_in.data().data() + n * in_block);
  }
  return grad_in;
}

void Conv2D::collect(std::vector<Tensor*>& params, std::vector<Tensor*>& grads) {
  params.push_back(&kernels_);
  params.push_back(&bias_);
  grads.push_back(&kernel_grad_);
  grads.push_back(&bias_grad_);
}

void Conv2D::initialize(Rng& rng) {
  const std::size_t fan_in = p_.in_channels * p_.kernel * p_.kernel;
  const std::size_t fan_out = p_.filters * p_.kernel * p_.kernel;
  if (p_.act == Activation::kRelu || p_.feeds_relu) {
    he_normal(kernels_, fan_in, rng);
  } else {
    glorot_uniform(kernels_, fan_in, fan_out, rng);
  }
  bias_.fill(0.0);
}

// ---------------------------------------------------------------- Pool2D

Pool2D::Pool2D(PoolMode mode, std::size_t window, std::size_t stride, std::size_t pad)
    : mode_(mode), window_(window), stride_(stride), pad_(pad) {
  if (window == 0 || stride == 0) throw ConfigError("pool: window and stride must be positive");
}

Shape Pool2D::output_shape(const Shape& input) const {
  if (input.size() != 3) throw ShapeError("pool: expected [C,H,W] input, got " + shape_string(input));
  return {input[0], conv_output_extent(input[1], window_, stride_, pad_),
          conv_output_extent(input[2], window_, stride_, pad_)};
}

Tensor Pool2D::run(const Tensor& x, std::vector<std::ptrdiff_t>* argmax) const {
  require_batch_rank(x, 4, "pool");
  const Shape out_sample = output_shape(sample_shape(x));
  const std::size_t batch = x.extent(0), ch = x.extent(1);
  const auto h = static_cast<std::ptrdiff_t>(x.extent(2)), w = static_cast<std::ptrdiff_t>(x.extent(3));
  const std::size_t oh = out_sample[1], ow = out_sample[2];
  const auto pad = static_cast<std::ptrdiff_t>(pad_);
  const double inv = 1.0 / static_cast<double>(window_ * window_);
  Tensor out(batch_shape(batch, out_sample));
  if (argmax) argmax->assign(out.size(), -1);
  const double* in = x.data().data();
  double* o = out.data().data();
  std::size_t k = 0;
  for (std::size_t plane = 0; plane < batch * ch; ++plane) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(plane) * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo, ++k) {
        double acc = 0.0;
        std::ptrdiff_t best_idx = -1;
        bool first = true;
        for (std::size_t i = 0; i < window_; ++i) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y * stride_ + i) - pad;
          for (std::size_t j = 0; j < window_; ++j) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xo * stride_ + j) - pad;
            const bool inside = sy >= 0 && sy < h && sx >= 0 && sx < w;
            const std::ptrdiff_t idx = inside ? base + sy * w + sx : -1;
            const double v = inside ? in[idx] : 0.0;
            if (mode_ == PoolMode::kAvg) {
              acc += v;
            } else if (first || v > acc) {
              acc = v;
              best_idx = idx;
              first = false;
            }
          }
        }
        o[k] = mode_ == PoolMode::kAvg ? acc * inv : acc;
        if (argmax) (*argmax)[k] = best_idx;
      }
    }
  }
  return out;
}

Tensor Pool2D::forward(const Tensor& x, const ForwardContext&) {
  input_shape_ = x.shape();
  return run(x, mode_ == PoolMode::kMax ? &argmax_ : nullptr);
}

Tensor Pool2D::infer(const Tensor& x) const { return run(x, nullptr); }

Tensor Pool2D::backward(const Tensor& grad_out) {
  require_cache(input_shape_.has_value(), "pool");
  const Shape& s = *input_shape_;
  const Shape expected = batch_shape(s[0], output_shape({s[1], s[2], s[3]}));
  if (grad_out.shape() != expected) throw ShapeError("pool: gradient shape mismatch");
  Tensor grad_in(s);
  double* gi = grad_in.data().data();
  const double* go = grad_out.data().data();
  if (mode_ == PoolMode::kMax) {
    for (std::size_t k = 0; k < argmax_.size(); ++k) {
      if (argmax_[k] >= 0) gi[argmax_[k]] += go[k];
    }
    return grad_in;
  }
  const auto h = static_cast<std::ptrdiff_t>(s[2]), w = static_cast<std::ptrdiff_t>(s[3]);
  const std::size_t oh = expected[2], ow = expected[3];
  const auto pad = static_cast<std::ptrdiff_t>(pad_);
  const double inv = 1.0 / static_cast<double>(window_ * window_);
  std::size_t k = 0;
  for (std::size_t plane = 0; plane < s[0] * s[1]; ++plane) {
    double* base = gi + plane * s[2] * s[3];
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo, ++k) {
        const double share = go[k] * inv;
        for (std::size_t i = 0; i < window_; ++i) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y * stride_ + i) - pad;
          if (sy < 0 || sy >= h) continue;
          for (std::size_t j = 0; j < window_; ++j) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xo * stride_ + j) - pad;
            if (sx >= 0 && sx < w) base[sy * w + sx] += share;
          }
        }
      }
    }
  }
  return grad_in;
}

// ---------------------------------------------------------------- GlobalAvgPool

Shape GlobalAvgPool::output_shape(const Shape& input) const {
  if (input.size() != 3) throw ShapeError("globalavgpool: expected [C,H,W] input");
  return {input[0]};
}

Tensor GlobalAvgPool::infer(const Tensor& x) const {
  require_batch_rank(x, 4, "globalavgpool");
  const std::size_t planes = x.extent(0) * x.extent(1), area = x.extent(2) * x.extent(3);
  Tensor out({x.extent(0), x.extent(1)});
  const double* in = x.data().data();
  for (std::size_t p = 0; p < planes; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < area; ++i) s += in[p * area + i];
    out[p] = s / static_cast<double>(area);
  }
  return out;
}

Tensor GlobalAvgPool::forward(const Tensor& x, const ForwardContext&) {
  Tensor out = infer(x);
  input_shape_ = x.shape();
  return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  require_cache(input_shape_.has_value(), "globalavgpool");
  const Shape& s = *input_shape_;
  const std::size_t planes = s[0] * s[1], area = s[2] * s[3];
  if (grad_out.size() != planes) throw ShapeError("globalavgpool: gradient shape mismatch");
  Tensor grad_in(s);
  double* gi = grad_in.data().data();
  for (std::size_t p = 0; p < planes; ++p) {
    const double share = grad_out[p] / static_cast<double>(area);
    std::fill(gi + p * area, gi + (p + 1) * area, share);
  }
  return grad_in;
}

// ---------------------------------------------------------------- Flatten

Shape Flatten::output_shape(const Shape& input) const { return {shape_size(input)}; }

Tensor Flatten::infer(const Tensor& x) const {
  if (x.rank() < 2) throw ShapeError("flatten: input must carry a batch axis");
  return x.reshaped({x.extent(0), x.size() / x.extent(0)});
}

Tensor Flatten::forward(const Tensor& x, const ForwardContext&) {
  input_shape_ = x.shape();
  return infer(x);
}

Tensor Flatten::backward(const Tensor& grad_out) {
  require_cache(input_shape_.has_value(), "flatten");
  return grad_out.reshaped(*input_shape_);
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0,1)");
}

Tensor Dropout::forward(const Tensor& x, const ForwardContext& ctx) {
  last_training_ = ctx.training;
  if (!ctx.training) return x;
  const bool reuse = frozen_ && mask_ && mask_->shape() == x.shape();
  if (!reuse) {
    Tensor mask(x.shape(), 1.0);
    if (rate_ > 0.0) {
      if (ctx.rng == nullptr) throw StateError("dropout: training forward needs a generator");
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      const double keep_scale = 1.0 / (1.0 - rate_);
      for (double& m : mask.data()) m = uniform(*ctx.rng) < rate_ ? 0.0 : keep_scale;
    }
    mask_ = std::move(mask);
  }
  return mul(x, *mask_);
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (!last_training_) return grad_out;
  require_cache(mask_.has_value(), "dropout");
  return mul(grad_out, *mask_);
}

// ---------------------------------------------------------------- ActivationLayer

Tensor ActivationLayer::forward(const Tensor& x, const ForwardContext&) {
  z_ = x;
  return activation_apply(act_, x);
}

Tensor ActivationLayer::infer(const Tensor& x) const { return activation_apply(act_, x); }

Tensor ActivationLayer::backward(const Tensor& grad_out) {
  require_cache(z_.has_value(), "activation");
  return activation_delta(act_, grad_out, *z_);
}

// ---------------------------------------------------------------- Softmax

Shape Softmax::output_shape(const Shape& input) const { return {shape_size(input)}; }

Tensor Softmax::infer(const Tensor& x) const {
  if (x.rank() < 2) throw ShapeError("softmax: input must carry a batch axis");
  const std::size_t batch = x.extent(0), width = x.size() / batch;
  Tensor y = x.reshaped({batch, width});
  for (std::size_t n = 0; n < batch; ++n) softmax_inplace(y.data().subspan(n * width, width));
  return y;
}

Tensor Softmax::forward(const Tensor& x, const ForwardContext&) {
  input_shape_ = x.shape();
  y_ = infer(x);
  return *y_;
}

Tensor Softmax::backward(const Tensor& grad_out) {
  require_cache(y_.has_value(), "softmax");
  const Tensor g = grad_out.reshaped(y_->shape());
  const std::size_t batch = y_->extent(0), width = y_->extent(1);
  Tensor grad_in(y_->shape());
  for (std::size_t n = 0; n < batch; ++n) {
    double dot = 0.0;
    for (std::size_t i = 0; i < width; ++i) dot += g[n * width + i] * (*y_)[n * width + i];
    for (std::size_t i = 0; i < width; ++i) {
      grad_in[n * width + i] = (*y_)[n * width + i] * (g[n * width + i] - dot);
    }
  }
  return grad_in.reshaped(input_shape_);
}

}  // namespace gknet
