#include "gknet/tensor.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace gknet {

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be >= 1, got " + shape_string(shape));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename Fn>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, Fn fn) {
  require_same_shape(a, b, op);
  Tensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = fn(x[i], y[i]);
  return out;
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor() : shape_{1}, data_(1, 0.0) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

Tensor Tensor::from_list(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw ShapeError("matrix needs at least one row");
  const std::size_t cols = rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw ShapeError("ragged matrix rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range");
  return shape_[axis];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

double& Tensor::at(std::size_t c, std::size_t y, std::size_t x) {
  return data_[(c * shape_[1] + y) * shape_[2] + x];
}
double Tensor::at(std::size_t c, std::size_t y, std::size_t x) const {
  return data_[(c * shape_[1] + y) * shape_[2] + x];
}

double& Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}
double Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}

Tensor Tensor::reshaped(Shape shape) const {
  check_shape(shape);
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice(std::size_t i) const {
  if (i >= shape_[0]) throw ShapeError("slice index out of range");
  Shape inner = shape_.size() > 1 ? Shape(shape_.begin() + 1, shape_.end()) : Shape{1};
  const std::size_t n = shape_size(inner);
  return Tensor(inner, std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(i * n),
                                           data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               std::size_t pad) {
  if (stride == 0) throw ShapeError("stride must be positive");
  if (kernel == 0) throw ShapeError("window must be positive");
  if (kernel > input + 2 * pad) {
    throw ShapeError("window " + std::to_string(kernel) + " larger than padded input " +
                     std::to_string(input + 2 * pad));
  }
  return (input + 2 * pad - kernel) / stride + 1;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw ShapeError("matmul expects rank-2 operands");
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) {
    throw ShapeError("matmul inner extents differ: " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor c({m, n});
  kernels::gemm_nn(m, n, k, a.data().data(), b.data().data(), c.data().data());
  return c;
}

Tensor conv2d_valid(const Tensor& input, const Tensor& kernels, std::size_t stride) {
  if (input.rank() != 3) throw ShapeError("conv2d input must be [C,H,W]");
  if (kernels.rank() != 4) throw ShapeError("conv2d kernels must be [C_out,C_in,Kh,Kw]");
  const std::size_t cin = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t cout = kernels.extent(0), kh = kernels.extent(2), kw = kernels.extent(3);
  if (kernels.extent(1) != cin) throw ShapeError("conv2d kernel channels do not match input");
  const std::size_t oh = conv_output_extent(h, kh, stride);
  const std::size_t ow = conv_output_extent(w, kw, stride);
  Tensor out({cout, oh, ow});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
              acc += input.at(c, y * stride + i, x * stride + j) * kernels.at(o, c, i, j);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

Tensor pool2d(const Tensor& input, std::size_t window_h, std::size_t window_w, std::size_t stride,
              PoolMode mode) {
  if (input.rank() != 3) throw ShapeError("pool2d input must be [C,H,W]");
  const std::size_t ch = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t oh = conv_output_extent(h, window_h, stride);
  const std::size_t ow = conv_output_extent(w, window_w, stride);
  const double inv = 1.0 / static_cast<double>(window_h * window_w);
  Tensor out({ch, oh, ow});
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = mode == PoolMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
        for (std::size_t i = 0; i < window_h; ++i) {
          for (std::size_t j = 0; j < window_w; ++j) {
            const double v = input.at(c, y * stride + i, x * stride + j);
            if (mode == PoolMode::kMax) {
              acc = std::max(acc, v);
            } else {
              acc += v;
            }
          }
        }
        out.at(c, y, x) = mode == PoolMode::kMax ? acc : acc * inv;
      }
    }
  }
  return out;
}

Tensor zero_pad2d(const Tensor& input, std::size_t pad) {
  if (input.rank() != 3) throw ShapeError("zero_pad2d input must be [C,H,W]");
  if (pad == 0) return input;
  const std::size_t ch = input.extent(0), h = input.extent(1), w = input.extent(2);
  Tensor out({ch, h + 2 * pad, w + 2 * pad});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(c, y + pad, x + pad) = input.at(c, y, x);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor add(const Tensor& a, double b) {
  Tensor out = a;
  for (double& v : out.data()) v += b;
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

Tensor map(const Tensor& a, const std::function<double(double)>& fn) {
  Tensor out = a;
  for (double& v : out.data()) v = fn(v);
  return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& first = parts.front().shape();
  if (first.size() != 4) throw ShapeError("concat_channels expects [B,C,H,W]");
  std::size_t total_c = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != 4 || s[0] != first[0] || s[2] != first[2] || s[3] != first[3]) {
      throw ShapeError("concat_channels: incompatible " + shape_string(s) + " vs " +
                       shape_string(first));
    }
    total_c += s[1];
  }
  const std::size_t batch = first[0], plane = first[2] * first[3];
  Tensor out({batch, total_c, first[2], first[3]});
  double* dst = out.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    for (const Tensor& p : parts) {
      const std::size_t block = p.extent(1) * plane;
      const double* src = p.data().data() + n * block;
      dst = std::copy(src, src + block, dst);
    }
  }
  return out;
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

namespace kernels {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = arow[t];
      if (av == 0.0) continue;
      const double* brow = b + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      c[i * n + j] += acc;
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  for (std::size_t t = 0; t < k; ++t) {
    const double* arow = a + t * m;
    const double* brow = b + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void im2col(const ConvGeometry& g, const double* image, double* columns) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const auto h = static_cast<std::ptrdiff_t>(g.height), w = static_cast<std::ptrdiff_t>(g.width);
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t i = 0; i < g.kernel_h; ++i) {
      for (std::size_t j = 0; j < g.kernel_w; ++j) {
        double* row = columns + ((c * g.kernel_h + i) * g.kernel_w + j) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y * g.stride + i) - pad;
          double* out = row + y * ow;
          if (sy < 0 || sy >= h) {
            std::fill(out, out + ow, 0.0);
            continue;
          }
          const double* src = plane + sy * w;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x * g.stride + j) - pad;
            out[x] = (sx < 0 || sx >= w) ? 0.0 : src[sx];
          }
        }
      }
    }
  }
}

void col2im(const ConvGeometry& g, const double* columns, double* image) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const auto h = static_cast<std::ptrdiff_t>(g.height), w = static_cast<std::ptrdiff_t>(g.width);
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t i = 0; i < g.kernel_h; ++i) {
      for (std::size_t j = 0; j < g.kernel_w; ++j) {
        const double* row = columns + ((c * g.kernel_h + i) * g.kernel_w + j) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y * g.stride + i) - pad;
          if (sy < 0 || sy >= h) continue;
          double* dst = plane + sy * w;
          const double* in = row + y * ow;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x * g.stride + j) - pad;
            if (sx >= 0 && sx < w) dst[sx] += in[x];
          }
        }
      }
    }
  }
}

}  // namespace kernels

}  // namespace gknet
