#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gknet/error.hpp"

namespace gknet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major N-dimensional array of doubles.
///
/// The flat data length always equals the product of the extents; every
/// extent is at least 1 and the rank is at least 1. A default-constructed
/// tensor is the scalar-like shape [1] holding 0.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor from_list(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t c, std::size_t y, std::size_t x);
  double at(std::size_t c, std::size_t y, std::size_t x) const;
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const;

  /// Same data viewed under another shape of equal size.
  Tensor reshaped(Shape shape) const;

  /// Copy of the i-th slice along axis 0, shape = shape()[1:] (or [1] for rank 1).
  Tensor slice(std::size_t i) const;

  void fill(double value);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

enum class PoolMode { kMax, kAvg };

Tensor matmul(const Tensor& a, const Tensor& b);

/// Cross-correlation over "valid" windows: input [C_in,H,W], kernels
/// [C_out,C_in,Kh,Kw] -> [C_out,H',W'] with H' = (H-Kh)/stride + 1.
Tensor conv2d_valid(const Tensor& input, const Tensor& kernels, std::size_t stride = 1);

/// Window reduction over [C,H,W] -> [C,H',W'].
Tensor pool2d(const Tensor& input, std::size_t window_h, std::size_t window_w, std::size_t stride,
              PoolMode mode);

/// Symmetric zero padding of the two trailing spatial axes of a [C,H,W] tensor.
Tensor zero_pad2d(const Tensor& input, std::size_t pad);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor scale(const Tensor& a, double factor);
Tensor map(const Tensor& a, const std::function<double(double)>& fn);

/// Concatenate [B,C_i,H,W] tensors along axis 1.
Tensor concat_channels(std::span<const Tensor> parts);

double sum(const Tensor& a);

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               std::size_t pad = 0);

namespace kernels {

// Row-major GEMM kernels on raw buffers; all accumulate into c.
// c[m,n] += a[m,k] * b[k,n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);
// c[m,n] += a[m,k] * b[n,k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);
// c[m,n] += a[k,m]^T * b[k,n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kernel_h, kernel_w;
  std::size_t stride, pad;
  std::size_t out_h() const { return conv_output_extent(height, kernel_h, stride, pad); }
  std::size_t out_w() const { return conv_output_extent(width, kernel_w, stride, pad); }
  std::size_t patch() const { return channels * kernel_h * kernel_w; }
};

/// Unfold one [C,H,W] image into columns [C*Kh*Kw, H'*W']; padded cells read as 0.
void im2col(const ConvGeometry& g, const double* image, double* columns);
/// Adjoint of im2col: scatter-add columns back into a zero-initialized image.
void col2im(const ConvGeometry& g, const double* columns, double* image);

}  // namespace kernels

}  // namespace gknet
