#include <doctest.h>

#include <random>

#include "gknet/layers.hpp"
#include "gknet/tensor.hpp"
#include "gradcheck.hpp"

using namespace gknet;
using gknet::testing::random_tensor;

namespace {

// Worked 7x7 binary image and 3x3 "X" kernel with its known feature map.
Tensor worked_input() {
  return Tensor({1, 7, 7}, {0, 1, 1, 1, 0, 0, 0,  //
                            0, 0, 1, 1, 1, 0, 0,  //
                            0, 0, 0, 1, 1, 1, 0,  //
                            0, 0, 0, 1, 1, 0, 0,  //
                            0, 0, 1, 1, 0, 0, 0,  //
                            0, 1, 1, 0, 0, 0, 0,  //
                            1, 1, 0, 0, 0, 0, 0});
}

Tensor worked_kernel() { return Tensor({1, 1, 3, 3}, {1, 0, 1, 0, 1, 0, 1, 0, 1}); }

Tensor worked_map() {
  return Tensor({1, 5, 5}, {1, 4, 3, 4, 1,  //
                            1, 2, 4, 3, 3,  //
                            1, 2, 3, 4, 1,  //
                            1, 3, 3, 1, 1,  //
                            3, 3, 1, 1, 0});
}

// Plain triple loop used as the reference for the blocked kernels.
std::vector<double> naive_matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                 std::size_t n, std::size_t k) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

}  // namespace

TEST_CASE("conv2d_valid reproduces the worked feature map") {
  CHECK(conv2d_valid(worked_input(), worked_kernel()) == worked_map());
}

TEST_CASE("valid convolution shrinks by kernel - 1 and honours stride") {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({2, 9, 7}, rng);
  const Tensor k = random_tensor({3, 2, 3, 3}, rng);
  CHECK(conv2d_valid(x, k).shape() == Shape{3, 7, 5});
  CHECK(conv2d_valid(x, k, 2).shape() == Shape{3, 4, 3});
  CHECK_THROWS_AS(conv2d_valid(x, random_tensor({1, 2, 11, 3}, rng)), ShapeError);
  CHECK_THROWS_AS(conv2d_valid(x, random_tensor({1, 3, 3, 3}, rng)), ShapeError);
}

TEST_CASE("conv_output_extent") {
  CHECK(conv_output_extent(7, 3, 1) == 5);
  CHECK(conv_output_extent(7, 3, 2) == 3);
  CHECK(conv_output_extent(5, 5, 1, 2) == 5);
  CHECK(conv_output_extent(64, 3, 2, 1) == 32);
  CHECK_THROWS_AS(conv_output_extent(2, 3, 1), ShapeError);
  CHECK_THROWS_AS(conv_output_extent(8, 3, 0), ShapeError);
}

TEST_CASE("matmul matches a scalar triple loop") {
  std::mt19937_64 rng(2);
  for (auto [m, n, k] : {std::tuple{1, 1, 1}, {3, 5, 4}, {17, 9, 33}, {64, 70, 5}}) {
    const Tensor a = random_tensor({std::size_t(m), std::size_t(k)}, rng);
    const Tensor b = random_tensor({std::size_t(k), std::size_t(n)}, rng);
    const Tensor c = matmul(a, b);
    const auto ref = naive_matmul(a.values(), b.values(), m, n, k);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
}

TEST_CASE("transposed gemm variants agree with explicit transposes") {
  std::mt19937_64 rng(3);
  const std::size_t m = 7, n = 11, k = 13;
  const Tensor a = random_tensor({m, k}, rng);
  const Tensor b = random_tensor({k, n}, rng);
  const auto ref = naive_matmul(a.values(), b.values(), m, n, k);

  std::vector<double> bt(n * k), at(k * m);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + i] = b.values()[i * n + j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) at[j * m + i] = a.values()[i * k + j];

  std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
  kernels::gemm_nt(m, n, k, a.values().data(), bt.data(), c1.data());
  kernels::gemm_tn(m, n, k, at.data(), b.values().data(), c2.data());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(c1[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK(c2[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("im2col + gemm equals the direct convolution") {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({3, 8, 6}, rng);
  const Tensor k = random_tensor({4, 3, 3, 3}, rng);
  for (std::size_t stride : {1, 2}) {
    const kernels::ConvGeometry g{3, 8, 6, 3, 3, stride, 0};
    std::vector<double> cols(g.patch() * g.out_h() * g.out_w());
    kernels::im2col(g, x.values().data(), cols.data());
    std::vector<double> out(4 * g.out_h() * g.out_w(), 0.0);
    kernels::gemm_nn(4, g.out_h() * g.out_w(), g.patch(), k.values().data(), cols.data(), out.data());
    const Tensor ref = conv2d_valid(x, k, stride);
    REQUIRE(ref.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("col2im is the adjoint of im2col") {
  std::mt19937_64 rng(5);
  const kernels::ConvGeometry g{2, 5, 7, 3, 3, 2, 1};
  const Tensor x = random_tensor({2, 5, 7}, rng);
  const Tensor c = random_tensor({g.patch(), g.out_h() * g.out_w()}, rng);
  std::vector<double> cols(c.size()), back(x.size(), 0.0);
  kernels::im2col(g, x.values().data(), cols.data());
  kernels::col2im(g, c.values().data(), back.data());
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) lhs += cols[i] * c[i];
  for (std::size_t i = 0; i < back.size(); ++i) rhs += back[i] * x[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("max and average pooling") {
  const Tensor x({1, 4, 4}, {1, 3, 2, 0,  //
                             5, 4, 1, 1,  //
                             0, 2, 9, 8,  //
                             1, 1, 7, 6});
  CHECK(pool2d(x, 2, 2, 2, PoolMode::kMax) == Tensor({1, 2, 2}, {5, 2, 2, 9}));
  CHECK(pool2d(x, 2, 2, 2, PoolMode::kAvg) == Tensor({1, 2, 2}, {3.25, 1, 1, 7.5}));
  CHECK(pool2d(x, 3, 3, 1, PoolMode::kMax).shape() == Shape{1, 2, 2});
}

TEST_CASE("max-pool ties route the gradient to the first maximum") {
  Pool2D pool(PoolMode::kMax, 2, 2);
  const Tensor x({1, 1, 2, 2}, {7, 7, 7, 7});
  pool.forward(x, {false, nullptr});
  const Tensor g = pool.backward(Tensor({1, 1, 1, 1}, 1.0));
  CHECK(g == Tensor({1, 1, 2, 2}, {1, 0, 0, 0}));
}

TEST_CASE("zero padding counts toward the average") {
  Pool2D pool(PoolMode::kAvg, 3, 1, 1);
  const Tensor x({1, 1, 2, 2}, {4, 4, 4, 4});
  const Tensor y = pool.forward(x, {false, nullptr});
  for (double v : y.data()) CHECK(v == doctest::Approx(16.0 / 9.0));
}

TEST_CASE("elementwise helpers check shapes") {
  const Tensor a = Tensor::from_list({1, 2, 3});
  const Tensor b = Tensor::from_list({4, 5, 6});
  CHECK(add(a, b) == Tensor::from_list({5, 7, 9}));
  CHECK(sub(b, a) == Tensor::from_list({3, 3, 3}));
  CHECK(mul(a, b) == Tensor::from_list({4, 10, 18}));
  CHECK(scale(a, 2) == Tensor::from_list({2, 4, 6}));
  CHECK(sum(a) == 6);
  CHECK_THROWS_AS(add(a, Tensor({2})), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("concat_channels stacks along axis 1") {
  const Tensor a({2, 1, 1, 2}, {1, 2, 3, 4});
  const Tensor b({2, 2, 1, 2}, {5, 6, 7, 8, 9, 10, 11, 12});
  const std::vector<Tensor> parts{a, b};
  const Tensor c = concat_channels(parts);
  CHECK(c.shape() == Shape{2, 3, 1, 2});
  CHECK(c == Tensor({2, 3, 1, 2}, {1, 2, 5, 6, 7, 8, 3, 4, 9, 10, 11, 12}));
  CHECK(split_channels(c, {1, 2}) == parts);
}

TEST_CASE("zero_pad2d surrounds with zeros") {
  const Tensor x({1, 1, 1}, {5});
  const Tensor p = zero_pad2d(x, 1);
  CHECK(p.shape() == Shape{1, 3, 3});
  CHECK(sum(p) == 5);
  CHECK(p.at(0, 1, 1) == 5);
}
