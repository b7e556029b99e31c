#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gknet/activation.hpp"
#include "gknet/blocks.hpp"
#include "gknet/network.hpp"

namespace gknet {

struct ConvSpec {
  std::size_t filters = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  Activation act = Activation::kRelu;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct PoolSpec {
  PoolMode mode = PoolMode::kMax;
  std::size_t kernel = 2;
  std::size_t stride = 2;
  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

struct GlobalAvgPoolSpec {
  friend bool operator==(const GlobalAvgPoolSpec&, const GlobalAvgPoolSpec&) = default;
};

struct FlattenSpec {
  friend bool operator==(const FlattenSpec&, const FlattenSpec&) = default;
};

struct DenseSpec {
  std::size_t units = 1;
  Activation act = Activation::kRelu;
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

struct DropoutSpec {
  double rate = 0.5;
  friend bool operator==(const DropoutSpec&, const DropoutSpec&) = default;
};

struct InceptionSpec {
  InceptionWidths widths;
  friend bool operator==(const InceptionSpec&, const InceptionSpec&) = default;
};

struct ResidualSpec {
  std::size_t channels = 1;
  friend bool operator==(const ResidualSpec&, const ResidualSpec&) = default;
};

struct DenseBlockSpec {
  std::size_t layers = 1;
  std::size_t growth = 1;
  friend bool operator==(const DenseBlockSpec&, const DenseBlockSpec&) = default;
};

/// Linear projection to `classes` outputs followed by softmax.
struct SoftmaxSpec {
  std::size_t classes = 2;
  friend bool operator==(const SoftmaxSpec&, const SoftmaxSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, PoolSpec, GlobalAvgPoolSpec, FlattenSpec, DenseSpec, DropoutSpec,
                               InceptionSpec, ResidualSpec, DenseBlockSpec, SoftmaxSpec>;

struct ModelConfig {
  std::string name;
  std::size_t channels = 1;
  std::size_t resolution = 32;
  std::vector<LayerSpec> layers;

  std::size_t class_count() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Parse the line-oriented model format:
///
///   # comment
///   name <identifier>
///   input <channels> <resolution>
///   conv <filters> <kernel> <stride> <pad> <activation>
///   maxpool <kernel> <stride>
///   avgpool <kernel> <stride>
///   globalavgpool
///   flatten
///   dense <units> <activation>
///   dropout <p>
///   inception <b1> <b3r> <b3> <b5r> <b5> <pp>
///   residual <channels>
///   denseblock <n> <growth>
///   softmax <classes>
///
/// The result is validated (odd kernels, positive counts, p in [0,1), one
/// terminal softmax, shape chain). Errors are ParseError with a line number.
ModelConfig parse_model_spec(std::string_view text);

/// Canonical text form; parse_model_spec(render(c)) == c.
std::string render_model_spec(const ModelConfig& config);

/// Per-sample output shape of every layer, in order. Throws ShapeError
/// naming the failing layer.
std::vector<Shape> chain_shapes(const ModelConfig& config);

/// Build a seeded network. The rendered spec becomes its topology text.
Network instantiate(const ModelConfig& config, std::uint64_t seed);

/// Return a copy with the input and softmax heads replaced and the chain
/// re-validated.
ModelConfig with_io(ModelConfig config, std::size_t channels, std::size_t resolution, std::size_t classes);

/// Names of the built-in presets: mini-inception, mini-resnet, mini-densenet.
const std::vector<std::string>& preset_names();
ModelConfig builtin_preset(std::string_view name, std::size_t channels = 1, std::size_t resolution = 64,
                           std::size_t classes = 3);
std::vector<ModelConfig> builtin_presets(std::size_t channels = 1, std::size_t resolution = 64,
                                         std::size_t classes = 3);

}  // namespace gknet
