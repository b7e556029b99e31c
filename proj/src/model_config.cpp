#include "gknet/model_config.hpp"

#include <charconv>
#include <sstream>

#include "gknet/error.hpp"

namespace gknet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct LineParser {
  int line;
  std::vector<std::string> tokens;

  void arity(std::size_t n) const {
    if (tokens.size() != n + 1) {
      throw ParseError(line, "'" + tokens[0] + "' takes " + std::to_string(n) + " argument(s), got " +
                                 std::to_string(tokens.size() - 1));
    }
  }

  std::size_t count(std::size_t i, const char* what, bool allow_zero = false) const {
    const std::string& s = tokens.at(i);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(line, std::string(what) + " must be a non-negative integer, got '" + s + "'");
    }
    if (v == 0 && !allow_zero) throw ParseError(line, std::string(what) + " must be positive");
    return v;
  }

  std::size_t kernel(std::size_t i) const {
    const std::size_t k = count(i, "kernel");
    if (k % 2 == 0) throw ParseError(line, "kernel size must be odd, got " + std::to_string(k));
    return k;
  }

  Activation act(std::size_t i) const {
    try {
      return parse_activation(tokens.at(i));
    } catch (const ConfigError& e) {
      throw ParseError(line, e.what());
    }
  }

  double rate(std::size_t i) const {
    const std::string& s = tokens.at(i);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(line, "dropout rate must be a number, got '" + s + "'");
    }
    if (!(v >= 0.0 && v < 1.0)) throw ParseError(line, "dropout rate must lie in [0, 1), got " + s);
    return v;
  }
};

LayerSpec parse_layer(const LineParser& p) {
  const std::string& kind = p.tokens[0];
  if (kind == "conv") {
    p.arity(5);
    return ConvSpec{p.count(1, "filters"), p.kernel(2), p.count(3, "stride"), p.count(4, "pad", true), p.act(5)};
  }
  if (kind == "maxpool" || kind == "avgpool") {
    p.arity(2);
    return PoolSpec{kind == "maxpool" ? PoolMode::kMax : PoolMode::kAvg, p.count(1, "pool size"),
                    p.count(2, "stride")};
  }
  if (kind == "globalavgpool") {
    p.arity(0);
    return GlobalAvgPoolSpec{};
  }
  if (kind == "flatten") {
    p.arity(0);
    return FlattenSpec{};
  }
  if (kind == "dense") {
    p.arity(2);
    return DenseSpec{p.count(1, "units"), p.act(2)};
  }
  if (kind == "dropout") {
    p.arity(1);
    return DropoutSpec{p.rate(1)};
  }
  if (kind == "inception") {
    p.arity(6);
    return InceptionSpec{{p.count(1, "b1"), p.count(2, "b3r"), p.count(3, "b3"), p.count(4, "b5r"),
                          p.count(5, "b5"), p.count(6, "pp")}};
  }
  if (kind == "residual") {
    p.arity(1);
    return ResidualSpec{p.count(1, "channels")};
  }
  if (kind == "denseblock") {
    p.arity(2);
    return DenseBlockSpec{p.count(1, "layers"), p.count(2, "growth")};
  }
  if (kind == "softmax") {
    p.arity(1);
    return SoftmaxSpec{p.count(1, "classes")};
  }
  throw ParseError(p.line, "unknown layer kind '" + kind + "'");
}

void require_map(const Shape& in, const char* what) {
  if (in.size() != 3) {
    throw ShapeError(std::string(what) + " needs a [C,H,W] input, got " + shape_string(in));
  }
}

Shape next_shape(const LayerSpec& spec, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const ConvSpec& s) -> Shape {
            require_map(in, "conv");
            return {s.filters, conv_output_extent(in[1], s.kernel, s.stride, s.pad),
                    conv_output_extent(in[2], s.kernel, s.stride, s.pad)};
          },
          [&](const PoolSpec& s) -> Shape {
            require_map(in, "pool");
            return {in[0], conv_output_extent(in[1], s.kernel, s.stride), conv_output_extent(in[2], s.kernel, s.stride)};
          },
          [&](const GlobalAvgPoolSpec&) -> Shape {
            require_map(in, "globalavgpool");
            return {in[0]};
          },
          [&](const FlattenSpec&) -> Shape { return {shape_size(in)}; },
          [&](const DenseSpec& s) -> Shape { return {s.units}; },
          [&](const DropoutSpec&) -> Shape { return in; },
          [&](const InceptionSpec& s) -> Shape {
            require_map(in, "inception");
            return {s.widths.total(), in[1], in[2]};
          },
          [&](const ResidualSpec& s) -> Shape {
            require_map(in, "residual");
            if (in[0] != s.channels) {
              throw ShapeError("residual block declares " + std::to_string(s.channels) + " channels but receives " +
                               std::to_string(in[0]));
            }
            return in;
          },
          [&](const DenseBlockSpec& s) -> Shape {
            require_map(in, "denseblock");
            return {in[0] + s.layers * s.growth, in[1], in[2]};
          },
          [&](const SoftmaxSpec& s) -> Shape { return {s.classes}; },
      },
      spec);
}

void check_softmax(const ModelConfig& config, const std::vector<int>* lines) {
  auto line_of = [&](std::size_t i) { return lines ? (*lines)[i] : static_cast<int>(i + 1); };
  std::size_t softmax_count = 0;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    if (!std::holds_alternative<SoftmaxSpec>(config.layers[i])) continue;
    ++softmax_count;
    if (i + 1 != config.layers.size()) {
      if (lines) throw ParseError(line_of(i), "softmax must be the last layer");
      throw ShapeError("softmax must be the last layer");
    }
  }
  if (softmax_count == 0) {
    const int last = lines && !lines->empty() ? lines->back() : 0;
    if (lines) throw ParseError(last, "model has no terminal softmax layer");
    throw ShapeError("model has no terminal softmax layer");
  }
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string render_layer(const LayerSpec& spec) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const ConvSpec& s) {
                   os << "conv " << s.filters << ' ' << s.kernel << ' ' << s.stride << ' ' << s.pad << ' '
                      << activation_name(s.act);
                 },
                 [&](const PoolSpec& s) {
                   os << (s.mode == PoolMode::kMax ? "maxpool " : "avgpool ") << s.kernel << ' ' << s.stride;
                 },
                 [&](const GlobalAvgPoolSpec&) { os << "globalavgpool"; },
                 [&](const FlattenSpec&) { os << "flatten"; },
                 [&](const DenseSpec& s) { os << "dense " << s.units << ' ' << activation_name(s.act); },
                 [&](const DropoutSpec& s) { os << "dropout " << fmt_double(s.rate); },
                 [&](const InceptionSpec& s) {
                   const auto& w = s.widths;
                   os << "inception " << w.b1 << ' ' << w.b3_reduce << ' ' << w.b3 << ' ' << w.b5_reduce << ' '
                      << w.b5 << ' ' << w.pool_proj;
                 },
                 [&](const ResidualSpec& s) { os << "residual " << s.channels; },
                 [&](const DenseBlockSpec& s) { os << "denseblock " << s.layers << ' ' << s.growth; },
                 [&](const SoftmaxSpec& s) { os << "softmax " << s.classes; },
             },
             spec);
  return os.str();
}

}  // namespace

std::size_t ModelConfig::class_count() const {
  if (layers.empty()) return 0;
  if (const auto* s = std::get_if<SoftmaxSpec>(&layers.back())) return s->classes;
  return 0;
}

std::vector<Shape> chain_shapes(const ModelConfig& config) {
  if (config.channels == 0 || config.resolution == 0) throw ShapeError("input extents must be positive");
  check_softmax(config, nullptr);
  std::vector<Shape> out;
  Shape current{config.channels, config.resolution, config.resolution};
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    try {
      current = next_shape(config.layers[i], current);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + render_layer(config.layers[i]) + "): " + e.what());
    }
    out.push_back(current);
  }
  return out;
}

ModelConfig parse_model_spec(std::string_view text) {
  ModelConfig config;
  std::vector<int> lines;
  bool have_input = false;
  int line_no = 0;
  int input_line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    LineParser p{line_no, tokens};
    if (tokens[0] == "name") {
      p.arity(1);
      if (!config.name.empty()) throw ParseError(line_no, "duplicate name line");
      config.name = tokens[1];
    } else if (tokens[0] == "input") {
      p.arity(2);
      if (have_input) throw ParseError(line_no, "duplicate input line");
      if (!config.layers.empty()) throw ParseError(line_no, "input must precede the layers");
      config.channels = p.count(1, "channels");
      config.resolution = p.count(2, "resolution");
      have_input = true;
      input_line = line_no;
    } else {
      if (!have_input) throw ParseError(line_no, "layers must follow an 'input <channels> <resolution>' line");
      config.layers.push_back(parse_layer(p));
      lines.push_back(line_no);
    }
  }
  if (!have_input) throw ParseError(line_no, "missing 'input <channels> <resolution>' line");
  if (config.layers.empty()) throw ParseError(input_line, "model has no layers");
  check_softmax(config, &lines);

  Shape current{config.channels, config.resolution, config.resolution};
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    try {
      current = next_shape(config.layers[i], current);
    } catch (const ShapeError& e) {
      throw ParseError(lines[i], e.what());
    }
  }
  return config;
}

std::string render_model_spec(const ModelConfig& config) {
  std::ostringstream os;
  if (!config.name.empty()) os << "name " << config.name << '\n';
  os << "input " << config.channels << ' ' << config.resolution << '\n';
  for (const auto& layer : config.layers) os << render_layer(layer) << '\n';
  return os.str();
}

Network instantiate(const ModelConfig& config, std::uint64_t seed) {
  chain_shapes(config);
  std::vector<LayerPtr> layers;
  Shape current{config.channels, config.resolution, config.resolution};
  for (const auto& spec : config.layers) {
    const Shape in = current;
    std::visit(Overloaded{
                   [&](const ConvSpec& s) {
                     layers.push_back(std::make_unique<Conv2D>(ConvParams{in[0], s.filters, s.kernel, s.stride, s.pad, s.act}));
                   },
                   [&](const PoolSpec& s) { layers.push_back(std::make_unique<Pool2D>(s.mode, s.kernel, s.stride)); },
                   [&](const GlobalAvgPoolSpec&) { layers.push_back(std::make_unique<GlobalAvgPool>()); },
                   [&](const FlattenSpec&) { layers.push_back(std::make_unique<Flatten>()); },
                   [&](const DenseSpec& s) { layers.push_back(std::make_unique<Dense>(shape_size(in), s.units, s.act)); },
                   [&](const DropoutSpec& s) { layers.push_back(std::make_unique<Dropout>(s.rate)); },
                   [&](const InceptionSpec& s) { layers.push_back(std::make_unique<InceptionBlock>(in[0], s.widths)); },
                   [&](const ResidualSpec& s) { layers.push_back(std::make_unique<ResidualBlock>(s.channels)); },
                   [&](const DenseBlockSpec& s) {
                     layers.push_back(std::make_unique<DenseBlock>(in[0], s.layers, s.growth));
                   },
                   [&](const SoftmaxSpec& s) {
                     layers.push_back(std::make_unique<Dense>(shape_size(in), s.classes, Activation::kIdentity));
                     layers.push_back(std::make_unique<Softmax>());
                   },
               },
               spec);
    current = next_shape(spec, current);
  }
  Network net({config.channels, config.resolution, config.resolution}, std::move(layers), seed);
  net.set_topology(render_model_spec(config));
  return net;
}

ModelConfig with_io(ModelConfig config, std::size_t channels, std::size_t resolution, std::size_t classes) {
  config.channels = channels;
  config.resolution = resolution;
  if (!config.layers.empty()) {
    if (auto* s = std::get_if<SoftmaxSpec>(&config.layers.back())) s->classes = classes;
  }
  if (channels == 0 || resolution == 0 || classes == 0) throw ConfigError("input and class counts must be positive");
  try {
    chain_shapes(config);
  } catch (const ShapeError& e) {
    throw ConfigError("model does not fit " + std::to_string(channels) + "x" + std::to_string(resolution) + "x" +
                      std::to_string(resolution) + " input: " + e.what());
  }
  return config;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"mini-inception", "mini-resnet", "mini-densenet"};
  return names;
}

ModelConfig builtin_preset(std::string_view name, std::size_t channels, std::size_t resolution,
                           std::size_t classes) {
  ModelConfig c;
  c.name = std::string(name);
  c.channels = channels;
  c.resolution = resolution;
  const ConvSpec stem{16, 3, 2, 1, Activation::kRelu};
  const PoolSpec pool{PoolMode::kMax, 2, 2};
  if (name == "mini-inception") {
    c.layers = {stem,
                pool,
                InceptionSpec{{8, 8, 12, 4, 4, 4}},
                pool,
                InceptionSpec{{12, 12, 16, 4, 8, 8}},
                GlobalAvgPoolSpec{},
                SoftmaxSpec{classes}};
  } else if (name == "mini-resnet") {
    c.layers = {stem, pool, ResidualSpec{16}, ResidualSpec{16}, ResidualSpec{16}, GlobalAvgPoolSpec{}, SoftmaxSpec{classes}};
  } else if (name == "mini-densenet") {
    c.layers = {stem,
                pool,
                DenseBlockSpec{3, 8},
                ConvSpec{20, 1, 1, 0, Activation::kRelu},
                PoolSpec{PoolMode::kAvg, 2, 2},
                DenseBlockSpec{3, 8},
                GlobalAvgPoolSpec{},
                SoftmaxSpec{classes}};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected mini-inception, mini-resnet or mini-densenet)");
  }
  chain_shapes(c);
  return c;
}

std::vector<ModelConfig> builtin_presets(std::size_t channels, std::size_t resolution, std::size_t classes) {
  std::vector<ModelConfig> out;
  for (const auto& n : preset_names()) out.push_back(builtin_preset(n, channels, resolution, classes));
  return out;
}

}  // namespace gknet
