#include "gknet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "gknet/error.hpp"
#include "gknet/image.hpp"
#include "gknet/model_config.hpp"

namespace gknet {

namespace {

constexpr std::size_t kMagicSize = sizeof(kCheckpointMagic) - 1;

class Writer {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw CheckpointError("checkpoint is truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Network& network) {
  if (network.topology().empty()) throw CheckpointError("network has no topology text to save");
  Writer w;
  w.raw(kCheckpointMagic, kMagicSize);
  w.u64(network.seed());
  w.str(network.topology());
  w.u64(network.class_names().size());
  for (const auto& n : network.class_names()) w.str(n);
  std::ostringstream rng;
  rng << network.rng();
  w.str(rng.str());
  const auto params = network.parameters();
  w.u64(params.size());
  for (const Tensor* t : params) {
    w.u32(static_cast<std::uint32_t>(t->rank()));
    for (std::size_t e : t->shape()) w.u64(e);
    for (double v : t->data()) w.u64(std::bit_cast<std::uint64_t>(v));
  }
  return w.take();
}

Network deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagicSize || std::memcmp(bytes.data(), kCheckpointMagic, kMagicSize) != 0) {
    throw CheckpointError("not a GKPT1 checkpoint (bad magic)");
  }
  Reader r(bytes.subspan(kMagicSize));
  const std::uint64_t seed = r.u64();
  const std::string topology = r.str();
  std::vector<std::string> classes;
  const std::uint64_t class_count = r.u64();
  for (std::uint64_t i = 0; i < class_count; ++i) classes.push_back(r.str());
  const std::string rng_state = r.str();

  Network net = [&] {
    try {
      return instantiate(parse_model_spec(topology), seed);
    } catch (const Error& e) {
      throw CheckpointError(std::string("checkpoint topology is invalid: ") + e.what());
    }
  }();
  if (!classes.empty()) {
    try {
      net.set_class_names(classes);
    } catch (const Error& e) {
      throw CheckpointError(e.what());
    }
  }
  std::istringstream rng_in(rng_state);
  rng_in >> net.rng();
  if (!rng_in) throw CheckpointError("checkpoint generator state is malformed");

  const auto params = net.parameters();
  if (r.u64() != params.size()) throw CheckpointError("checkpoint tensor count does not match its topology");
  for (Tensor* t : params) {
    const std::uint32_t rank = r.u32();
    Shape shape(rank);
    for (auto& e : shape) e = r.u64();
    if (shape != t->shape()) {
      throw CheckpointError("checkpoint tensor " + shape_string(shape) + " does not match " + shape_string(t->shape()));
    }
    auto raw = r.bytes(t->size() * 8);
    auto dst = t->data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      std::uint64_t v = 0;
      for (int b = 0; b < 8; ++b) v |= std::uint64_t{raw[i * 8 + b]} << (8 * b);
      dst[i] = std::bit_cast<double>(v);
    }
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint payload");
  return net;
}

void save_checkpoint(const Network& network, const std::filesystem::path& path) {
  try {
    write_file(path, serialize_checkpoint(network));
  } catch (const IngestError& e) {
    throw CheckpointError(e.what());
  }
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const IngestError& e) {
    throw CheckpointError(e.what());
  }
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace gknet
