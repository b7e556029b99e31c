#include "gknet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gknet/error.hpp"
#include "gknet/image.hpp"

namespace fs = std::filesystem;

namespace gknet {

const std::vector<std::string>& synth_class_names() {
  static const std::vector<std::string> names{"c0_disk", "c1_bands", "c2_gradient", "c3_vbands", "c4_checker"};
  return names;
}

namespace {

double pattern_value(std::size_t class_id, double x, double y, double r, const std::vector<double>& p) {
  switch (class_id) {
    case 0: {
      const double dx = x - p[0];
      const double dy = y - p[1];
      const double d = std::sqrt(dx * dx + dy * dy);
      return d <= p[2] ? p[3] : p[4];
    }
    case 1: {
      const double phase = std::fmod(y + p[1], p[0]);
      return phase < p[0] / 2 ? p[2] : p[3];
    }
    case 2: {
      const double t = (x + y) / (2.0 * (r - 1.0));
      return p[0] + (p[1] - p[0]) * t;
    }
    case 3: {
      const double phase = std::fmod(x + p[1], p[0]);
      return phase < p[0] / 2 ? p[2] : p[3];
    }
    default: {
      const auto cx = static_cast<long>(std::floor((x + p[1]) / p[0]));
      const auto cy = static_cast<long>(std::floor((y + p[1]) / p[0]));
      return ((cx + cy) & 1) ? p[2] : p[3];
    }
  }
}

}  // namespace

Tensor synth_image(std::size_t class_id, std::size_t resolution, std::mt19937_64& rng, double noise_sigma) {
  if (class_id >= kSynthMaxClasses) throw ConfigError("synthetic class id out of range");
  if (resolution < 4) throw ConfigError("synthetic resolution must be at least 4");
  const double r = static_cast<double>(resolution);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  // Background level and pattern contrast vary per image so the classes
  // overlap in brightness and only the spatial layout separates them.
  const double base = between(40, 160);
  const double contrast = between(25, 90);
  std::vector<double> p;
  switch (class_id) {
    case 0:
      p = {r / 2 + between(-r / 10, r / 10), r / 2 + between(-r / 10, r / 10), between(0.2, 0.3) * r,
           base + contrast, base};
      break;
    case 1:
    case 3:
    case 4:
      p = {between(0.2, 0.35) * r, between(0, r), base + contrast, base};
      break;
    default:
      p = {base, base + contrast};
      break;
  }

  Tensor img({1, resolution, resolution});
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  for (std::size_t y = 0; y < resolution; ++y) {
    for (std::size_t x = 0; x < resolution; ++x) {
      double v = pattern_value(class_id, static_cast<double>(x), static_cast<double>(y), r, p);
      if (noise_sigma > 0) v += noise(rng);
      img.at(0, y, x) = std::clamp(std::round(v), 0.0, 255.0);
    }
  }
  return img;
}

std::size_t synth_dataset(const fs::path& root, const SynthOptions& options) {
  if (options.classes < 1 || options.classes > kSynthMaxClasses) {
    throw ConfigError("synthetic class count must lie in [1, " + std::to_string(kSynthMaxClasses) + "]");
  }
  if (options.per_class == 0) throw ConfigError("per-class count must be positive");
  if (options.resolution < 4) throw ConfigError("synthetic resolution must be at least 4");

  struct Split {
    fs::path dir;
    std::size_t count;
    std::uint32_t id;
  };
  std::vector<Split> splits;
  if (options.val_per_class > 0) {
    splits.push_back({root / "train", options.per_class, 0});
    splits.push_back({root / "val", options.val_per_class, 1});
  } else {
    splits.push_back({root, options.per_class, 0});
  }

  std::size_t written = 0;
  for (const auto& split : splits) {
    for (std::size_t c = 0; c < options.classes; ++c) {
      const fs::path dir = split.dir / synth_class_names()[c];
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IngestError("cannot create " + dir.string() + ": " + ec.message());
      for (std::size_t i = 0; i < split.count; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          split.id, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);
        const Tensor img = synth_image(c, options.resolution, rng, options.noise_sigma);
        char name[32];
        std::snprintf(name, sizeof name, "img_%05zu.pgm", i);
        write_file(dir / name, encode_pnm(img));
        ++written;
      }
    }
  }
  return written;
}

}  // namespace gknet
