#include "gknet/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace gknet {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint8_t paeth(std::uint8_t a, std::uint8_t b, std::uint8_t c) {
  const int p = int{a} + int{b} - int{c};
  const int pa = std::abs(p - int{a}), pb = std::abs(p - int{b}), pc = std::abs(p - int{c});
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

std::vector<std::uint8_t> inflate_all(const std::vector<std::uint8_t>& compressed, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw DecodeError("png: zlib init failed");
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = out.size() - zs.avail_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) {
    throw DecodeError("png: image data is truncated or corrupt");
  }
  return out;
}

std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void require_image(const Tensor& image) {
  if (image.rank() != 3 || (image.extent(0) != 1 && image.extent(0) != 3)) {
    throw ShapeError("image tensor must be [1,H,W] or [3,H,W], got " + shape_string(image.shape()));
  }
}

}  // namespace

Tensor decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    throw DecodeError("png: bad signature");
  }
  std::size_t pos = 8;
  std::uint32_t width = 0, height = 0;
  int depth = 0, color = -1;
  bool seen_header = false, seen_end = false;
  std::vector<std::uint8_t> idat;
  std::vector<std::array<std::uint8_t, 3>> palette;
  while (!seen_end) {
    if (pos + 8 > bytes.size()) throw DecodeError("png: truncated chunk header");
    const std::uint32_t len = read_be32(&bytes[pos]);
    const std::uint8_t* type = &bytes[pos + 4];
    if (len > bytes.size() || pos + 12 + len > bytes.size()) throw DecodeError("png: truncated chunk");
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t crc = read_be32(data + len);
    if (crc32(crc32(0L, Z_NULL, 0), type, 4 + len) != crc) throw DecodeError("png: chunk CRC mismatch");
    const std::string tag(reinterpret_cast<const char*>(type), 4);
    if (tag == "IHDR") {
      if (len != 13) throw DecodeError("png: bad IHDR");
      width = read_be32(data);
      height = read_be32(data + 4);
      depth = data[8];
      color = data[9];
      if (data[12] != 0) throw DecodeError("png: interlaced images are not supported");
      if (width == 0 || height == 0) throw DecodeError("png: empty image");
      seen_header = true;
    } else if (tag == "PLTE") {
      for (std::uint32_t i = 0; i + 2 < len; i += 3) palette.push_back({data[i], data[i + 1], data[i + 2]});
    } else if (tag == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (tag == "IEND") {
      seen_end = true;
    }
    pos += 12 + len;
  }
  if (!seen_header) throw DecodeError("png: missing IHDR");

  std::size_t samples = 0;
  switch (color) {
    case 0: samples = 1; break;
    case 2: samples = 3; break;
    case 3: samples = 1; break;
    case 4: samples = 2; break;
    case 6: samples = 4; break;
    default: throw DecodeError("png: unsupported color type " + std::to_string(color));
  }
  if (!(depth == 8 || (depth == 16 && color != 3))) {
    throw DecodeError("png: unsupported bit depth " + std::to_string(depth));
  }
  if (color == 3 && palette.empty()) throw DecodeError("png: palette image without PLTE");
  const std::size_t bpp = samples * static_cast<std::size_t>(depth / 8);
  const std::size_t stride = width * bpp;
  std::vector<std::uint8_t> raw = inflate_all(idat, height * (stride + 1));

  std::vector<std::uint8_t> pixels(height * stride);
  for (std::size_t y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* dst = &pixels[y * stride];
    const std::uint8_t* prev = y ? &pixels[(y - 1) * stride] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const std::uint8_t a = i >= bpp ? dst[i - bpp] : 0;
      const std::uint8_t b = prev ? prev[i] : 0;
      const std::uint8_t c = (prev && i >= bpp) ? prev[i - bpp] : 0;
      std::uint8_t pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = static_cast<std::uint8_t>((int{a} + int{b}) / 2); break;
        case 4: pred = paeth(a, b, c); break;
        default: throw DecodeError("png: bad filter type " + std::to_string(filter));
      }
      dst[i] = static_cast<std::uint8_t>(src[i] + pred);
    }
  }

  const std::size_t channels = (color == 2 || color == 3 || color == 6) ? 3 : 1;
  const std::size_t step = static_cast<std::size_t>(depth / 8);
  Tensor out({channels, height, width});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::uint8_t* px = &pixels[y * stride + x * bpp];
      if (color == 3) {
        if (px[0] >= palette.size()) throw DecodeError("png: palette index out of range");
        for (std::size_t c = 0; c < 3; ++c) out.at(c, y, x) = palette[px[0]][c];
      } else {
        for (std::size_t c = 0; c < channels; ++c) out.at(c, y, x) = px[c * step];
      }
    }
  }
  return out;
}

Tensor decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw DecodeError("pnm: truncated header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      if (v > (1u << 24)) throw DecodeError("pnm: header value too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DecodeError("pnm: expected binary P5/P6 magic");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  const std::size_t width = read_uint();
  const std::size_t height = read_uint();
  const std::size_t maxval = read_uint();
  if (width == 0 || height == 0) throw DecodeError("pnm: empty image");
  if (maxval == 0 || maxval > 255) throw DecodeError("pnm: only 8-bit maxval is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("pnm: truncated header");
  ++pos;
  const std::size_t need = width * height * channels;
  if (bytes.size() - pos < need) throw DecodeError("pnm: truncated pixel data");
  Tensor out({channels, height, width});
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c) out.at(c, y, x) = bytes[pos++];
  return out;
}

Tensor decode_image_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes);
  throw DecodeError("unsupported image format");
}

Tensor decode_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image_bytes(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Tensor& image) {
  require_image(image);
  const std::size_t channels = image.extent(0), height = image.extent(1), width = image.extent(2);
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (width * channels + 1));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c) raw.push_back(clamp_byte(image.at(c, y, x)));
  }
  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_len);
  if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw DecodeError("png: compression failed");
  }
  packed.resize(packed_len);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  auto chunk = [&](const char* tag, const std::vector<std::uint8_t>& body) {
    put_be32(out, static_cast<std::uint32_t>(body.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), tag, tag + 4);
    out.insert(out.end(), body.begin(), body.end());
    put_be32(out, static_cast<std::uint32_t>(
                      crc32(crc32(0L, Z_NULL, 0), &out[start], static_cast<uInt>(4 + body.size()))));
  };
  std::vector<std::uint8_t> header;
  put_be32(header, static_cast<std::uint32_t>(width));
  put_be32(header, static_cast<std::uint32_t>(height));
  header.insert(header.end(), {8, static_cast<std::uint8_t>(channels == 3 ? 2 : 0), 0, 0, 0});
  chunk("IHDR", header);
  chunk("IDAT", packed);
  chunk("IEND", {});
  return out;
}

std::vector<std::uint8_t> encode_pnm(const Tensor& image) {
  require_image(image);
  const std::size_t channels = image.extent(0), height = image.extent(1), width = image.extent(2);
  const std::string header = std::string(channels == 1 ? "P5" : "P6") + "\n" + std::to_string(width) +
                             " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c) out.push_back(clamp_byte(image.at(c, y, x)));
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IngestError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IngestError("failed writing " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IngestError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

Tensor resize_bilinear(const Tensor& image, std::size_t target) {
  return resize_bilinear(image, target, target);
}

Tensor resize_bilinear(const Tensor& image, std::size_t target_h, std::size_t target_w) {
  if (image.rank() != 3) throw ShapeError("resize expects [C,H,W]");
  if (target_h == 0 || target_w == 0) throw ShapeError("resize target must be positive");
  const std::size_t channels = image.extent(0), h = image.extent(1), w = image.extent(2);
  if (h == target_h && w == target_w) return image;
  auto source = [](std::size_t i, std::size_t src, std::size_t dst) {
    return dst == 1 ? 0.0
                    : static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
  };
  Tensor out({channels, target_h, target_w});
  for (std::size_t y = 0; y < target_h; ++y) {
    const double sy = source(y, h, target_h);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < target_w; ++x) {
      const double sx = source(x, w, target_w);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < channels; ++c) {
        const double top = image.at(c, y0, x0) + (image.at(c, y0, x1) - image.at(c, y0, x0)) * fx;
        const double bottom = image.at(c, y1, x0) + (image.at(c, y1, x1) - image.at(c, y1, x0)) * fx;
        out.at(c, y, x) = top + (bottom - top) * fy;
      }
    }
  }
  return out;
}

Tensor convert_channels(const Tensor& image, std::size_t channels) {
  require_image(image);
  if (channels != 1 && channels != 3) throw ConfigError("channel count must be 1 or 3");
  const std::size_t have = image.extent(0), h = image.extent(1), w = image.extent(2);
  if (have == channels) return image;
  Tensor out({channels, h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (channels == 1) {
        out.at(0, y, x) = 0.299 * image.at(0, y, x) + 0.587 * image.at(1, y, x) + 0.114 * image.at(2, y, x);
      } else {
        for (std::size_t c = 0; c < 3; ++c) out.at(c, y, x) = image.at(0, y, x);
      }
    }
  }
  return out;
}

}  // namespace gknet
