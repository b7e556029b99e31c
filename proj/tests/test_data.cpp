#include <doctest.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "gknet/dataset.hpp"
#include "gknet/error.hpp"
#include "gknet/image.hpp"
#include "gknet/synth.hpp"
#include "gradcheck.hpp"
#include "temp_dir.hpp"

using namespace gknet;
using gknet::testing::random_tensor;
using gknet::testing::TempDir;
namespace fs = std::filesystem;

namespace {

using Bytes = std::vector<std::uint8_t>;

void put32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void chunk(Bytes& out, const char* type, const Bytes& data) {
  put32(out, static_cast<std::uint32_t>(data.size()));
  Bytes body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

// Encode raw scanlines with the given per-row filter types (reference
// encoder written from the PNG filter definitions).
Bytes filter_rows(const std::vector<Bytes>& rows, const std::vector<int>& filters, std::size_t bpp) {
  Bytes out;
  Bytes prev(rows.front().size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Bytes& row = rows[r];
    const int f = filters[r % filters.size()];
    out.push_back(static_cast<std::uint8_t>(f));
    for (std::size_t i = 0; i < row.size(); ++i) {
      const int a = i >= bpp ? row[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      int pred = 0;
      if (f == 1) pred = a;
      if (f == 2) pred = b;
      if (f == 3) pred = (a + b) / 2;
      if (f == 4) pred = paeth(a, b, c);
      out.push_back(static_cast<std::uint8_t>(row[i] - pred));
    }
    prev = row;
  }
  return out;
}

Bytes make_png(std::uint32_t w, std::uint32_t h, int depth, int color, const Bytes& filtered,
               const Bytes& palette = {}, int interlace = 0) {
  Bytes png{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  Bytes ihdr;
  put32(ihdr, w);
  put32(ihdr, h);
  ihdr.insert(ihdr.end(), {static_cast<std::uint8_t>(depth), static_cast<std::uint8_t>(color), 0, 0,
                           static_cast<std::uint8_t>(interlace)});
  chunk(png, "IHDR", ihdr);
  if (!palette.empty()) chunk(png, "PLTE", palette);
  uLongf len = compressBound(static_cast<uLong>(filtered.size()));
  Bytes z(len);
  compress(z.data(), &len, filtered.data(), static_cast<uLong>(filtered.size()));
  z.resize(len);
  // Split the stream across two IDAT chunks.
  const std::size_t half = z.size() / 2;
  chunk(png, "IDAT", Bytes(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(half)));
  chunk(png, "IDAT", Bytes(z.begin() + static_cast<std::ptrdiff_t>(half), z.end()));
  chunk(png, "IEND", {});
  return png;
}

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

void write_pgm(const fs::path& p, std::size_t side, std::uint8_t value) {
  write_file(p, encode_pnm(Tensor({1, side, side}, value)));
}

}  // namespace

TEST_CASE("PGM decoding") {
  Bytes pgm = to_bytes("P5\n# comment\n2 2\n255\n");
  pgm.insert(pgm.end(), {0, 128, 255, 64});
  CHECK(decode_image_bytes(pgm) == Tensor({1, 2, 2}, {0, 128, 255, 64}));

  CHECK_THROWS_AS(decode_image_bytes(to_bytes("P5\n2 ")), DecodeError);
  Bytes short_body = to_bytes("P5 2 2 255\n");
  short_body.push_back(1);
  CHECK_THROWS_AS(decode_image_bytes(short_body), DecodeError);
  CHECK_THROWS_AS(decode_image_bytes(to_bytes("GIF89a")), DecodeError);
  CHECK_THROWS_AS(decode_image_bytes(Bytes{}), DecodeError);
}

TEST_CASE("PPM decoding keeps channel planes") {
  Bytes ppm = to_bytes("P6 2 1 255\n");
  ppm.insert(ppm.end(), {10, 20, 30, 40, 50, 60});
  CHECK(decode_image_bytes(ppm) == Tensor({3, 1, 2}, {10, 40, 20, 50, 30, 60}));
}

TEST_CASE("PNG and PNM round trips") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> px(0, 255);
  for (std::size_t c : {1, 3}) {
    Tensor img({c, 5, 7});
    for (double& v : img.data()) v = px(rng);
    CHECK(decode_image_bytes(encode_png(img)) == img);
    CHECK(decode_image_bytes(encode_pnm(img)) == img);
  }
}

TEST_CASE("PNG filters, color types and depths") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> px(0, 255);
  const std::uint32_t w = 5, h = 6;

  SUBCASE("grayscale with every filter") {
    std::vector<Bytes> rows(h, Bytes(w));
    Tensor expect({1, h, w});
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) expect.at(0, y, x) = rows[y][x] = static_cast<std::uint8_t>(px(rng));
    const Bytes png = make_png(w, h, 8, 0, filter_rows(rows, {0, 1, 2, 3, 4}, 1));
    CHECK(decode_png(png) == expect);
  }
  SUBCASE("RGBA drops alpha") {
    std::vector<Bytes> rows(h, Bytes(w * 4));
    Tensor expect({3, h, w});
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        for (int c = 0; c < 4; ++c) {
          rows[y][x * 4 + c] = static_cast<std::uint8_t>(px(rng));
          if (c < 3) expect.at(c, y, x) = rows[y][x * 4 + c];
        }
      }
    }
    CHECK(decode_png(make_png(w, h, 8, 6, filter_rows(rows, {4, 3, 2, 1}, 4))) == expect);
  }
  SUBCASE("gray + alpha") {
    std::vector<Bytes> rows(h, Bytes(w * 2));
    Tensor expect({1, h, w});
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        rows[y][x * 2] = static_cast<std::uint8_t>(px(rng));
        rows[y][x * 2 + 1] = 255;
        expect.at(0, y, x) = rows[y][x * 2];
      }
    }
    CHECK(decode_png(make_png(w, h, 8, 4, filter_rows(rows, {1, 4}, 2))) == expect);
  }
  SUBCASE("palette expands to RGB") {
    const Bytes palette{0, 0, 0, 255, 0, 0, 0, 255, 0, 10, 20, 30};
    std::vector<Bytes> rows(h, Bytes(w));
    Tensor expect({3, h, w});
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        const int idx = px(rng) % 4;
        rows[y][x] = static_cast<std::uint8_t>(idx);
        for (int c = 0; c < 3; ++c) expect.at(c, y, x) = palette[idx * 3 + c];
      }
    }
    CHECK(decode_png(make_png(w, h, 8, 3, filter_rows(rows, {0, 2}, 1), palette)) == expect);
  }
  SUBCASE("16-bit keeps the high byte") {
    std::vector<Bytes> rows(h, Bytes(w * 2));
    Tensor expect({1, h, w});
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        rows[y][x * 2] = static_cast<std::uint8_t>(px(rng));
        rows[y][x * 2 + 1] = static_cast<std::uint8_t>(px(rng));
        expect.at(0, y, x) = rows[y][x * 2];
      }
    }
    CHECK(decode_png(make_png(w, h, 16, 0, filter_rows(rows, {3, 4}, 2))) == expect);
  }
  SUBCASE("unsupported or corrupt input") {
    std::vector<Bytes> rows(h, Bytes(w, 7));
    const Bytes filtered = filter_rows(rows, {0}, 1);
    CHECK_THROWS_AS(decode_png(make_png(w, h, 8, 0, filtered, {}, 1)), DecodeError);
    Bytes bad_crc = make_png(w, h, 8, 0, filtered);
    bad_crc[30] ^= 0xFF;
    CHECK_THROWS_AS(decode_png(bad_crc), DecodeError);
    Bytes truncated = make_png(w, h, 8, 0, filtered);
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(decode_png(truncated), DecodeError);
  }
}

TEST_CASE("bilinear resize") {
  const Tensor small({1, 2, 2}, {0, 2, 2, 4});
  CHECK(resize_bilinear(small, 3) == Tensor({1, 3, 3}, {0, 1, 2, 1, 2, 3, 2, 3, 4}));
  CHECK(resize_bilinear(small, 2) == small);
  CHECK(resize_bilinear(Tensor({3, 5, 9}, 42.0), 7) == Tensor({3, 7, 7}, 42.0));

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor img = random_tensor({1, std::size_t(3 + trial % 5), std::size_t(4 + trial % 7)}, rng, 0, 255);
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    const Tensor out = resize_bilinear(img, 2 + trial);
    for (double v : out.data()) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }
}

TEST_CASE("channel conversion") {
  const Tensor rgb({3, 1, 1}, {100, 50, 200});
  CHECK(convert_channels(rgb, 1)[0] == doctest::Approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200));
  const Tensor gray({1, 1, 2}, {3, 9});
  CHECK(convert_channels(gray, 3) == Tensor({3, 1, 2}, {3, 9, 3, 9, 3, 9}));
  CHECK(convert_channels(gray, 1) == gray);
}

TEST_CASE("preprocessing") {
  Tensor img({1, 2, 3}, {0, 255, 17, 100, 3, 250});
  const Tensor r = preprocess(img, PreprocessMode::kRescale);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);
  for (double v : r.data()) CHECK((v >= 0.0 && v <= 1.0));

  const Tensor s = preprocess(img, PreprocessMode::kSamplewise);
  double mean = 0, var = 0;
  for (double v : s.data()) mean += v;
  mean /= 6;
  for (double v : s.data()) var += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(var / 6) - 1.0) < 1e-9);

  CHECK(preprocess(Tensor({1, 3, 3}, 77.0), PreprocessMode::kSamplewise) == Tensor({1, 3, 3}, 0.0));
  CHECK_THROWS_AS(parse_preprocess("zca"), ConfigError);
}

TEST_CASE("dataset scanning") {
  TempDir dir("scan");
  for (const char* cls : {"pneumonia", "normal", "covid"}) {
    fs::create_directories(dir.path / cls);
    write_pgm(dir.path / cls / "b.pgm", 4, 10);
    write_pgm(dir.path / cls / "a.pgm", 4, 20);
  }
  write_file(dir.path / "normal" / "notes.txt", to_bytes("ignored"));
  const DatasetIndex index = scan_dataset(dir.path);
  CHECK(index.classes == std::vector<std::string>{"covid", "normal", "pneumonia"});
  CHECK(index.samples.size() == 6);
  CHECK(std::is_sorted(index.samples.begin(), index.samples.end(),
                       [](const SampleRef& a, const SampleRef& b) { return a.path < b.path; }));
  CHECK(index.samples.front().label == 0);
  CHECK(index.class_counts() == std::vector<std::size_t>{2, 2, 2});
  CHECK(scan_dataset(dir.path) == index);

  fs::create_directories(dir.path / "empty");
  try {
    scan_dataset(dir.path);
    FAIL("expected an ingestion error");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("empty") != std::string::npos);
  }
  CHECK_THROWS_AS(scan_dataset(dir.path / "missing"), IngestError);
  TempDir bare("bare");
  CHECK_THROWS_AS(scan_dataset(bare.path), IngestError);
}

TEST_CASE("splits") {
  DatasetIndex index;
  index.classes = {"a", "b"};
  for (int i = 0; i < 30; ++i) index.samples.push_back({"a" + std::to_string(i), 0});
  for (int i = 0; i < 3; ++i) index.samples.push_back({"b" + std::to_string(i), 1});
  const DatasetSplits s = stratified_split(index, 0.1, 5);
  CHECK(s.train.samples.size() + s.val.samples.size() == 33);
  CHECK(s.val.class_counts() == std::vector<std::size_t>{3, 1});
  CHECK(s.train.class_counts() == std::vector<std::size_t>{27, 2});
  CHECK(stratified_split(index, 0.1, 5).val == s.val);

  TempDir dir("presplit");
  for (const char* split : {"train", "val"}) {
    for (const char* cls : {"x", "y"}) {
      fs::create_directories(dir.path / split / cls);
      write_pgm(dir.path / split / cls / "i.pgm", 3, 1);
    }
  }
  const DatasetSplits pre = load_splits(dir.path, 0.5, 1);
  CHECK(pre.presplit);
  CHECK(pre.train.samples.size() == 2);
  CHECK(pre.val.samples.size() == 2);
}

TEST_CASE("load_sample pipeline") {
  TempDir dir("load");
  Tensor rgb({3, 4, 4});
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<double>(i * 5 % 256);
  write_file(dir.path / "x.png", encode_png(rgb));
  const Tensor t = load_sample(dir.path / "x.png", {1, 8, PreprocessMode::kRescale});
  CHECK(t.shape() == Shape{1, 8, 8});
  for (double v : t.data()) CHECK((v >= 0.0 && v <= 1.0));
  CHECK_THROWS_AS(decode_image(dir.path / "absent.png"), IngestError);
}

TEST_CASE("batch iteration") {
  std::vector<Tensor> images;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    images.push_back(Tensor({1, 2, 2}, static_cast<double>(i)));
    labels.push_back(i % 3);
  }
  const Dataset data = Dataset::from_tensors({"a", "b", "c"}, images, labels);
  BatchIterator it(data, 4, 9, 1);
  std::vector<std::size_t> sizes;
  std::multiset<std::size_t> seen;
  while (auto b = it.next()) {
    sizes.push_back(b->labels.size());
    for (std::size_t k = 0; k < b->indices.size(); ++k) {
      seen.insert(b->indices[k]);
      CHECK(b->images.at(k, 0, 0, 0) == static_cast<double>(b->indices[k]));
      CHECK(b->labels[k] == labels[b->indices[k]]);
    }
  }
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
  CHECK(seen == std::multiset<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(it.batch_count() == 3);

  CHECK(epoch_order(10, 9, 1, true) == epoch_order(10, 9, 1, true));
  CHECK(epoch_order(10, 9, 1, true) != epoch_order(10, 10, 1, true));
  CHECK(epoch_order(10, 9, 1, true) != epoch_order(10, 9, 2, true));
  CHECK(epoch_order(4, 9, 1, false) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(BatchIterator(data, 0, 1), ConfigError);
}

TEST_CASE("synthetic corpus") {
  TempDir dir("synth");
  SynthOptions opt;
  opt.per_class = 5;
  opt.resolution = 16;
  CHECK(synth_dataset(dir.path / "a", opt) == 15);
  std::size_t dirs = 0, files = 0;
  for (const auto& d : fs::directory_iterator(dir.path / "a")) {
    ++dirs;
    for (const auto& f : fs::directory_iterator(d.path())) files += f.is_regular_file();
  }
  CHECK(dirs == 3);
  CHECK(files == 15);

  synth_dataset(dir.path / "b", opt);
  for (const auto& entry : fs::recursive_directory_iterator(dir.path / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = dir.path / "b" / fs::relative(entry.path(), dir.path / "a");
    CHECK(read_file(entry.path()) == read_file(twin));
  }
  CHECK(scan_dataset(dir.path / "a").classes == std::vector<std::string>{"c0_disk", "c1_bands", "c2_gradient"});

  opt.val_per_class = 2;
  CHECK(synth_dataset(dir.path / "c", opt) == 21);
  const DatasetSplits s = load_splits(dir.path / "c", 0.1, 1);
  CHECK(s.presplit);
  CHECK(s.val.samples.size() == 6);

  opt.classes = 6;
  CHECK_THROWS_AS(synth_dataset(dir.path / "d", opt), ConfigError);
}

// Images are standardised first so per-image brightness and contrast drop out.
TEST_CASE("nearest-centroid classifier separates the clean generators") {
  const std::size_t res = 32, k = 3, per_class = 60;
  auto draw = [&](std::size_t c, std::mt19937_64& r) {
    return preprocess(synth_image(c, res, r, 0.0), PreprocessMode::kSamplewise);
  };
  std::mt19937_64 rng(2024);
  std::vector<Tensor> centroids;
  for (std::size_t c = 0; c < k; ++c) {
    Tensor acc({1, res, res});
    for (std::size_t i = 0; i < per_class; ++i) acc = add(acc, draw(c, rng));
    centroids.push_back(scale(acc, 1.0 / per_class));
  }
  std::size_t correct = 0, total = 0;
  std::mt19937_64 fresh(99);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < 100; ++i) {
      const Tensor img = draw(c, fresh);
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t j = 0; j < k; ++j) {
        double d = 0;
        for (std::size_t p = 0; p < img.size(); ++p) d += (img[p] - centroids[j][p]) * (img[p] - centroids[j][p]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      correct += best == c;
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(total) > 0.9);
}
