// Copyright 2026 The djpeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "djpeg/data/dataset.hpp"
#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "doctest.h"

using namespace djpeg::data;
using djpeg::Error;
using djpeg::ErrorCode;
using djpeg::jpeg::standard_qmatrix;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected djpeg::Error");
  return ErrorCode::kIoError;
}

std::vector<NamedImage> corpus(int count, int w, int h, std::uint64_t seed = 1) {
  std::vector<NamedImage> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({"img" + std::to_string(i) + ".pgm", synthesize_image(w, h, seed + i)});
  }
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("djpeg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

QuantMatrix scaled(const QuantMatrix& q, int factor) {
  std::vector<int> v(64);
  for (int i = 0; i < 64; ++i) v[i] = std::min(255, q[i] * factor);
  return QuantMatrix(v);
}

}  // namespace

TEST_CASE("luma conversion and PNM decoding") {
  CHECK(rgb_to_luma(255, 255, 255) == 255);
  CHECK(rgb_to_luma(0, 0, 0) == 0);
  CHECK(rgb_to_luma(255, 0, 0) == 76);
  CHECK(rgb_to_luma(0, 255, 0) == 150);
  CHECK(rgb_to_luma(0, 0, 255) == 29);

  const std::string p2 = "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n";
  const GrayImage a = decode_pnm(std::span(reinterpret_cast<const std::uint8_t*>(p2.data()), p2.size()));
  CHECK(a.width == 3);
  CHECK(a.height == 2);
  CHECK(a.pixels == std::vector<std::uint8_t>{0, 10, 20, 30, 40, 255});

  std::vector<std::uint8_t> p6 = {'P', '6', ' ', '2', ' ', '1', ' ', '2', '5', '5', '\n'};
  p6.insert(p6.end(), {255, 0, 0, 0, 0, 255});
  const GrayImage b = decode_pnm(p6);
  CHECK(b.pixels == std::vector<std::uint8_t>{76, 29});

  const std::string p2_scaled = "P2 2 1 15 15 0";
  CHECK(decode_pnm(std::span(reinterpret_cast<const std::uint8_t*>(p2_scaled.data()),
                             p2_scaled.size()))
            .pixels == std::vector<std::uint8_t>{255, 0});

  const GrayImage img = synthesize_image(40, 24, 3);
  CHECK(decode_pnm(encode_pgm(img)) == img);

  const std::string bad = "P4\n1 1\n";
  CHECK(code_of([&] {
          decode_pnm(std::span(reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size()));
        }) == ErrorCode::kFormatError);
  std::vector<std::uint8_t> truncated = encode_pgm(img);
  truncated.resize(truncated.size() - 1);
  CHECK(code_of([&] { decode_pnm(truncated); }) == ErrorCode::kFormatError);
  CHECK(code_of([] { read_pnm("/nonexistent/x.pgm"); }) == ErrorCode::kIoError);
}

TEST_CASE("synthetic images are deterministic and textured") {
  const GrayImage a = synthesize_image(128, 96, 42);
  CHECK(a == synthesize_image(128, 96, 42));
  CHECK(!(a == synthesize_image(128, 96, 43)));
  std::set<int> levels(a.pixels.begin(), a.pixels.end());
  CHECK(levels.size() > 64);
  CHECK(GrayImage(13, 21).crop_to_blocks().width == 8);
  CHECK(GrayImage(13, 21).crop_to_blocks().height == 16);
}

TEST_CASE("texture presets") {
  const GrayImage smooth = synthesize_image(128, 96, 42, SynthTexture::smooth());
  const GrayImage rough = synthesize_image(128, 96, 42, SynthTexture::rough());
  CHECK(smooth == synthesize_image(128, 96, 42));
  CHECK(!(smooth == rough));
  CHECK(rough == synthesize_image(128, 96, 42, SynthTexture::rough()));
  // Horizontal neighbour differences grow with fine-scale energy.
  const auto activity = [](const GrayImage& g) {
    double sum = 0.0;
    for (int y = 0; y < g.height; ++y)
      for (int x = 1; x < g.width; ++x) sum += std::abs(g.at(x, y) - g.at(x - 1, y));
    return sum;
  };
  CHECK(activity(rough) > activity(smooth));
  CHECK(code_of([] { synthesize_image(8, 8, 1, {0.9, 0.5, 1.0, 2.0}); }) ==
        ErrorCode::kConfigError);
}

TEST_CASE("single_compress examples") {
  CHECK(single_compress(GrayImage(16, 8, 128), standard_qmatrix(50)) ==
        djpeg::jpeg::CoeffPlane(2, 1));

  const GrayImage img = synthesize_image(32, 32, 5);
  const auto plane = single_compress(img, QuantMatrix{});
  for (int by = 0; by < 4; ++by) {
    for (int bx = 0; bx < 4; ++bx) {
      std::array<double, 64> shifted{};
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) shifted[r * 8 + c] = img.at(bx * 8 + c, by * 8 + r) - 128.0;
      }
      const auto dct = djpeg::jpeg::dct_2d(shifted);
      for (int i = 0; i < 64; ++i) CHECK(plane.block(bx, by)[i] == std::lround(dct[i]));
    }
  }

  const QuantMatrix q = standard_qmatrix(80);
  CHECK(single_compress(img, q) == single_compress(img, q));
  CHECK(code_of([] { single_compress(GrayImage(12, 8), QuantMatrix{}); }) ==
        ErrorCode::kDimensionError);
}

TEST_CASE("double_compress examples") {
  const GrayImage img = synthesize_image(256, 256, 9);
  CHECK(code_of([&] { double_compress(img, QuantMatrix{}, QuantMatrix{}); }) ==
        ErrorCode::kSameMatrixError);
  std::vector<int> v(64, 1);
  v[10] = 2;
  CHECK_NOTHROW(double_compress(img, QuantMatrix{}, QuantMatrix(v)));

  // q1 = 2 q2 everywhere: odd values vanish at every frequency with energy,
  // except in blocks whose intermediate pixels were clamped.
  const QuantMatrix q2 = QuantMatrix::filled(4);
  const QuantMatrix q1 = scaled(q2, 2);
  const auto plane = double_compress(img, q1, q2);
  const GrayImage mid = decompress(single_compress(img, q1), q1);
  std::vector<bool> clamped(plane.block_count(), false);
  for (int y = 0; y < mid.height; ++y) {
    for (int x = 0; x < mid.width; ++x) {
      if (mid.at(x, y) == 0 || mid.at(x, y) == 255) clamped[(y / 8) * 32 + x / 8] = true;
    }
  }
  for (int pos : {1, 2, 8, 9, 16}) {
    CAPTURE(pos);
    int nonzero = 0;
    int odd = 0;
    for (std::size_t b = 0; b < plane.block_count(); ++b) {
      const int v = plane.blocks[b][pos];
      if (!clamped[b]) CHECK(v % 2 == 0);
      odd += v % 2 != 0;
      nonzero += v != 0;
    }
    CHECK(nonzero > 100);
    CHECK(odd * 100 < nonzero);
  }
}

TEST_CASE("Q-pool text format") {
  const std::vector<QuantMatrix> pool = {standard_qmatrix(50), standard_qmatrix(90)};
  const std::string text = format_q_pool(pool);
  CHECK(parse_q_pool(text) == pool);
  CHECK(parse_q_pool("# header\n\n" + text + "\n\n") == pool);
  CHECK(code_of([] { parse_q_pool("1 2 3\n"); }) == ErrorCode::kFormatError);
  CHECK(code_of([] { parse_q_pool("1 2 3 4 5 6 7 8\n"); }) == ErrorCode::kFormatError);
  std::string zero = text.substr(0, text.find('\n') + 1);
  zero[0] = '0';
  zero[1] = ' ';
  CHECK(code_of([&] { parse_q_pool(zero + text.substr(text.find('\n') + 1)); }) ==
        ErrorCode::kFormatError);
}

TEST_CASE("split_q_pool examples and partition property") {
  const auto big = custom_q_pool(1120, 40, 100, 7);
  CHECK(dedupe_pool(big).size() == 1120);
  const QPoolSplit s = split_q_pool(big, 0.7, 3);
  CHECK(s.seen.size() == 784);
  CHECK(s.unseen.size() == 336);
  const QPoolSplit again = split_q_pool(big, 0.7, 3);
  CHECK(again.seen == s.seen);
  CHECK(again.unseen == s.unseen);

  const int qualities[] = {50, 53, 55, 58, 60, 63, 65, 68, 70, 73,
                           75, 78, 80, 83, 85, 88, 90, 93, 95, 98};
  const auto pool20 = standard_q_pool(qualities);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const QPoolSplit p = split_q_pool(pool20, 0.7, seed);
    CHECK(p.seen.size() == 14);
    CHECK(p.unseen.size() == 6);
    std::set<int> all(p.seen.begin(), p.seen.end());
    for (int u : p.unseen) CHECK(all.insert(u).second);
    CHECK(all.size() == 20);
  }
  CHECK(code_of([&] { split_q_pool(pool20, 0.0, 1); }) == ErrorCode::kDomainError);
  CHECK(code_of([&] { split_q_pool(pool20, 1.0, 1); }) == ErrorCode::kDomainError);
  const std::vector<QuantMatrix> dup = {standard_qmatrix(50), standard_qmatrix(50)};
  CHECK(code_of([&] { split_q_pool(dup, 0.5, 1); }) == ErrorCode::kDomainError);
}

TEST_CASE("build_dataset counting and invariants") {
  const auto images = corpus(10, 512, 512);
  const int qualities[] = {55, 60, 65, 70, 75, 80, 85, 90, 95, 98};
  const auto pool = standard_q_pool(qualities);
  DatasetConfig cfg;
  cfg.patch_size = 256;
  cfg.source_size = 0;
  cfg.unseen_eval = false;
  cfg.seed = 11;
  const Dataset ds = build_dataset(images, pool, cfg);
  const auto& recs = ds.manifest.records;
  REQUIRE(recs.size() == 80);
  int singles = 0;
  for (const auto& r : recs) {
    singles += r.label == Label::kSingle;
    if (r.label == Label::kDouble) {
      REQUIRE(r.q2.has_value());
      CHECK(!(*r.q2 == r.q1));
    } else {
      CHECK(!r.q2.has_value());
    }
  }
  CHECK(singles == 40);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    int bal = 0;
    for (auto i : ds.manifest.indices(s)) bal += recs[i].label == Label::kDouble ? 1 : -1;
    CHECK(bal == 0);
  }
  CHECK(ds.manifest.indices(Split::kTrain).size() == 64);
  CHECK(ds.manifest.indices(Split::kVal).size() == 8);
  CHECK(ds.manifest.indices(Split::kTest).size() == 8);
}

TEST_CASE("build_dataset unseen evaluation and determinism") {
  const auto images = corpus(12, 200, 136);
  const auto pool = custom_q_pool(20, 50, 95, 2);
  DatasetConfig cfg;
  cfg.patch_size = 64;
  cfg.source_size = 0;
  cfg.seed = 5;
  const Dataset a = build_dataset(images, pool, cfg, 1);
  const Dataset b = build_dataset(images, pool, cfg, 3);
  CHECK(a.manifest.digest() == b.manifest.digest());
  CHECK(a.planes == b.planes);
  cfg.seed = 6;
  CHECK(build_dataset(images, pool, cfg).manifest.digest() != a.manifest.digest());

  const auto& m = a.manifest;
  CHECK(m.seen_pool.size() == 14);
  CHECK(m.unseen_pool.size() == 6);
  const std::set<int> seen(m.seen_pool.begin(), m.seen_pool.end());
  const std::set<int> unseen(m.unseen_pool.begin(), m.unseen_pool.end());
  std::set<int> train_final;
  for (auto i : m.indices(Split::kTrain)) {
    const auto& r = m.records[i];
    train_final.insert(r.q2 ? r.q2_index : r.q1_index);
    CHECK(seen.count(r.q1_index));
  }
  const auto unseen_idx = m.indices(Split::kTestUnseen);
  CHECK(unseen_idx.size() == m.indices(Split::kTest).size());
  for (auto i : unseen_idx) {
    const auto& r = m.records[i];
    const int final_index = r.q2 ? r.q2_index : r.q1_index;
    CHECK(unseen.count(final_index));
    CHECK(unseen.count(r.q1_index));
    CHECK(!train_final.count(final_index));
  }

  // 64x64 native patches: 3 x 2 per 200x136 image.
  CHECK(m.indices(Split::kTrain).size() + m.indices(Split::kVal).size() +
            m.indices(Split::kTest).size() ==
        2u * 12 * 6);
}

TEST_CASE("sub-grid mode equals native compression of the corner") {
  const auto images = corpus(3, 256, 256, 21);
  const auto pool = custom_q_pool(6, 60, 90, 4);
  DatasetConfig cfg;
  cfg.patch_size = 64;
  cfg.source_size = 128;
  cfg.unseen_eval = false;
  cfg.train_fraction = 0.5;
  cfg.val_fraction = 0.25;
  const Dataset ds = build_dataset(images, pool, cfg);
  REQUIRE(ds.manifest.records.size() == 24);
  for (std::size_t i = 0; i < ds.planes.size(); ++i) {
    const auto& r = ds.manifest.records[i];
    const GrayImage corner = images[r.source_image].image.crop(r.x, r.y, 64, 64);
    const auto native = r.q2 ? double_compress(corner, r.q1, *r.q2) : single_compress(corner, r.q1);
    CHECK(ds.planes[i] == native);
  }
}

TEST_CASE("build_dataset errors") {
  const auto pool = custom_q_pool(8, 60, 90, 4);
  DatasetConfig cfg;
  cfg.patch_size = 64;
  cfg.source_size = 0;
  const auto tiny = corpus(2, 40, 40);
  CHECK(code_of([&] { build_dataset(tiny, pool, cfg); }) == ErrorCode::kEmptyCorpus);
  CHECK(code_of([&] { build_dataset(std::vector<NamedImage>{}, pool, cfg); }) ==
        ErrorCode::kEmptyCorpus);
  const auto images = corpus(4, 128, 128);
  const std::vector<QuantMatrix> three(pool.begin(), pool.begin() + 3);
  CHECK(code_of([&] { build_dataset(images, three, cfg); }) == ErrorCode::kInsufficientQPool);
  cfg.unseen_eval = false;
  const std::vector<QuantMatrix> one(pool.begin(), pool.begin() + 1);
  CHECK(code_of([&] { build_dataset(images, one, cfg); }) == ErrorCode::kInsufficientQPool);
  cfg.patch_size = 60;
  CHECK(code_of([&] { build_dataset(images, pool, cfg); }) == ErrorCode::kConfigError);
}

TEST_CASE("manifest and patch storage round trip") {
  const auto images = corpus(4, 128, 128, 77);
  const auto pool = custom_q_pool(8, 60, 90, 4);
  DatasetConfig cfg;
  cfg.patch_size = 64;
  cfg.source_size = 0;
  cfg.seed = 99;
  for (StorageFormat format : {StorageFormat::kCoefficients, StorageFormat::kJpeg}) {
    Dataset ds = build_dataset(images, pool, cfg);
    const auto dir = scratch_dir(format == StorageFormat::kJpeg ? "jpg" : "djpg");
    write_dataset(dir, ds, format);
    const DatasetManifest back = read_manifest(dir / "manifest.jsonl");
    CHECK(back == ds.manifest);
    for (std::size_t i = 0; i < back.records.size(); ++i) {
      CHECK(load_patch(dir, back.records[i]) == ds.planes[i]);
    }
    if (format == StorageFormat::kJpeg) {
      const auto parsed =
          djpeg::jpeg::parse_jpeg(djpeg::jpeg::read_file_bytes(dir / back.records[1].path));
      CHECK(parsed.qmatrices[0] == back.records[1].final_q());
    }
    std::filesystem::remove_all(dir);
  }
  CHECK(code_of([] { DatasetManifest::from_jsonl("{\"type\":\"patch\"}\n"); }) ==
        ErrorCode::kFormatError);
  CHECK(code_of([] { DatasetManifest::from_jsonl("not json\n"); }) == ErrorCode::kFormatError);
}

TEST_CASE("DJPG coefficient files") {
  djpeg::jpeg::CoeffPlane plane(2, 3);
  plane.block(1, 2)[7] = -300;
  plane.block(0, 0)[0] = 1000;
  const QuantMatrix q = standard_qmatrix(70);
  const auto bytes = encode_djpg(plane, q);
  CHECK(bytes.size() == 16 + 64 + 6 * 64 * 2);
  QuantMatrix back_q;
  CHECK(decode_djpg(bytes, &back_q) == plane);
  CHECK(back_q == q);
  auto bad = bytes;
  bad.pop_back();
  CHECK(code_of([&] { decode_djpg(bad); }) == ErrorCode::kFormatError);
  bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_djpg(bad); }) == ErrorCode::kFormatError);
}
