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

#include "djpeg/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/util/parallel.hpp"
#include "djpeg/util/rng.hpp"
#include "json.hpp"

namespace djpeg::data {
namespace {

using nlohmann::json;

constexpr std::uint32_t kDjpgVersion = 1;
constexpr int kManifestVersion = 1;

// Pixel rectangle of one uncompressed source patch.
struct SourcePatch {
  int image;
  int x;
  int y;
};

void require_block_dims(const GrayImage& img) {
  require(img.width > 0 && img.height > 0 && img.width % 8 == 0 && img.height % 8 == 0,
          ErrorCode::kDimensionError,
          "patch dimensions must be positive multiples of 8, got " +
              std::to_string(img.width) + "x" + std::to_string(img.height));
}

json q_to_json(const QuantMatrix& q) {
  json a = json::array();
  for (int i = 0; i < jpeg::kBlockArea; ++i) a.push_back(q[i]);
  return a;
}

QuantMatrix q_from_json(const json& a) {
  require(a.is_array() && a.size() == jpeg::kBlockArea, ErrorCode::kFormatError,
          "Q-matrix must be an array of 64 integers");
  std::vector<int> v;
  for (const auto& x : a) v.push_back(x.get<int>());
  return QuantMatrix(v);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

bool has_extension(const std::filesystem::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), ::tolower);
  return std::any_of(exts.begin(), exts.end(), [&](const char* x) { return e == x; });
}

// Two distinct entries of `side`, or one when `second` is null.
void draw_pair(std::mt19937_64& rng, const std::vector<int>& side, int* first, int* second) {
  *first = side[util::below(rng, side.size())];
  if (!second) return;
  do {
    *second = side[util::below(rng, side.size())];
  } while (*second == *first);
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::kDouble ? "double" : "single";
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
    case Split::kTestUnseen:
      return "test_unseen";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest, Split::kTestUnseen}) {
    if (split_name(s) == name) return s;
  }
  fail(ErrorCode::kFormatError, "unknown split '" + std::string(name) + "'");
}

CoeffPlane single_compress(const GrayImage& patch, const QuantMatrix& q1) {
  require_block_dims(patch);
  CoeffPlane plane(patch.width / 8, patch.height / 8);
  for (int by = 0; by < plane.height_blocks; ++by) {
    for (int bx = 0; bx < plane.width_blocks; ++bx) {
      jpeg::PixelBlock px;
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) px[r * 8 + c] = patch.at(bx * 8 + c, by * 8 + r);
      }
      plane.block(bx, by) = jpeg::forward_block(px, q1);
    }
  }
  return plane;
}

GrayImage decompress(const CoeffPlane& plane, const QuantMatrix& q) {
  GrayImage out(plane.width_blocks * 8, plane.height_blocks * 8);
  for (int by = 0; by < plane.height_blocks; ++by) {
    for (int bx = 0; bx < plane.width_blocks; ++bx) {
      const jpeg::PixelBlock px = jpeg::inverse_block(plane.block(bx, by), q);
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) out.at(bx * 8 + c, by * 8 + r) = px[r * 8 + c];
      }
    }
  }
  return out;
}

CoeffPlane double_compress(const GrayImage& patch, const QuantMatrix& q1,
                           const QuantMatrix& q2) {
  require(!(q1 == q2), ErrorCode::kSameMatrixError,
          "double compression needs two different Q-matrices");
  return single_compress(decompress(single_compress(patch, q1), q1), q2);
}

std::vector<QuantMatrix> parse_q_pool(std::string_view text) {
  std::vector<QuantMatrix> pool;
  std::vector<int> values;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto flush = [&] {
    if (values.empty()) return;
    require(values.size() == jpeg::kBlockArea, ErrorCode::kFormatError,
            "Q-matrix ending before line " + std::to_string(line_no) + " has " +
                std::to_string(values.size()) + " entries, expected 64");
    try {
      pool.emplace_back(values);
    } catch (const Error& e) {
      fail(ErrorCode::kFormatError, e.detail());
    }
    values.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tok;
    int on_line = 0;
    while (fields >> tok) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == tok.size(), ErrorCode::kFormatError,
              "bad Q-pool entry '" + tok + "' on line " + std::to_string(line_no));
      values.push_back(v);
      ++on_line;
    }
    if (on_line == 0) {
      flush();
    } else {
      require(on_line == 8, ErrorCode::kFormatError,
              "Q-pool line " + std::to_string(line_no) + " must hold 8 integers");
    }
  }
  flush();
  return pool;
}

std::string format_q_pool(std::span<const QuantMatrix> pool) {
  std::string out;
  for (std::size_t m = 0; m < pool.size(); ++m) {
    if (m) out += "\n";
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        if (c) out += " ";
        out += std::to_string(pool[m].at(r, c));
      }
      out += "\n";
    }
  }
  return out;
}

std::vector<QuantMatrix> read_q_pool(const std::filesystem::path& path) {
  const auto bytes = jpeg::read_file_bytes(path);
  return parse_q_pool(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_q_pool(const std::filesystem::path& path, std::span<const QuantMatrix> pool) {
  const std::string text = format_q_pool(pool);
  jpeg::write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                         text.size()));
}

std::vector<QuantMatrix> dedupe_pool(std::span<const QuantMatrix> pool) {
  std::vector<QuantMatrix> out;
  for (const auto& q : pool) {
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  }
  return out;
}

std::vector<QuantMatrix> standard_q_pool(std::span<const int> qualities) {
  std::vector<QuantMatrix> out;
  for (int quality : qualities) out.push_back(jpeg::standard_qmatrix(quality));
  return out;
}

std::vector<QuantMatrix> custom_q_pool(int count, int min_quality, int max_quality,
                                       std::uint64_t seed) {
  require(count >= 1, ErrorCode::kDomainError, "pool size must be positive");
  require(min_quality >= 1 && max_quality <= 100 && min_quality <= max_quality,
          ErrorCode::kDomainError, "quality range must lie in [1, 100]");
  std::mt19937_64 rng(util::derive_seed(seed, 0xC057));
  std::vector<QuantMatrix> out;
  while (static_cast<int>(out.size()) < count) {
    const int quality = min_quality + static_cast<int>(util::below(
                                          rng, static_cast<std::uint64_t>(max_quality - min_quality + 1)));
    const QuantMatrix base = jpeg::standard_qmatrix(quality);
    std::vector<int> v(jpeg::kBlockArea);
    for (int i = 0; i < jpeg::kBlockArea; ++i) {
      const double jitter = std::exp(util::uniform(rng, -0.35, 0.35));
      v[i] = static_cast<int>(std::clamp(std::lround(base[i] * jitter), 1L, 255L));
    }
    QuantMatrix q(v);
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  }
  return out;
}

QPoolSplit split_q_pool(std::span<const QuantMatrix> pool, double seen_fraction,
                        std::uint64_t seed) {
  require(seen_fraction > 0.0 && seen_fraction < 1.0, ErrorCode::kDomainError,
          "seen fraction must lie strictly between 0 and 1");
  QPoolSplit out;
  out.pool = dedupe_pool(pool);
  const int n = static_cast<int>(out.pool.size());
  require(n >= 2, ErrorCode::kDomainError, "Q-pool needs at least two distinct matrices");
  const int seen = std::clamp(static_cast<int>(std::llround(seen_fraction * n)), 1, n - 1);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(util::derive_seed(seed, 0x5B17));
  util::shuffle(rng, order);
  out.seen.assign(order.begin(), order.begin() + seen);
  out.unseen.assign(order.begin() + seen, order.end());
  std::sort(out.seen.begin(), out.seen.end());
  std::sort(out.unseen.begin(), out.unseen.end());
  return out;
}

std::string DatasetManifest::to_jsonl() const {
  json header = {{"type", "header"},
                 {"version", kManifestVersion},
                 {"seed", config.seed},
                 {"patch_size", config.patch_size},
                 {"source_size", config.source_size},
                 {"max_patches_per_image", config.max_patches_per_image},
                 {"train_fraction", config.train_fraction},
                 {"val_fraction", config.val_fraction},
                 {"seen_fraction", config.seen_fraction},
                 {"unseen_eval", config.unseen_eval},
                 {"sources", sources},
                 {"seen_pool", seen_pool},
                 {"unseen_pool", unseen_pool},
                 {"records", records.size()}};
  json pool_json = json::array();
  for (const auto& q : pool) pool_json.push_back(q_to_json(q));
  header["pool"] = pool_json;
  std::string out = header.dump() + "\n";
  for (const auto& r : records) {
    json j = {{"type", "patch"},
              {"id", r.id},
              {"label", label_name(r.label)},
              {"split", split_name(r.split)},
              {"source_image", r.source_image},
              {"source_patch", r.source_patch},
              {"x", r.x},
              {"y", r.y},
              {"q1", q_to_json(r.q1)},
              {"q2", r.q2 ? q_to_json(*r.q2) : json(nullptr)},
              {"q1_index", r.q1_index},
              {"q2_index", r.q2_index},
              {"path", r.path}};
    out += j.dump() + "\n";
  }
  return out;
}

DatasetManifest DatasetManifest::from_jsonl(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t expected = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        require(!have_header, ErrorCode::kFormatError, "duplicate manifest header");
        require(j.at("version").get<int>() == kManifestVersion, ErrorCode::kFormatError,
                "unsupported manifest version");
        have_header = true;
        DatasetConfig& c = m.config;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.patch_size = j.at("patch_size").get<int>();
        c.source_size = j.at("source_size").get<int>();
        c.max_patches_per_image = j.at("max_patches_per_image").get<int>();
        c.train_fraction = j.at("train_fraction").get<double>();
        c.val_fraction = j.at("val_fraction").get<double>();
        c.seen_fraction = j.at("seen_fraction").get<double>();
        c.unseen_eval = j.at("unseen_eval").get<bool>();
        m.sources = j.at("sources").get<std::vector<std::string>>();
        m.seen_pool = j.at("seen_pool").get<std::vector<int>>();
        m.unseen_pool = j.at("unseen_pool").get<std::vector<int>>();
        for (const auto& q : j.at("pool")) m.pool.push_back(q_from_json(q));
        expected = j.at("records").get<std::size_t>();
      } else if (type == "patch") {
        require(have_header, ErrorCode::kFormatError, "manifest record before header");
        PatchRecord r;
        r.id = j.at("id").get<std::int64_t>();
        const std::string label = j.at("label").get<std::string>();
        require(label == "single" || label == "double", ErrorCode::kFormatError,
                "bad label '" + label + "'");
        r.label = label == "double" ? Label::kDouble : Label::kSingle;
        r.split = parse_split(j.at("split").get<std::string>());
        r.source_image = j.at("source_image").get<int>();
        r.source_patch = j.at("source_patch").get<std::int64_t>();
        r.x = j.at("x").get<int>();
        r.y = j.at("y").get<int>();
        r.q1 = q_from_json(j.at("q1"));
        if (!j.at("q2").is_null()) r.q2 = q_from_json(j.at("q2"));
        r.q1_index = j.at("q1_index").get<int>();
        r.q2_index = j.at("q2_index").get<int>();
        r.path = j.at("path").get<std::string>();
        require((r.label == Label::kDouble) == r.q2.has_value(), ErrorCode::kFormatError,
                "record " + std::to_string(r.id) + ": q2 must be present iff double");
        m.records.push_back(std::move(r));
      } else {
        fail(ErrorCode::kFormatError, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormatError,
           "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  require(have_header, ErrorCode::kFormatError, "manifest has no header");
  require(m.records.size() == expected, ErrorCode::kFormatError,
          "manifest record count mismatch");
  return m;
}

std::uint64_t DatasetManifest::digest() const {
  const std::string text = to_jsonl();
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

Dataset build_dataset(std::span<const NamedImage> images,
                      std::span<const QuantMatrix> raw_pool, const DatasetConfig& config,
                      int threads) {
  const int patch = config.patch_size;
  const int source = config.source_size == 0 ? patch : config.source_size;
  require(patch >= 8 && patch % 8 == 0, ErrorCode::kConfigError,
          "patch size must be a positive multiple of 8");
  require(source % 8 == 0 && source >= patch, ErrorCode::kConfigError,
          "source size must be a multiple of 8 and at least the patch size");
  require(config.train_fraction > 0.0 && config.val_fraction >= 0.0 &&
              config.train_fraction + config.val_fraction <= 1.0,
          ErrorCode::kConfigError, "split fractions must be non-negative and sum to <= 1");

  Dataset out;
  DatasetManifest& m = out.manifest;
  m.config = config;
  m.pool = dedupe_pool(raw_pool);
  const int pool_size = static_cast<int>(m.pool.size());
  if (config.unseen_eval) {
    require(pool_size >= 4, ErrorCode::kInsufficientQPool,
            "unseen evaluation needs at least 4 distinct Q-matrices, got " +
                std::to_string(pool_size));
    const QPoolSplit split = split_q_pool(m.pool, config.seen_fraction, config.seed);
    m.seen_pool = split.seen;
    m.unseen_pool = split.unseen;
    require(m.seen_pool.size() >= 2 && m.unseen_pool.size() >= 2,
            ErrorCode::kInsufficientQPool, "each side of the Q-pool split needs 2 matrices");
  } else {
    require(pool_size >= 2, ErrorCode::kInsufficientQPool,
            "double compression needs at least 2 distinct Q-matrices");
    m.seen_pool.resize(pool_size);
    std::iota(m.seen_pool.begin(), m.seen_pool.end(), 0);
  }

  std::vector<SourcePatch> sources;
  std::vector<GrayImage> cropped;
  for (int i = 0; i < static_cast<int>(images.size()); ++i) {
    m.sources.push_back(images[i].name);
    cropped.push_back(images[i].image.crop_to_blocks());
    const GrayImage& img = cropped.back();
    int taken = 0;
    for (int y = 0; y + source <= img.height; y += source) {
      for (int x = 0; x + source <= img.width; x += source) {
        if (config.max_patches_per_image > 0 && taken >= config.max_patches_per_image) break;
        sources.push_back({i, x, y});
        ++taken;
      }
    }
  }
  require(!sources.empty(), ErrorCode::kEmptyCorpus,
          "no " + std::to_string(source) + "x" + std::to_string(source) +
              " patch fits in any corpus image");

  const std::size_t n = sources.size();
  const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * n));
  const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * n));
  const bool wants_test = config.train_fraction + config.val_fraction < 1.0;
  require(n_train >= 1 && n_train + n_val <= n && (!wants_test || n_train + n_val < n),
          ErrorCode::kEmptySplit, "corpus too small for the requested splits");
  std::vector<Split> split_of(n, Split::kTest);
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(util::derive_seed(config.seed, 0x5911));
    util::shuffle(rng, order);
    for (std::size_t k = 0; k < n; ++k) {
      split_of[order[k]] = k < n_train ? Split::kTrain
                                       : k < n_train + n_val ? Split::kVal : Split::kTest;
    }
  }

  // Record slots per source patch: 2, plus 2 more for unseen test copies.
  std::vector<std::size_t> first(n + 1, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const bool unseen = config.unseen_eval && split_of[p] == Split::kTest;
    first[p + 1] = first[p] + (unseen ? 4 : 2);
  }
  m.records.resize(first[n]);
  out.planes.resize(first[n]);

  const int crop_blocks = patch / 8;
  util::parallel_for(n, threads, [&](std::size_t p) {
    const SourcePatch& sp = sources[p];
    const GrayImage pixels = cropped[sp.image].crop(sp.x, sp.y, source, source);
    std::mt19937_64 rng(util::derive_seed(config.seed, 0x10000 + p));
    auto emit = [&](std::size_t slot, Split split, const std::vector<int>& side) {
      int a = 0, b1 = 0, b2 = 0;
      draw_pair(rng, side, &a, nullptr);
      draw_pair(rng, side, &b1, &b2);
      PatchRecord single;
      single.label = Label::kSingle;
      single.source_image = sp.image;
      single.source_patch = static_cast<std::int64_t>(p);
      single.x = sp.x;
      single.y = sp.y;
      single.split = split;
      PatchRecord twice = single;
      single.q1 = m.pool[a];
      single.q1_index = a;
      twice.label = Label::kDouble;
      twice.q1 = m.pool[b1];
      twice.q1_index = b1;
      twice.q2 = m.pool[b2];
      twice.q2_index = b2;
      single.id = static_cast<std::int64_t>(slot);
      twice.id = static_cast<std::int64_t>(slot + 1);
      out.planes[slot] =
          single_compress(pixels, single.q1).crop_blocks(crop_blocks, crop_blocks);
      out.planes[slot + 1] =
          double_compress(pixels, twice.q1, *twice.q2).crop_blocks(crop_blocks, crop_blocks);
      m.records[slot] = std::move(single);
      m.records[slot + 1] = std::move(twice);
    };
    emit(first[p], split_of[p], m.seen_pool);
    if (first[p + 1] - first[p] == 4) emit(first[p] + 2, Split::kTestUnseen, m.unseen_pool);
  });
  return out;
}

std::vector<NamedImage> load_corpus(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::kIoError,
          "corpus directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_extension(entry.path(), {".pgm", ".ppm", ".pnm"})) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::kEmptyCorpus,
          "no PGM/PPM images in " + dir.string());
  std::vector<NamedImage> out;
  for (const auto& f : files) out.push_back({f.filename().string(), read_pnm(f)});
  return out;
}

std::vector<std::uint8_t> encode_djpg(const CoeffPlane& plane, const QuantMatrix& q) {
  std::vector<std::uint8_t> out = {'D', 'J', 'P', 'G'};
  put_u32(out, kDjpgVersion);
  put_u32(out, static_cast<std::uint32_t>(plane.width_blocks));
  put_u32(out, static_cast<std::uint32_t>(plane.height_blocks));
  for (int i = 0; i < jpeg::kBlockArea; ++i) out.push_back(q[i]);
  for (const auto& block : plane.blocks) {
    for (int v : block) {
      require(v >= -32768 && v <= 32767, ErrorCode::kCoefficientOutOfRange,
              "coefficient does not fit in 16 bits");
      const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
      out.push_back(static_cast<std::uint8_t>(u & 0xFF));
      out.push_back(static_cast<std::uint8_t>(u >> 8));
    }
  }
  return out;
}

CoeffPlane decode_djpg(std::span<const std::uint8_t> bytes, QuantMatrix* q) {
  constexpr std::size_t kHeader = 16 + jpeg::kBlockArea;
  require(bytes.size() >= kHeader && std::memcmp(bytes.data(), "DJPG", 4) == 0,
          ErrorCode::kFormatError, "not a DJPG coefficient file");
  require(get_u32(bytes, 4) == kDjpgVersion, ErrorCode::kFormatError,
          "unsupported DJPG version");
  const std::uint32_t wb = get_u32(bytes, 8);
  const std::uint32_t hb = get_u32(bytes, 12);
  require(wb >= 1 && hb >= 1 && wb <= 8192 && hb <= 8192, ErrorCode::kFormatError,
          "DJPG dimensions out of range");
  require(bytes.size() == kHeader + std::size_t{wb} * hb * jpeg::kBlockArea * 2,
          ErrorCode::kFormatError, "DJPG size does not match its dimensions");
  if (q) {
    std::vector<int> v(bytes.begin() + 16, bytes.begin() + kHeader);
    try {
      *q = QuantMatrix(v);
    } catch (const Error& e) {
      fail(ErrorCode::kFormatError, e.detail());
    }
  }
  CoeffPlane plane(static_cast<int>(wb), static_cast<int>(hb));
  std::size_t at = kHeader;
  for (auto& block : plane.blocks) {
    for (auto& v : block) {
      v = static_cast<std::int16_t>(bytes[at] | (bytes[at + 1] << 8));
      at += 2;
    }
  }
  return plane;
}

void write_dataset(const std::filesystem::path& dir, Dataset& dataset,
                   StorageFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "patches", ec);
  require(!ec, ErrorCode::kIoError, "cannot create " + (dir / "patches").string());
  DatasetManifest& m = dataset.manifest;
  require(dataset.planes.size() == m.records.size(), ErrorCode::kShapeError,
          "dataset planes and records disagree");
  const char* ext = format == StorageFormat::kJpeg ? ".jpg" : ".djpg";
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    PatchRecord& r = m.records[i];
    char name[32];
    std::snprintf(name, sizeof name, "%08lld", static_cast<long long>(r.id));
    r.path = "patches/" + std::string(name) + ext;
    const CoeffPlane& plane = dataset.planes[i];
    std::vector<std::uint8_t> bytes;
    if (format == StorageFormat::kJpeg) {
      const auto frame =
          jpeg::FrameInfo::grayscale(plane.width_blocks * 8, plane.height_blocks * 8);
      bytes = jpeg::encode_jpeg(std::span(&plane, 1), std::span(&r.final_q(), 1), frame);
    } else {
      bytes = encode_djpg(plane, r.final_q());
    }
    jpeg::write_file_bytes(dir / r.path, bytes);
  }
  const std::string text = m.to_jsonl();
  jpeg::write_file_bytes(dir / "manifest.jsonl",
                         std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

DatasetManifest read_manifest(const std::filesystem::path& manifest_path) {
  const auto bytes = jpeg::read_file_bytes(manifest_path);
  return DatasetManifest::from_jsonl(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

CoeffPlane load_patch(const std::filesystem::path& base_dir, const PatchRecord& record) {
  require(!record.path.empty(), ErrorCode::kFormatError,
          "record " + std::to_string(record.id) + " has no stored patch");
  const std::filesystem::path path = base_dir / record.path;
  const auto bytes = jpeg::read_file_bytes(path);
  if (has_extension(path, {".jpg", ".jpeg"})) {
    jpeg::JpegCoefficients parsed = jpeg::parse_jpeg(bytes);
    return std::move(parsed.planes.front());
  }
  return decode_djpg(bytes);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t hash) {
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace djpeg::data
