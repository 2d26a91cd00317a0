#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tical/datasyn.hpp"
#include "tical/errors.hpp"

using namespace tical;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.n_samples = 300;
  s.seed = seed;
  return s;
}

// Bitwise reflected CRC-32 (polynomial 0xEDB88320), independent of zlib.
std::uint32_t crc32_bitwise(const std::uint8_t* p, std::size_t n) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    c ^= p[i];
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return ~c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tical_test_" + name);
}

constexpr std::size_t kHeader = 26;  // magic 4 + version 2 + five u32

}  // namespace

TEST_CASE("split sizes and shapes") {
  const auto g = generate(small_spec());
  CHECK(g.train.size() == 210);
  CHECK(g.val.size() == 30);
  CHECK(g.test.size() == 60);
  for (const auto* d : {&g.train, &g.val, &g.test}) {
    CHECK(d->n_classes == 7);
    for (const auto& s : d->samples) {
      CHECK(s.x[0].size() == 32);
      CHECK(s.x[1].size() == 16);
      CHECK(s.label == s.gen_labels[0]);
    }
  }
}

TEST_CASE("no conflicts when p_c = 0") {
  auto s = small_spec();
  s.p_conflict = 0.0;
  for (const auto& r : generate(s).train.samples) CHECK_FALSE(r.conflict());
}

TEST_CASE("conflict fraction within three binomial sigma") {
  auto s = small_spec(4);
  s.n_samples = 10000;
  s.split = {1.0, 0.0, 0.0};
  const auto g = generate(s);
  std::size_t c = 0;
  for (const auto& r : g.train.samples) {
    c += r.conflict();
    if (r.conflict()) {
      CHECK(r.gen_labels[0] == r.label);
      // exactly one non-language modality is reassigned
      CHECK((r.gen_labels[1] != r.label) != (r.gen_labels[2] != r.label));
    }
  }
  const double f = static_cast<double>(c) / 10000.0;
  CHECK(f >= 0.283);
  CHECK(f <= 0.317);
}

TEST_CASE("prototypes respect the separation") {
  const auto g = generate(small_spec());
  for (const auto& protos : g.prototypes)
    for (std::size_t a = 0; a < protos.size(); ++a)
      for (std::size_t b = a + 1; b < protos.size(); ++b) {
        double d = 0;
        for (std::size_t i = 0; i < protos[a].size(); ++i) d += std::pow(protos[a][i] - protos[b][i], 2);
        CHECK(std::sqrt(d) >= 4.0);
      }
}

TEST_CASE("nearest prototype recovers the generating class when s >= 6 sigma") {
  auto s = small_spec(9);
  s.n_samples = 2000;
  s.p_conflict = 0.0;
  const auto g = generate(s);
  std::size_t ok = 0, n = 0;
  for (const auto& r : g.test.samples)
    for (std::size_t m = 0; m < 3; ++m) {
      std::size_t best = 0;
      double bd = 1e300;
      for (std::size_t c = 0; c < 7; ++c) {
        double d = 0;
        for (std::size_t i = 0; i < r.x[m].size(); ++i) d += std::pow(r.x[m][i] - g.prototypes[m][c][i], 2);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      ok += best == r.gen_labels[m];
      ++n;
    }
  CHECK(static_cast<double>(ok) / static_cast<double>(n) >= 0.99);
}

TEST_CASE("invalid specs") {
  auto s = small_spec();
  s.noise = 0.0;
  CHECK_THROWS_AS(generate(s), InvalidSpec);
  s = small_spec();
  s.split = {0.5, 0.1, 0.1};
  CHECK_THROWS_AS(generate(s), InvalidSpec);
  s = small_spec();
  s.dims = {1, 1, 1};
  s.separation = 1e308;
  CHECK_THROWS_AS(generate(s), InvalidSpec);
}

TEST_CASE("same seed gives byte-identical files, different seed does not") {
  const auto a = encode_dataset(generate(small_spec(3)).train);
  const auto b = encode_dataset(generate(small_spec(3)).train);
  const auto c = encode_dataset(generate(small_spec(4)).train);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("binary round trip and checksum") {
  const auto d = generate(small_spec()).val;
  const auto path = temp_file("roundtrip.ticd");
  write_dataset(d, path);
  CHECK(read_dataset(path) == d);
  const auto bytes = encode_dataset(d);
  CHECK(std::memcmp(bytes.data(), "TICD", 4) == 0);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  CHECK(stored == crc32_bitwise(bytes.data() + kHeader, bytes.size() - 4 - kHeader));
  std::filesystem::remove(path);
}

TEST_CASE("format errors carry byte offsets") {
  const auto good = encode_dataset(generate(small_spec()).val);
  auto bad = good;
  bad[0] = 'X';
  try {
    decode_dataset(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }
  bad = good;
  bad[4] = 9;
  try {
    decode_dataset(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 4);
  }
  bad = good;
  bad.resize(bad.size() - 10);
  try {
    decode_dataset(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == bad.size());
  }
  bad = good;
  bad[kHeader + 9] ^= 0x40;  // inside the first sample's features
  try {
    decode_dataset(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == good.size() - 4);
  }
  bad = good;
  bad[kHeader] = 200;  // label out of range
  try {
    decode_dataset(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == kHeader);
  }
  CHECK_THROWS_AS(read_dataset(temp_file("does_not_exist.ticd")), IoError);
}

TEST_CASE("CSV round trip") {
  const auto d = generate(small_spec()).test;
  const auto path = temp_file("roundtrip.csv");
  write_dataset_csv(d, path);
  CHECK(read_dataset_csv(path, d.n_classes, d.dims) == d);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header.rfind("label,gen_l,gen_v,gen_a,l0,", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("subset filters and manifest") {
  const auto d = generate(small_spec()).train;
  const auto conflict = filter(d, Subset::kConflict);
  const auto consistent = filter(d, Subset::kConsistent);
  CHECK(conflict.size() + consistent.size() == d.size());
  for (const auto& s : conflict.samples) CHECK(s.conflict());
  CHECK(parse_subset("conflict") == Subset::kConflict);
  CHECK_THROWS(parse_subset("some"));
  auto s = small_spec();
  s.p_conflict = 0.4;
  CHECK(format_manifest(s).find("p_conflict = 0.4") != std::string::npos);
}
