#include "tical/datasyn.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "tical/errors.hpp"

namespace tical {

namespace {

constexpr char kMagic[4] = {'T', 'I', 'C', 'D'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 5 * 4;
constexpr int kMaxPrototypeTries = 20000;

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

double round_to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

std::vector<std::vector<double>> draw_prototypes(std::size_t k, std::size_t dim, double sep,
                                                 std::mt19937_64& rng) {
  // Spread grows with K^(1/d) so that K well-separated points fit in low dimensions.
  const double sd = sep * std::pow(static_cast<double>(k), 1.0 / static_cast<double>(dim)) /
                    std::sqrt(static_cast<double>(dim));
  if (!std::isfinite(sd))
    throw InvalidSpec("separation " + std::to_string(sep) + " is not representable for " + std::to_string(k) +
                      " classes");
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<std::vector<double>> protos;
  for (std::size_t c = 0; c < k; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPrototypeTries && !placed; ++attempt) {
      std::vector<double> p(dim);
      for (auto& v : p) v = normal(rng);
      placed = std::all_of(protos.begin(), protos.end(), [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
        return std::sqrt(s) >= sep;
      });
      if (placed) protos.push_back(std::move(p));
    }
    if (!placed)
      throw InvalidSpec("cannot place " + std::to_string(k) + " prototypes " + std::to_string(sep) +
                        " apart in dimension " + std::to_string(dim));
  }
  return protos;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : bytes_(b), end_(end) {}
  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > end_) throw FormatError(std::string("truncated ") + what, pos_);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw InvalidSpec("synthetic spec: need at least 2 classes");
  for (auto d : dims)
    if (d == 0) throw InvalidSpec("synthetic spec: modality dimensions must be positive");
  if (!(separation > 0.0)) throw InvalidSpec("synthetic spec: separation must be positive");
  if (!(noise > 0.0)) throw InvalidSpec("synthetic spec: noise must be positive");
  if (!(p_conflict >= 0.0 && p_conflict <= 1.0)) throw InvalidSpec("synthetic spec: p_conflict outside [0, 1]");
  if (n_samples == 0) throw InvalidSpec("synthetic spec: n_samples must be positive");
  for (double f : split)
    if (f < 0.0) throw InvalidSpec("synthetic spec: split fractions must be non-negative");
  if (std::abs(split[0] + split[1] + split[2] - 1.0) > 1e-9)
    throw InvalidSpec("synthetic spec: split fractions must sum to 1");
}

GeneratedData generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  GeneratedData out;
  for (std::size_t m = 0; m < 3; ++m)
    out.prototypes[m] = draw_prototypes(spec.n_classes, spec.dims[m], spec.separation, rng);

  std::uniform_int_distribution<std::size_t> pick_class(0, spec.n_classes - 1);
  std::uniform_int_distribution<std::size_t> pick_other(0, spec.n_classes - 2);
  std::uniform_int_distribution<std::size_t> pick_modality(1, 2);
  std::bernoulli_distribution conflict(spec.p_conflict);
  std::normal_distribution<double> noise(0.0, spec.noise);

  std::vector<SampleRecord> all(spec.n_samples);
  for (auto& s : all) {
    const std::size_t base = pick_class(rng);
    s.label = base;
    s.gen_labels = {base, base, base};
    if (conflict(rng)) {
      const std::size_t m = pick_modality(rng);
      std::size_t other = pick_other(rng);
      if (other >= base) ++other;
      s.gen_labels[m] = other;
    }
    for (std::size_t m = 0; m < 3; ++m) {
      const auto& proto = out.prototypes[m][s.gen_labels[m]];
      s.x[m].resize(spec.dims[m]);
      for (std::size_t i = 0; i < spec.dims[m]; ++i) s.x[m][i] = round_to_float(proto[i] + noise(rng));
    }
  }

  const auto n = spec.n_samples;
  const auto n_train = static_cast<std::size_t>(std::llround(spec.split[0] * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(spec.split[1] * static_cast<double>(n))));
  for (Dataset* d : {&out.train, &out.val, &out.test}) {
    d->n_classes = spec.n_classes;
    d->dims = spec.dims;
  }
  auto it = std::make_move_iterator(all.begin());
  out.train.samples.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  out.val.samples.assign(it + static_cast<std::ptrdiff_t>(n_train),
                         it + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.samples.assign(it + static_cast<std::ptrdiff_t>(n_train + n_val), std::make_move_iterator(all.end()));
  return out;
}

Subset parse_subset(const std::string& name) {
  if (name == "all") return Subset::kAll;
  if (name == "conflict") return Subset::kConflict;
  if (name == "consistent") return Subset::kConsistent;
  throw ConfigError("unknown subset '" + name + "' (expected all, conflict or consistent)");
}

Dataset filter(const Dataset& data, Subset subset) {
  Dataset out{data.n_classes, data.dims, {}};
  for (const auto& s : data.samples)
    if (subset == Subset::kAll || (subset == Subset::kConflict) == s.conflict()) out.samples.push_back(s);
  return out;
}

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(size)));
}

std::vector<std::uint8_t> encode_dataset(const Dataset& data) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.n_classes));
  for (auto d : data.dims) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.samples.size()));
  for (const auto& s : data.samples) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(s.label));
    for (auto g : s.gen_labels) put<std::uint16_t>(out, static_cast<std::uint16_t>(g));
    for (std::size_t m = 0; m < 3; ++m) {
      if (s.x[m].size() != data.dims[m]) throw InvalidInput("dataset sample has wrong feature width");
      for (double v : s.x[m]) put<float>(out, static_cast<float>(v));
    }
  }
  put<std::uint32_t>(out, crc32_of(out.data() + kHeaderSize, out.size() - kHeaderSize));
  return out;
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad dataset magic (expected TICD)", 0);
  Reader r(bytes, bytes.size());
  r.get<std::uint32_t>("magic");
  if (const auto v = r.get<std::uint16_t>("version"); v != kVersion)
    throw FormatError("unsupported dataset version " + std::to_string(v), 4);
  Dataset d;
  d.n_classes = r.get<std::uint32_t>("header");
  for (auto& dim : d.dims) dim = r.get<std::uint32_t>("header");
  const std::size_t n = r.get<std::uint32_t>("header");
  if (d.n_classes < 2) throw FormatError("dataset declares fewer than 2 classes", 6);

  const std::size_t width = d.dims[0] + d.dims[1] + d.dims[2];
  const std::size_t record = 8 + 4 * width;
  const std::size_t need = kHeaderSize + n * record + 4;
  if (bytes.size() < need)
    throw FormatError("truncated payload: " + std::to_string(bytes.size()) + " of " + std::to_string(need) +
                          " bytes",
                      bytes.size());
  if (bytes.size() > need) throw FormatError("trailing bytes after checksum", need);
  Reader payload(bytes, need - 4);
  for (std::size_t i = 0; i < kHeaderSize; ++i) payload.get<std::uint8_t>("header");
  d.samples.resize(n);
  for (auto& s : d.samples) {
    const auto at = payload.pos();
    s.label = payload.get<std::uint16_t>("sample");
    for (auto& g : s.gen_labels) g = payload.get<std::uint16_t>("sample");
    if (s.label >= d.n_classes || s.gen_labels[0] >= d.n_classes || s.gen_labels[1] >= d.n_classes ||
        s.gen_labels[2] >= d.n_classes)
      throw FormatError("sample label out of range", at);
    for (std::size_t m = 0; m < 3; ++m) {
      s.x[m].resize(d.dims[m]);
      for (auto& v : s.x[m]) v = payload.get<float>("sample");
    }
  }
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + need - 4, 4);
  const auto actual = crc32_of(bytes.data() + kHeaderSize, need - 4 - kHeaderSize);
  if (stored != actual) throw FormatError("payload checksum mismatch", need - 4);
  return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  const auto bytes = encode_dataset(data);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_dataset(bytes);
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "label,gen_l,gen_v,gen_a";
  const char tags[3] = {'l', 'v', 'a'};
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t i = 0; i < data.dims[m]; ++i) f << ',' << tags[m] << i;
  f << '\n';
  char buf[32];
  for (const auto& s : data.samples) {
    f << s.label << ',' << s.gen_labels[0] << ',' << s.gen_labels[1] << ',' << s.gen_labels[2];
    for (std::size_t m = 0; m < 3; ++m)
      for (double v : s.x[m]) {
        std::snprintf(buf, sizeof buf, ",%.9g", v);
        f << buf;
      }
    f << '\n';
  }
  if (!f) throw IoError("failed writing " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t n_classes,
                         std::array<std::size_t, 3> dims) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open dataset " + path.string());
  Dataset d{n_classes, dims, {}};
  std::string line;
  std::getline(f, line);  // header
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(in, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 4 + dims[0] + dims[1] + dims[2])
      throw InvalidInput(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(v.size()) +
                         " columns");
    SampleRecord s;
    s.label = static_cast<std::size_t>(v[0]);
    for (std::size_t m = 0; m < 3; ++m) s.gen_labels[m] = static_cast<std::size_t>(v[1 + m]);
    std::size_t at = 4;
    for (std::size_t m = 0; m < 3; ++m) {
      for (std::size_t i = 0; i < dims[m]; ++i) s.x[m].push_back(round_to_float(v[at + i]));
      at += dims[m];
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

std::string format_manifest(const SyntheticSpec& spec) {
  auto num = [](double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::ostringstream out;
  out << "n_classes = " << spec.n_classes << "\n"
      << "dims = " << spec.dims[0] << " " << spec.dims[1] << " " << spec.dims[2] << "\n"
      << "separation = " << num(spec.separation) << "\n"
      << "noise = " << num(spec.noise) << "\n"
      << "p_conflict = " << num(spec.p_conflict) << "\n"
      << "n_samples = " << spec.n_samples << "\n"
      << "seed = " << spec.seed << "\n"
      << "split = " << num(spec.split[0]) << " " << num(spec.split[1]) << " " << num(spec.split[2]) << "\n";
  return out.str();
}

}  // namespace tical
