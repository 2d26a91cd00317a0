#include "tical/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "tical/errors.hpp"

namespace tical {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ' ' || c == ',' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                    std::string(expected));
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) bad(key, value, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad(key, value, "a number");
  }
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad(key, value, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, value, "a boolean");
}

template <typename F>
auto to_list(std::string_view key, std::string_view value, F convert) {
  std::vector<decltype(convert(key, value))> out;
  for (const auto& item : split_list(value)) out.push_back(convert(key, item));
  return out;
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T, typename F>
std::string join(const T& items, F fmt) {
  std::string out;
  for (const auto& x : items) {
    if (!out.empty()) out += ' ';
    out += fmt(x);
  }
  return out;
}

// Train-related keys shared by RunConfig and the checkpoint echo.
bool set_train_key(TrainConfig& c, SyntheticSpec* data, const std::string& key, std::string_view value) {
  auto wrap = [&](auto fn) {
    try {
      fn();
    } catch (const InvalidSpec& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  };
  if (key == "epochs") c.epochs = to_size(key, value);
  else if (key == "batch_size") c.batch_size = to_size(key, value);
  else if (key == "learning_rate") c.learning_rate = to_double(key, value);
  else if (key == "lr_decay") c.lr_decay = to_double(key, value);
  else if (key == "lambda") c.lambda = to_size(key, value);
  else if (key == "theta") c.theta = to_double(key, value);
  else if (key == "hasl_capacity") c.hasl_capacity = to_size(key, value);
  else if (key == "min_fill") c.min_fill = to_size(key, value);
  else if (key == "hasl_balanced") c.hasl_balanced = to_bool(key, value);
  else if (key == "kappa0") c.kappa0 = to_double(key, value);
  else if (key == "seed") {
    c.seed = to_u64(key, value);
    if (data) data->seed = c.seed;
  } else if (key == "task") wrap([&] { c.task = parse_task_kind(trim(value)); });
  else if (key == "t") c.consistency.t = to_double(key, value);
  else if (key == "k") c.consistency.k = to_double(key, value);
  else if (key == "rho") c.consistency.rho = to_double(key, value);
  else if (key == "printed_discrepancy") c.consistency.printed_discrepancy = to_bool(key, value);
  else if (key == "label_scale") c.consistency.label_scale = to_list(key, value, to_double);
  else if (key == "hidden") c.model.hidden = to_size(key, value);
  else if (key == "eps_boundary") c.model.eps_boundary = to_double(key, value);
  else if (key == "eps_arcosh") c.model.eps_arcosh = to_double(key, value);
  else if (key == "feature_clip") c.model.feature_clip = to_double(key, value);
  else if (key == "n_classes") {
    c.model.n_classes = to_size(key, value);
    c.tree.n_classes = c.model.n_classes;
    if (data) data->n_classes = c.model.n_classes;
  } else if (key == "dims") {
    auto d = to_list(key, value, to_size);
    if (d.size() != 3) bad(key, value, "three dimensions (l v a)");
    c.model.input_dims = {d[0], d[1], d[2]};
    if (data) data->dims = c.model.input_dims;
  } else if (key == "ablate") {
    c.ablations = {};
    for (const auto& name : split_list(value))
      if (name != "none") c.ablations.enable(name);
  } else if (key == "tree_scheme") wrap([&] { c.tree.scheme = parse_tree_scheme(trim(value)); });
  else if (key == "tree_weights") c.tree.weights = to_list(key, value, to_double);
  else if (key == "tree_polarity") {
    c.tree.polarity.clear();
    for (const auto& p : split_list(value)) {
      const double d = to_double(key, p);
      c.tree.polarity.push_back(static_cast<int>(d));
    }
  } else if (key == "tree_edges") {
    c.tree.edges.clear();
    std::istringstream in{std::string(value)};
    std::string triple;
    while (std::getline(in, triple, ';')) {
      if (trim(triple).empty()) continue;
      std::istringstream t(triple);
      TreeEdge e;
      if (!(t >> e.parent >> e.child >> e.weight)) bad(key, triple, "'parent child weight'");
      c.tree.edges.push_back(std::move(e));
    }
  } else {
    return false;
  }
  return true;
}

void format_train_keys(std::ostringstream& out, const TrainConfig& c) {
  out << "epochs = " << c.epochs << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "learning_rate = " << num(c.learning_rate) << "\n"
      << "lr_decay = " << num(c.lr_decay) << "\n"
      << "lambda = " << c.lambda << "\n"
      << "theta = " << num(c.theta) << "\n"
      << "hasl_capacity = " << c.hasl_capacity << "\n"
      << "min_fill = " << c.min_fill << "\n"
      << "hasl_balanced = " << (c.hasl_balanced ? "true" : "false") << "\n"
      << "kappa0 = " << num(c.kappa0) << "\n"
      << "seed = " << c.seed << "\n"
      << "task = " << to_string(c.task) << "\n"
      << "t = " << num(c.consistency.t) << "\n"
      << "k = " << num(c.consistency.k) << "\n"
      << "rho = " << num(c.consistency.rho) << "\n"
      << "printed_discrepancy = " << (c.consistency.printed_discrepancy ? "true" : "false") << "\n";
  if (!c.consistency.label_scale.empty())
    out << "label_scale = " << join(c.consistency.label_scale, num) << "\n";
  out << "hidden = " << c.model.hidden << "\n"
      << "eps_boundary = " << num(c.model.eps_boundary) << "\n"
      << "eps_arcosh = " << num(c.model.eps_arcosh) << "\n"
      << "feature_clip = " << num(c.model.feature_clip) << "\n"
      << "n_classes = " << c.model.n_classes << "\n"
      << "dims = " << c.model.input_dims[0] << " " << c.model.input_dims[1] << " " << c.model.input_dims[2] << "\n";
  const auto abl = c.ablations.names();
  out << "ablate = " << (abl.empty() ? std::string("none") : join(abl, [](const std::string& s) { return s; }))
      << "\n";
  out << "tree_scheme = " << to_string(c.tree.scheme) << "\n";
  if (!c.tree.weights.empty()) out << "tree_weights = " << join(c.tree.weights, num) << "\n";
  if (!c.tree.polarity.empty())
    out << "tree_polarity = " << join(c.tree.polarity, [](int p) { return std::to_string(p); }) << "\n";
  if (!c.tree.edges.empty()) {
    out << "tree_edges = ";
    for (const auto& e : c.tree.edges) out << e.parent << " " << e.child << " " << num(e.weight) << "; ";
    out << "\n";
  }
}

void parse_lines(std::string_view text, const std::string& origin,
                 const std::function<void(const std::string&, const std::string&)>& sink) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    sink(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

}  // namespace

void RunConfig::set(std::string_view raw_key, std::string_view value) {
  std::string key(trim(raw_key));
  for (auto& ch : key)
    if (ch == '-') ch = '_';
  if (set_train_key(train, &data, key, value)) return;
  if (key == "separation") data.separation = to_double(key, value);
  else if (key == "noise") data.noise = to_double(key, value);
  else if (key == "p_conflict") data.p_conflict = to_double(key, value);
  else if (key == "n_samples") data.n_samples = to_size(key, value);
  else if (key == "split") {
    auto s = to_list(key, value, to_double);
    if (s.size() != 3) bad(key, value, "three fractions (train val test)");
    data.split = {s[0], s[1], s[2]};
  } else if (key == "tree_file" || key == "tree") tree_file = trim(value);
  else if (key == "out") out_dir = trim(value);
  else if (key == "data") data_dir = trim(value);
  else if (key == "checkpoint") checkpoint = trim(value);
  else if (key == "subset") {
    subset = trim(value);
    parse_subset(subset);
  } else if (key == "csv") csv = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::parse(std::string_view text, const std::string& origin) {
  parse_lines(text, origin, [&](const std::string& k, const std::string& v) { set(k, v); });
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  parse(ss.str(), path.string());
}

void RunConfig::finalize() {
  if (!tree_file.empty()) {
    TreeSpec spec = load_tree_spec(tree_file);
    if (spec.n_classes != data.n_classes)
      throw ConfigError("tree file declares " + std::to_string(spec.n_classes) + " classes but n_classes = " +
                        std::to_string(data.n_classes));
    train.tree = std::move(spec);
  }
  train.model.n_classes = data.n_classes;
  train.model.input_dims = data.dims;
  train.tree.n_classes = data.n_classes;
  train.seed = data.seed;
  try {
    data.validate();
    train.validate();
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  }
}

std::string RunConfig::format() const {
  std::ostringstream out;
  format_train_keys(out, train);
  out << "separation = " << num(data.separation) << "\n"
      << "noise = " << num(data.noise) << "\n"
      << "p_conflict = " << num(data.p_conflict) << "\n"
      << "n_samples = " << data.n_samples << "\n"
      << "split = " << num(data.split[0]) << " " << num(data.split[1]) << " " << num(data.split[2]) << "\n";
  if (!tree_file.empty()) out << "tree_file = " << tree_file << "\n";
  out << "out = " << out_dir << "\n";
  if (!data_dir.empty()) out << "data = " << data_dir << "\n";
  if (!checkpoint.empty()) out << "checkpoint = " << checkpoint << "\n";
  out << "subset = " << subset << "\n"
      << "csv = " << (csv ? "true" : "false") << "\n";
  return out.str();
}

std::filesystem::path RunConfig::data_path() const {
  return data_dir.empty() ? std::filesystem::path(out_dir) : std::filesystem::path(data_dir);
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? std::filesystem::path(out_dir) / "checkpoint.tick"
                            : std::filesystem::path(checkpoint);
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  format_train_keys(out, c);
  return out.str();
}

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig c;
  parse_lines(text, "checkpoint config", [&](const std::string& k, const std::string& v) {
    if (!set_train_key(c, nullptr, k, v)) throw ConfigError("unknown config key '" + k + "' in checkpoint");
  });
  return c;
}

}  // namespace tical
