#include "tical/emotree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tical/errors.hpp"

namespace tical {

namespace {

std::string class_name(std::size_t k) { return "c" + std::to_string(k); }

int default_polarity(std::size_t k, std::size_t n) {
  const double s = ordinal_score(k, n);
  return s > 0 ? 1 : (s < 0 ? -1 : 0);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
std::vector<T> parse_list(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  std::vector<T> out;
  T x{};
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw InvalidSpec("tree spec: malformed list for key '" + key + "'");
  return out;
}

}  // namespace

double ordinal_score(std::size_t k, std::size_t n_classes) {
  return static_cast<double>(k) - (static_cast<double>(n_classes) - 1.0) / 2.0;
}

std::string_view to_string(TreeScheme s) {
  switch (s) {
    case TreeScheme::kOrdinalChain: return "ordinal-chain";
    case TreeScheme::kPolarityHierarchy: return "polarity-hierarchy";
    case TreeScheme::kFlatStar: return "flat-star";
    case TreeScheme::kCustom: return "custom";
  }
  return "?";
}

TreeScheme parse_tree_scheme(std::string_view name) {
  if (name == "ordinal-chain") return TreeScheme::kOrdinalChain;
  if (name == "polarity-hierarchy") return TreeScheme::kPolarityHierarchy;
  if (name == "flat-star") return TreeScheme::kFlatStar;
  if (name == "custom") return TreeScheme::kCustom;
  throw InvalidSpec("unknown tree scheme '" + std::string(name) + "'");
}

void TreeSpec::validate() const {
  if (n_classes < 2) throw InvalidSpec("tree spec: n_classes must be at least 2");
  if (!polarity.empty()) {
    if (polarity.size() != n_classes) throw InvalidSpec("tree spec: polarity list length != n_classes");
    for (int p : polarity)
      if (p < -1 || p > 1) throw InvalidSpec("tree spec: polarity entries must be -1, 0 or 1");
  }
  if (scheme == TreeScheme::kCustom && edges.empty())
    throw InvalidSpec("tree spec: scheme 'custom' requires an edges block");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidSpec("tree spec: edge weights must be positive");
}

TreeSpec parse_tree_spec(std::string_view text) {
  TreeSpec spec;
  bool have_classes = false;
  bool in_edges = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (in_edges) {
      std::istringstream es(line);
      TreeEdge e;
      if (!(es >> e.parent >> e.child >> e.weight) || !(es >> std::ws).eof())
        throw InvalidSpec("tree spec line " + std::to_string(line_no) +
                          ": expected 'parent child weight'");
      spec.edges.push_back(std::move(e));
      continue;
    }
    if (line == "edges:" || line == "edges =" || line == "edges") {
      in_edges = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidSpec("tree spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "scheme") {
      spec.scheme = parse_tree_scheme(value);
    } else if (key == "n_classes") {
      auto v = parse_list<long>(value, key);
      if (v.size() != 1 || v[0] < 0) throw InvalidSpec("tree spec: bad n_classes");
      spec.n_classes = static_cast<std::size_t>(v[0]);
      have_classes = true;
    } else if (key == "weights") {
      spec.weights = parse_list<double>(value, key);
    } else if (key == "polarity") {
      spec.polarity = parse_list<int>(value, key);
    } else {
      throw InvalidSpec("tree spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_classes) throw InvalidSpec("tree spec: missing n_classes");
  spec.validate();
  return spec;
}

TreeSpec load_tree_spec(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open tree spec " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_tree_spec(ss.str());
}

std::string format_tree_spec(const TreeSpec& spec) {
  std::ostringstream out;
  out << "scheme = " << to_string(spec.scheme) << "\n";
  out << "n_classes = " << spec.n_classes << "\n";
  auto join = [&](const auto& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << "\n";
  };
  if (!spec.weights.empty()) {
    out << "weights = ";
    join(spec.weights);
  }
  if (!spec.polarity.empty()) {
    out << "polarity = ";
    join(spec.polarity);
  }
  if (!spec.edges.empty()) {
    out << "edges:\n";
    for (const auto& e : spec.edges) out << e.parent << " " << e.child << " " << e.weight << "\n";
  }
  return out.str();
}

EmotionTree EmotionTree::from_edges(const std::vector<TreeEdge>& edges, std::size_t n_classes,
                                    std::vector<int> polarity) {
  if (n_classes < 2) throw InvalidSpec("tree needs at least 2 classes");
  EmotionTree t;
  std::unordered_map<std::string, std::size_t> id;
  auto node = [&](const std::string& name) {
    auto [it, inserted] = id.emplace(name, t.names_.size());
    if (inserted) {
      t.names_.push_back(name);
      t.adj_.emplace_back();
    }
    return it->second;
  };
  // Make "root" node 0 when present so depths are measured from it.
  for (const auto& e : edges)
    if (e.parent == "root" || e.child == "root") {
      node("root");
      t.has_named_root_ = true;
      break;
    }
  for (const auto& e : edges) {
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidSpec("tree edge " + e.parent + "-" + e.child + " has non-positive weight");
    if (e.parent == e.child) throw InvalidSpec("tree edge " + e.parent + " is a self-loop");
    const auto a = node(e.parent);
    const auto b = node(e.child);
    t.adj_[a].emplace_back(b, e.weight);
    t.adj_[b].emplace_back(a, e.weight);
  }
  t.edges_ = edges;
  if (t.names_.empty()) throw InvalidSpec("tree has no edges");
  if (edges.size() + 1 != t.names_.size())
    throw InvalidSpec("tree must have exactly |nodes| - 1 edges");

  const std::size_t n = t.names_.size();
  constexpr auto kNone = static_cast<std::size_t>(-1);
  t.parent_.assign(n, kNone);
  t.parent_weight_.assign(n, 0.0);
  t.depth_.assign(n, 0.0);
  t.level_.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto [v, w] : t.adj_[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      ++visited;
      t.parent_[v] = u;
      t.parent_weight_[v] = w;
      t.depth_[v] = t.depth_[u] + w;
      t.level_[v] = t.level_[u] + 1;
      stack.push_back(v);
    }
  }
  if (visited != n) throw InvalidSpec("tree is not connected");

  t.class_node_.resize(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    auto it = id.find(class_name(k));
    if (it == id.end()) throw InvalidSpec("tree has no node for class " + class_name(k));
    t.class_node_[k] = it->second;
  }
  if (polarity.empty())
    for (std::size_t k = 0; k < n_classes; ++k) polarity.push_back(default_polarity(k, n_classes));
  if (polarity.size() != n_classes) throw InvalidSpec("polarity list length != n_classes");
  t.polarity_ = std::move(polarity);
  return t;
}

double EmotionTree::distance(std::size_t a, std::size_t b) const {
  if (a >= n_classes() || b >= n_classes())
    throw InvalidInput("tree_distance: class index out of range");
  auto u = class_node_[a];
  auto v = class_node_[b];
  double total = 0.0;
  while (level_[u] > level_[v]) total += parent_weight_[u], u = parent_[u];
  while (level_[v] > level_[u]) total += parent_weight_[v], v = parent_[v];
  while (u != v) {
    total += parent_weight_[u] + parent_weight_[v];
    u = parent_[u];
    v = parent_[v];
  }
  return total;
}

std::vector<double> EmotionTree::all_pairs_distance() const {
  const std::size_t k = n_classes();
  std::vector<double> out(k * k, 0.0);
  std::vector<double> dist(n_nodes());
  std::vector<bool> seen(n_nodes());
  for (std::size_t a = 0; a < k; ++a) {
    std::fill(seen.begin(), seen.end(), false);
    std::vector<std::size_t> stack{class_node_[a]};
    dist[class_node_[a]] = 0.0;
    seen[class_node_[a]] = true;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto [v, w] : adj_[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        dist[v] = dist[u] + w;
        stack.push_back(v);
      }
    }
    // fill the upper triangle and mirror it so the matrix is exactly symmetric
    for (std::size_t b = a + 1; b < k; ++b) out[a * k + b] = out[b * k + a] = dist[class_node_[b]];
  }
  return out;
}

double EmotionTree::depth(std::size_t c) const { return depth_.at(class_node_.at(c)); }

EmotionTree build_tree(const TreeSpec& spec) {
  spec.validate();
  const std::size_t k = spec.n_classes;
  std::vector<int> pol = spec.polarity;
  if (pol.empty())
    for (std::size_t c = 0; c < k; ++c) pol.push_back(default_polarity(c, k));

  std::vector<TreeEdge> edges;
  switch (spec.scheme) {
    case TreeScheme::kOrdinalChain:
      for (std::size_t c = 0; c + 1 < k; ++c) edges.push_back({class_name(c), class_name(c + 1), 1.0});
      break;
    case TreeScheme::kFlatStar:
      for (std::size_t c = 0; c < k; ++c) edges.push_back({"root", class_name(c), 1.0});
      break;
    case TreeScheme::kPolarityHierarchy: {
      const std::map<int, std::string> group{{-1, "neg"}, {0, "neu"}, {1, "pos"}};
      for (const auto& [sign, name] : group)
        if (std::count(pol.begin(), pol.end(), sign) > 0) edges.push_back({"root", name, 2.0});
      for (std::size_t c = 0; c < k; ++c) edges.push_back({group.at(pol[c]), class_name(c), 1.0});
      break;
    }
    case TreeScheme::kCustom:
      break;
  }
  if (!spec.edges.empty()) edges = spec.edges;
  if (!spec.weights.empty()) {
    if (spec.weights.size() != edges.size())
      throw InvalidSpec("tree spec: " + std::to_string(spec.weights.size()) + " weights given for " +
                        std::to_string(edges.size()) + " edges");
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i].weight = spec.weights[i];
  }
  return EmotionTree::from_edges(edges, k, std::move(pol));
}

double tree_distance(const EmotionTree& tree, std::size_t a, std::size_t b) {
  return tree.distance(a, b);
}

std::vector<double> all_pairs_distance(const EmotionTree& tree) { return tree.all_pairs_distance(); }

}  // namespace tical
