#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tical {

enum class TreeScheme { kOrdinalChain, kPolarityHierarchy, kFlatStar, kCustom };

std::string_view to_string(TreeScheme s);
TreeScheme parse_tree_scheme(std::string_view name);

struct TreeEdge {
  std::string parent;
  std::string child;
  double weight = 1.0;
};

// Declarative description of an emotion tree. Class k is the node named "c<k>".
//
// ordinal-chain       c0 - c1 - ... - c{K-1}, unit weights
// polarity-hierarchy  root -> {neg, neu, pos} (weight 2) -> class nodes (weight 1);
//                     empty polarity groups are omitted
// flat-star           root -> every class node, weight 1
// custom              topology taken verbatim from `edges`
//
// `weights`, when non-empty, replaces the generated edge weights in construction
// order. `polarity` assigns each class to -1/0/+1; by default class k gets the
// sign of its ordinal score k - (K-1)/2.
struct TreeSpec {
  TreeScheme scheme = TreeScheme::kOrdinalChain;
  std::size_t n_classes = 7;
  std::vector<double> weights;
  std::vector<int> polarity;
  std::vector<TreeEdge> edges;

  void validate() const;
};

// Plain-text key/value format, see README ("Tree spec files").
TreeSpec parse_tree_spec(std::string_view text);
TreeSpec load_tree_spec(const std::filesystem::path& path);
std::string format_tree_spec(const TreeSpec& spec);

class EmotionTree {
 public:
  // Validates that the edges form a single weighted tree containing c0..c{K-1}.
  static EmotionTree from_edges(const std::vector<TreeEdge>& edges, std::size_t n_classes,
                                std::vector<int> polarity = {});

  std::size_t n_classes() const { return class_node_.size(); }
  std::size_t n_nodes() const { return names_.size(); }
  std::size_t n_edges() const { return edges_.size(); }
  const std::vector<TreeEdge>& edges() const { return edges_; }

  // Sum of weights along the unique path, found by climbing to the common ancestor.
  double distance(std::size_t a, std::size_t b) const;

  // K x K row-major matrix filled by one traversal per class node.
  std::vector<double> all_pairs_distance() const;

  // Weighted depth of class c below the node named "root" (or below the first node).
  double depth(std::size_t c) const;
  int polarity(std::size_t c) const { return polarity_.at(c); }
  bool has_named_root() const { return has_named_root_; }

  // Node id of a class (for structural checks in tests).
  std::size_t class_node(std::size_t c) const { return class_node_.at(c); }
  std::size_t parent(std::size_t node) const { return parent_.at(node); }
  const std::string& node_name(std::size_t node) const { return names_.at(node); }

 private:
  std::vector<std::string> names_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<std::size_t> parent_;
  std::vector<double> parent_weight_;
  std::vector<double> depth_;
  std::vector<std::size_t> level_;
  std::vector<std::size_t> class_node_;
  std::vector<int> polarity_;
  bool has_named_root_ = false;
};

EmotionTree build_tree(const TreeSpec& spec);

double tree_distance(const EmotionTree& tree, std::size_t a, std::size_t b);

// Returns row-major K x K distances.
std::vector<double> all_pairs_distance(const EmotionTree& tree);

// Ordinal score of class k among K levels: k - (K-1)/2 (so K=7 gives -3..+3).
double ordinal_score(std::size_t k, std::size_t n_classes);

}  // namespace tical
