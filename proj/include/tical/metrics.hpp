#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tical {

enum class TaskKind { kOrdinal, kCategorical };
std::string_view to_string(TaskKind t);
TaskKind parse_task_kind(std::string_view name);

// K x K counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes) : k_(n_classes), counts_(n_classes * n_classes, 0) {}
  ConfusionMatrix(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                  std::size_t n_classes);

  void add(std::size_t truth, std::size_t pred);
  std::size_t operator()(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  std::size_t n_classes() const { return k_; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t support(std::size_t c) const;    // row sum
  std::size_t predicted(std::size_t c) const;  // column sum

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

struct Metrics {
  std::size_t n = 0;
  std::optional<double> acc2;  // ordinal only; absent when every true score is 0
  double acc_k = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  double uar = 0.0;
  double war = 0.0;
};

// `label_scale` maps classes to sentiment scores for Acc-2 (ignored for categorical).
Metrics compute_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                        std::size_t n_classes, TaskKind task, std::span<const double> label_scale);

// Flat "key=value" record, one pair per line, fixed key order.
std::string format_metrics(const Metrics& m);

}  // namespace tical
