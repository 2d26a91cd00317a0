#include "tical/metrics.hpp"

#include <cstdio>

#include "tical/errors.hpp"

namespace tical {

std::string_view to_string(TaskKind t) { return t == TaskKind::kOrdinal ? "ordinal" : "categorical"; }

TaskKind parse_task_kind(std::string_view name) {
  if (name == "ordinal") return TaskKind::kOrdinal;
  if (name == "categorical") return TaskKind::kCategorical;
  throw InvalidSpec("unknown task kind '" + std::string(name) + "'");
}

ConfusionMatrix::ConfusionMatrix(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                                 std::size_t n_classes)
    : ConfusionMatrix(n_classes) {
  if (truth.size() != pred.size()) throw InvalidInput("confusion matrix: label sequences differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], pred[i]);
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred) {
  if (truth >= k_ || pred >= k_) throw InvalidInput("confusion matrix: class index out of range");
  ++counts_[truth * k_ + pred];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < k_; ++c) s += (*this)(c, c);
  return s;
}

std::size_t ConfusionMatrix::support(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += (*this)(c, p);
  return s;
}

std::size_t ConfusionMatrix::predicted(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += (*this)(t, c);
  return s;
}

Metrics compute_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                        std::size_t n_classes, TaskKind task, std::span<const double> label_scale) {
  if (truth.size() != pred.size()) throw InvalidInput("metrics: label sequences differ in length");
  if (truth.empty()) throw InvalidInput("metrics: no samples");
  const ConfusionMatrix cm(truth, pred, n_classes);
  Metrics m;
  m.n = truth.size();
  m.war = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  m.acc_k = m.war;

  double recall_sum = 0.0;
  double f1_weighted = 0.0;
  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto support = cm.support(c);
    if (support == 0) continue;
    ++present;
    const double tp = static_cast<double>(cm(c, c));
    const double recall = tp / static_cast<double>(support);
    const auto predicted = cm.predicted(c);
    const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    recall_sum += recall;
    f1_sum += f1;
    f1_weighted += f1 * static_cast<double>(support);
  }
  m.uar = recall_sum / static_cast<double>(present);
  m.f1_macro = f1_sum / static_cast<double>(present);
  m.f1_weighted = f1_weighted / static_cast<double>(cm.total());

  if (task == TaskKind::kOrdinal) {
    if (label_scale.size() != n_classes) throw InvalidInput("metrics: label_scale size != n_classes");
    auto sign = [](double x) { return (x > 0) - (x < 0); };
    std::size_t scored = 0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const int st = sign(label_scale[truth[i]]);
      if (st == 0) continue;
      ++scored;
      agree += sign(label_scale[pred[i]]) == st;
    }
    if (scored > 0) m.acc2 = static_cast<double>(agree) / static_cast<double>(scored);
  }
  return m;
}

std::string format_metrics(const Metrics& m) {
  std::string out;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out += buf;
  };
  out += "n=" + std::to_string(m.n) + "\n";
  if (m.acc2) put("acc2", *m.acc2);
  put("acc_k", m.acc_k);
  put("f1_weighted", m.f1_weighted);
  put("f1_macro", m.f1_macro);
  put("uar", m.uar);
  put("war", m.war);
  return out;
}

}  // namespace tical
