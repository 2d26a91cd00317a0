#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tical/anchors.hpp"
#include "tical/consistency.hpp"
#include "tical/datasyn.hpp"
#include "tical/emotree.hpp"
#include "tical/metrics.hpp"
#include "tical/neural.hpp"
#include "tical/stages.hpp"

namespace tical {

// Component switches reproducing the ablation rows.
struct Ablations {
  bool no_tau = false;       // phi == 1 in the AC loss
  bool no_kappa = false;     // kappa == 0.5 in the task loss and the fusion
  bool euclid_hasl = false;  // Euclidean distance for anchor lookup and typicality
  bool no_hypcpcc = false;   // drop the late-phase structure regulariser

  void enable(const std::string& name);  // "no-tau", "no-kappa", "euclid-hasl", "no-hypcpcc"
  std::vector<std::string> names() const;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-4;
  double lr_decay = 0.005;  // per-epoch multiplicative learning-rate decay
  std::size_t lambda = 5;   // last epoch of the warm-up phase
  double theta = 0.8;       // anchor admission confidence threshold (strict)
  std::size_t hasl_capacity = 128;
  std::size_t min_fill = 8;
  bool hasl_balanced = false;
  double kappa0 = 0.5;  // constant consistency during warm-up
  std::uint64_t seed = 1;
  TaskKind task = TaskKind::kOrdinal;
  ConsistencyParams consistency;  // label_scale filled from task/tree when empty
  TreeSpec tree;
  ModelConfig model;
  Ablations ablations;

  void validate() const;
};

struct Batch {
  std::array<nn::Matrix, 3> x;
  std::vector<std::size_t> labels;
  std::size_t size() const { return labels.size(); }
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices);

struct StepResult {
  Phase phase = Phase::kEarly;
  bool fallback = false;  // late phase but some anchor list not ready yet
  double total = 0.0;
  double task = 0.0;
  double ep = 0.0;
  double ci = 0.0;
  double ac = 0.0;
  double hypcpcc_mean = 0.0;  // (1/3) sum of per-modality HypCPCC actually used
  double hyp_grad_norm = 0.0; // L2 norm of the regulariser's gradient w.r.t. features
  std::vector<double> kappa;  // per-sample weights used in the task loss
  std::array<std::vector<double>, 3> tau;
  std::vector<ConsistencyReport> reports;  // late phase with ready anchors only
  std::array<std::size_t, 3> admitted{};
};

struct EpochReport {
  std::size_t epoch = 0;
  Phase phase = Phase::kEarly;
  double learning_rate = 0.0;
  std::size_t steps = 0;
  double loss_total = 0.0;
  double loss_task = 0.0;
  double loss_ep = 0.0;
  double loss_ci = 0.0;
  double loss_ac = 0.0;
  double hypcpcc = 0.0;
  double hyp_grad_norm = 0.0;
  double mean_kappa = 0.0;
  std::array<std::size_t, 3> hasl_fill{};
  std::optional<Metrics> validation;
};

std::string to_json_line(const EpochReport& r);

struct SampleEvaluation {
  std::optional<ConsistencyReport> report;  // absent while anchors are not ready
  double kappa = 0.0;                       // weight used for fusion
  StageOutputs outputs;
};

struct Evaluation {
  Metrics metrics;
  std::vector<SampleEvaluation> samples;
  bool consistency_ready = false;
  double mean_kappa = 0.0;
};

// Owns the model, optimiser and the three anchor lists, and runs the two-phase
// schedule: warm-up epochs (<= lambda) with constant weights, then
// consistency-weighted losses plus the HypCPCC regulariser.
class Trainer {
 public:
  Trainer(TrainConfig config, std::vector<double> class_weights);
  // Class weights from the inverse label frequency of `train`.
  static Trainer for_dataset(TrainConfig config, const Dataset& train);

  StepResult train_step(const Batch& batch, std::size_t epoch);
  EpochReport run_epoch(const Dataset& train, const Dataset* val, std::size_t epoch);
  // Runs epochs (completed + 1) .. config.epochs, writing one JSON line per epoch.
  void fit(const Dataset& train, const Dataset* val, std::ostream* log = nullptr,
           const std::function<void(const EpochReport&)>& on_epoch = {});

  Evaluation evaluate(const Dataset& data) const;

  using StepObserver = std::function<void(const StepResult&, std::size_t epoch)>;
  void set_step_observer(StepObserver observer) { observer_ = std::move(observer); }

  const TrainConfig& config() const { return config_; }
  const TicalModel& model() const { return model_; }
  TicalModel& model() { return model_; }
  const AnchorList& anchors(Modality m) const { return anchors_[static_cast<std::size_t>(m)]; }
  AnchorList& anchors(Modality m) { return anchors_[static_cast<std::size_t>(m)]; }
  bool anchors_ready() const;
  const EmotionTree& tree() const { return tree_; }
  const std::vector<double>& class_weights() const { return class_weights_; }
  const std::vector<double>& label_scale() const { return config_.consistency.label_scale; }
  std::size_t completed_epochs() const { return completed_epochs_; }
  double learning_rate_for(std::size_t epoch) const;

  // Versioned binary checkpoint, see README ("Checkpoint files").
  std::vector<std::uint8_t> encode_checkpoint() const;
  static Trainer decode_checkpoint(const std::vector<std::uint8_t>& bytes);
  void save_checkpoint(const std::filesystem::path& path) const;
  static Trainer load_checkpoint(const std::filesystem::path& path);

 private:
  std::array<AnchorList, 3> make_anchor_lists() const;

  TrainConfig config_;
  EmotionTree tree_;
  std::vector<double> tree_dist_;
  std::vector<double> class_weights_;
  TicalModel model_;
  nn::Adam optimizer_;
  std::array<AnchorList, 3> anchors_;
  std::mt19937_64 shuffle_rng_;
  std::size_t completed_epochs_ = 0;
  StepObserver observer_;
};

}  // namespace tical
