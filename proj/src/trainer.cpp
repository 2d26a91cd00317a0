#include "tical/trainer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tical/config.hpp"
#include "tical/errors.hpp"
#include "tical/structloss.hpp"

namespace tical {

using nn::Matrix;

// ---- configuration -------------------------------------------------------------

void Ablations::enable(const std::string& name) {
  if (name == "no-tau") no_tau = true;
  else if (name == "no-kappa") no_kappa = true;
  else if (name == "euclid-hasl") euclid_hasl = true;
  else if (name == "no-hypcpcc") no_hypcpcc = true;
  else throw ConfigError("unknown ablation '" + name + "' (expected no-tau, no-kappa, euclid-hasl, no-hypcpcc)");
}

std::vector<std::string> Ablations::names() const {
  std::vector<std::string> out;
  if (no_tau) out.emplace_back("no-tau");
  if (no_kappa) out.emplace_back("no-kappa");
  if (euclid_hasl) out.emplace_back("euclid-hasl");
  if (no_hypcpcc) out.emplace_back("no-hypcpcc");
  return out;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidSpec("epochs must be positive");
  if (batch_size < 2) throw InvalidSpec("batch_size must be at least 2");
  if (!(lambda < epochs)) throw InvalidSpec("lambda must be smaller than epochs");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidSpec("theta must lie in [0, 1]");
  if (!(kappa0 >= 0.0 && kappa0 <= 1.0)) throw InvalidSpec("kappa0 must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw InvalidSpec("learning_rate must be positive");
  if (!(lr_decay >= 0.0 && lr_decay < 1.0)) throw InvalidSpec("lr_decay must lie in [0, 1)");
  if (hasl_capacity == 0) throw InvalidSpec("hasl_capacity must be positive");
  if (min_fill == 0 || min_fill > hasl_capacity) throw InvalidSpec("min_fill must lie in [1, hasl_capacity]");
  model.validate();
  tree.validate();
  if (tree.n_classes != model.n_classes) throw InvalidSpec("tree and model disagree on the class count");
  if (!consistency.label_scale.empty()) consistency.validate(model.n_classes);
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices) {
  Batch b;
  const auto n = static_cast<nn::Index>(indices.size());
  for (std::size_t m = 0; m < 3; ++m) b.x[m].resize(n, static_cast<nn::Index>(data.dims[m]));
  b.labels.reserve(indices.size());
  for (nn::Index r = 0; r < n; ++r) {
    const auto& s = data.samples.at(indices[static_cast<std::size_t>(r)]);
    for (std::size_t m = 0; m < 3; ++m)
      for (std::size_t c = 0; c < data.dims[m]; ++c) b.x[m](r, static_cast<nn::Index>(c)) = s.x[m][c];
    b.labels.push_back(s.label);
  }
  return b;
}

// ---- reports -----------------------------------------------------------------------

std::string to_json_line(const EpochReport& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["phase"] = r.phase == Phase::kEarly ? "early" : "late";
  j["lr"] = r.learning_rate;
  j["steps"] = r.steps;
  j["loss_total"] = r.loss_total;
  j["loss_task"] = r.loss_task;
  j["loss_ep"] = r.loss_ep;
  j["loss_ci"] = r.loss_ci;
  j["loss_ac"] = r.loss_ac;
  j["hypcpcc"] = r.hypcpcc;
  j["hyp_grad_norm"] = r.hyp_grad_norm;
  j["mean_kappa"] = r.mean_kappa;
  j["hasl_fill"] = {{"l", r.hasl_fill[0]}, {"v", r.hasl_fill[1]}, {"a", r.hasl_fill[2]}};
  if (r.validation) {
    const auto& v = *r.validation;
    nlohmann::ordered_json m;
    m["n"] = v.n;
    if (v.acc2) m["acc2"] = *v.acc2;
    m["acc_k"] = v.acc_k;
    m["f1_weighted"] = v.f1_weighted;
    m["uar"] = v.uar;
    m["war"] = v.war;
    j["val"] = m;
  }
  return j.dump();
}

// ---- trainer -------------------------------------------------------------------------

namespace {

TrainConfig prepared(TrainConfig c) {
  c.tree.n_classes = c.model.n_classes;
  c.validate();
  if (c.consistency.label_scale.empty()) {
    c.consistency.label_scale = c.task == TaskKind::kOrdinal ? ordinal_label_scale(c.model.n_classes)
                                                             : categorical_label_scale(build_tree(c.tree));
  }
  c.consistency.validate(c.model.n_classes);
  return c;
}

std::vector<double> row_of(const Matrix& m, nn::Index r) {
  return {m.row(r).data(), m.row(r).data() + m.cols()};
}

}  // namespace

std::array<AnchorList, 3> Trainer::make_anchor_lists() const {
  AnchorOptions o;
  o.capacity = config_.hasl_capacity;
  o.min_fill = config_.min_fill;
  o.balanced = config_.hasl_balanced;
  o.n_classes = config_.model.n_classes;
  o.distance = config_.ablations.euclid_hasl ? DistanceKind::kEuclidean : DistanceKind::kHyperbolic;
  return {AnchorList(Modality::kLanguage, o), AnchorList(Modality::kVisual, o), AnchorList(Modality::kAcoustic, o)};
}

Trainer::Trainer(TrainConfig config, std::vector<double> class_weights)
    : config_(prepared(std::move(config))),
      tree_(build_tree(config_.tree)),
      tree_dist_(tree_.all_pairs_distance()),
      class_weights_(std::move(class_weights)),
      model_(config_.model, config_.seed),
      optimizer_(model_.parameters(), nn::AdamOptions{config_.learning_rate}),
      anchors_(make_anchor_lists()),
      shuffle_rng_(config_.seed ^ 0x9e3779b97f4a7c15ULL) {
  if (class_weights_.size() != config_.model.n_classes)
    throw InvalidInput("class weight count != n_classes");
}

Trainer Trainer::for_dataset(TrainConfig config, const Dataset& train) {
  if (train.n_classes != config.model.n_classes || train.dims != config.model.input_dims)
    throw ConfigError("dataset shape (K=" + std::to_string(train.n_classes) + ") does not match the model config");
  std::vector<std::size_t> labels;
  labels.reserve(train.size());
  for (const auto& s : train.samples) labels.push_back(s.label);
  return Trainer(std::move(config), inverse_frequency_weights(labels, config.model.n_classes));
}

bool Trainer::anchors_ready() const {
  return std::all_of(anchors_.begin(), anchors_.end(), [](const AnchorList& a) { return a.is_ready(); });
}

double Trainer::learning_rate_for(std::size_t epoch) const {
  return config_.learning_rate * std::pow(1.0 - config_.lr_decay, static_cast<double>(epoch - 1));
}

StepResult Trainer::train_step(const Batch& batch, std::size_t epoch) {
  const std::size_t b = batch.size();
  if (b < 2) throw InvalidInput("train_step needs at least 2 samples");
  StepResult r;
  r.phase = epoch <= config_.lambda ? Phase::kEarly : Phase::kLate;
  const auto& ab = config_.ablations;

  const StageGraph g = model_.forward(batch.x);
  std::array<Matrix, 3> feats;
  for (std::size_t m = 0; m < 3; ++m) feats[m] = g.features[m].value();

  // Pseudo labels for every ready modality (late phase only).
  std::array<std::vector<double>, 3> dist;
  std::array<std::vector<std::size_t>, 3> pseudo;
  std::array<bool, 3> have{};
  if (r.phase == Phase::kLate) {
    for (std::size_t m = 0; m < 3; ++m) {
      if (!anchors_[m].is_ready()) continue;
      have[m] = true;
      for (std::size_t i = 0; i < b; ++i) {
        const auto row = feats[m].row(static_cast<nn::Index>(i));
        const auto nearest = anchors_[m].nearest(std::span<const double>(row.data(), feats[m].cols()));
        dist[m].push_back(nearest.distance);
        pseudo[m].push_back(nearest.label);
      }
    }
  }
  const bool weighted = r.phase == Phase::kLate && have[0] && have[1] && have[2];
  r.fallback = r.phase == Phase::kLate && !weighted;

  const double fixed_kappa = ab.no_kappa ? 0.5 : config_.kappa0;
  r.kappa.assign(b, fixed_kappa);
  for (auto& t : r.tau) t.assign(b, 1.0);
  if (weighted) {
    r.reports = estimate_batch(dist, pseudo, config_.consistency);
    for (std::size_t i = 0; i < b; ++i) {
      if (!ab.no_kappa) r.kappa[i] = r.reports[i].kappa;
      if (!ab.no_tau)
        for (std::size_t m = 0; m < 3; ++m) r.tau[m][i] = r.reports[i].modality[m].typicality;
    }
  }

  const nn::Tensor ep = ep_loss_rows(g, batch.labels, class_weights_);
  const nn::Tensor ci = ci_loss_rows(g, batch.labels, class_weights_);
  const nn::Tensor ac = ac_loss_rows(g, batch.labels, class_weights_, r.tau);
  const nn::Tensor task = task_loss(r.kappa, ep, ci, ac);
  nn::Tensor total = task;

  if (r.phase == Phase::kLate && !ab.no_hypcpcc) {
    double grad_sq = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
      if (!have[m]) continue;
      const nn::Tensor h = nn::hypcpcc(g.features[m], pseudo[m], tree_dist_, tree_.n_classes(),
                                       DistanceKind::kHyperbolic, config_.model.eps_arcosh);
      total = nn::sub(total, nn::scale(h, 1.0 / 3.0));
      r.hypcpcc_mean += h.item() / 3.0;

      std::vector<double> grad(static_cast<std::size_t>(feats[m].size()), 0.0);
      CpccKernel kernel{{feats[m].data(), grad.size()}, static_cast<std::size_t>(feats[m].cols()), pseudo[m],
                        tree_dist_, tree_.n_classes(), DistanceKind::kHyperbolic, config_.model.eps_arcosh};
      kernel.accumulate_grad(-1.0 / 3.0, grad);
      for (double x : grad) grad_sq += x * x;
    }
    r.hyp_grad_norm = std::sqrt(grad_sq);
  }

  r.total = total.item();
  r.task = task.item();
  r.ep = ep.value().mean();
  r.ci = ci.value().mean();
  r.ac = ac.value().mean();
  for (auto [name, v] : {std::pair{"total", r.total}, {"task", r.task}, {"ep", r.ep}, {"ci", r.ci}, {"ac", r.ac}})
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite loss term '") + name + "'");

  total.backward();
  optimizer_.step();

  // Anchor admission from the EP heads, using the features of this forward pass.
  for (std::size_t m = 0; m < 3; ++m) {
    const Matrix probs = nn::softmax(g.ep_logits[m].value());
    for (std::size_t i = 0; i < b; ++i) {
      const auto row = static_cast<nn::Index>(i);
      nn::Index pred = 0;
      const double conf = probs.row(row).maxCoeff(&pred);
      const auto f = row_of(feats[m], row);
      if (anchors_[m].try_admit(project_to_ball(f, config_.model.ball()), batch.labels[i],
                                static_cast<std::size_t>(pred), conf, config_.theta))
        ++r.admitted[m];
    }
  }
  if (observer_) observer_(r, epoch);
  return r;
}

EpochReport Trainer::run_epoch(const Dataset& train, const Dataset* val, std::size_t epoch) {
  EpochReport rep;
  rep.epoch = epoch;
  rep.phase = epoch <= config_.lambda ? Phase::kEarly : Phase::kLate;
  rep.learning_rate = learning_rate_for(epoch);
  optimizer_.set_learning_rate(rep.learning_rate);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), shuffle_rng_);

  double kappa_sum = 0.0;
  std::size_t kappa_n = 0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, order.size() - start);
    if (len < 2) break;  // a single leftover sample has no pairs
    const Batch batch = make_batch(train, std::span(order).subspan(start, len));
    const StepResult s = train_step(batch, epoch);
    ++rep.steps;
    rep.loss_total += s.total;
    rep.loss_task += s.task;
    rep.loss_ep += s.ep;
    rep.loss_ci += s.ci;
    rep.loss_ac += s.ac;
    rep.hypcpcc += s.hypcpcc_mean;
    rep.hyp_grad_norm = std::max(rep.hyp_grad_norm, s.hyp_grad_norm);
    for (double k : s.kappa) kappa_sum += k;
    kappa_n += s.kappa.size();
  }
  if (rep.steps > 0) {
    const double n = static_cast<double>(rep.steps);
    rep.loss_total /= n;
    rep.loss_task /= n;
    rep.loss_ep /= n;
    rep.loss_ci /= n;
    rep.loss_ac /= n;
    rep.hypcpcc /= n;
  }
  rep.mean_kappa = kappa_n ? kappa_sum / static_cast<double>(kappa_n) : 0.0;
  for (std::size_t m = 0; m < 3; ++m) rep.hasl_fill[m] = anchors_[m].size();
  completed_epochs_ = epoch;
  if (val && val->size() > 0) rep.validation = evaluate(*val).metrics;
  return rep;
}

void Trainer::fit(const Dataset& train, const Dataset* val, std::ostream* log,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  if (train.n_classes != config_.model.n_classes || train.dims != config_.model.input_dims)
    throw ConfigError("training data does not match the model configuration");
  for (std::size_t epoch = completed_epochs_ + 1; epoch <= config_.epochs; ++epoch) {
    const EpochReport rep = run_epoch(train, val, epoch);
    if (log) *log << to_json_line(rep) << '\n' << std::flush;
    if (on_epoch) on_epoch(rep);
  }
}

Evaluation Trainer::evaluate(const Dataset& data) const {
  if (data.size() == 0) throw InvalidInput("evaluate: empty dataset");
  if (data.n_classes != config_.model.n_classes || data.dims != config_.model.input_dims)
    throw ConfigError("evaluation data (K=" + std::to_string(data.n_classes) +
                      ") does not match the checkpoint configuration");
  nn::NoGradGuard no_grad;
  Evaluation ev;
  ev.consistency_ready = anchors_ready();
  const double fixed_kappa = config_.ablations.no_kappa ? 0.5 : config_.kappa0;
  std::vector<std::size_t> truth;
  std::vector<std::size_t> pred;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  for (std::size_t start = 0; start < data.size(); start += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, data.size() - start);
    const Batch batch = make_batch(data, std::span(idx).subspan(start, len));
    const StageGraph g = model_.forward(batch.x);
    std::array<Matrix, 3> p_ep;
    std::array<Matrix, 3> p_ac;
    for (std::size_t m = 0; m < 3; ++m) {
      p_ep[m] = nn::softmax(g.ep_logits[m].value());
      p_ac[m] = nn::softmax(g.ac_logits[m].value());
    }
    const Matrix p_ci = nn::softmax(g.ci_logits.value());

    std::vector<ConsistencyReport> reports;
    if (ev.consistency_ready) {
      std::array<std::vector<double>, 3> dist;
      std::array<std::vector<std::size_t>, 3> pseudo;
      for (std::size_t m = 0; m < 3; ++m) {
        const Matrix& f = g.features[m].value();
        for (nn::Index i = 0; i < f.rows(); ++i) {
          const auto nearest = anchors_[m].nearest(std::span<const double>(f.row(i).data(), f.cols()));
          dist[m].push_back(nearest.distance);
          pseudo[m].push_back(nearest.label);
        }
      }
      reports = estimate_batch(dist, pseudo, config_.consistency);
    }

    for (std::size_t i = 0; i < len; ++i) {
      const auto row = static_cast<nn::Index>(i);
      SampleEvaluation se;
      if (ev.consistency_ready) se.report = reports[i];
      se.kappa = (ev.consistency_ready && !config_.ablations.no_kappa) ? reports[i].kappa : fixed_kappa;
      auto& o = se.outputs;
      for (std::size_t m = 0; m < 3; ++m) {
        o.p_ep[m] = row_of(p_ep[m], row);
        o.p_ac[m] = row_of(p_ac[m], row);
      }
      o.p_ci = row_of(p_ci, row);
      const auto fused = fuse_predictions(se.kappa, o.p_ep, o.p_ci, o.p_ac);
      o.p_final = fused.p_final;
      o.y_final = fused.label;
      std::vector<double> mean_ep(o.p_ci.size());
      std::vector<double> mean_ac(o.p_ci.size());
      for (std::size_t c = 0; c < mean_ep.size(); ++c) {
        mean_ep[c] = (o.p_ep[0][c] + o.p_ep[1][c] + o.p_ep[2][c]) / 3.0;
        mean_ac[c] = (o.p_ac[0][c] + o.p_ac[1][c] + o.p_ac[2][c]) / 3.0;
      }
      o.y_ep = argmax(mean_ep);
      o.y_ci = argmax(o.p_ci);
      o.y_ac = argmax(mean_ac);
      ev.mean_kappa += se.kappa;
      truth.push_back(batch.labels[i]);
      pred.push_back(o.y_final);
      ev.samples.push_back(std::move(se));
    }
  }
  ev.mean_kappa /= static_cast<double>(data.size());
  ev.metrics = compute_metrics(truth, pred, config_.model.n_classes, config_.task, config_.consistency.label_scale);
  return ev;
}

// ---- checkpoint -----------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'T', 'I', 'C', 'K'};
constexpr std::uint16_t kCheckpointVersion = 1;

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  void put_matrix(const Matrix& m) {
    put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    for (nn::Index i = 0; i < m.size(); ++i) put<double>(m.data()[i]);
  }
  std::vector<std::uint8_t> bytes;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& b, std::size_t end) : bytes_(b), end_(end) {}
  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > end_) throw FormatError(std::string("checkpoint truncated in ") + what, pos_);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(const char* what) {
    const auto n = get<std::uint32_t>(what);
    if (pos_ + n > end_) throw FormatError(std::string("checkpoint truncated in ") + what, pos_);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  Matrix get_matrix(const char* what) {
    const auto r = get<std::uint32_t>(what);
    const auto c = get<std::uint32_t>(what);
    if (pos_ + std::size_t{r} * c * 8 > end_) throw FormatError(std::string("checkpoint truncated in ") + what, pos_);
    Matrix m(r, c);
    for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(what);
    return m;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> Trainer::encode_checkpoint() const {
  ByteWriter w;
  for (char c : kCheckpointMagic) w.put<char>(c);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put_string(format_train_config(config_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(completed_epochs_));

  const auto& params = model_.named_parameters();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    w.put_string(name);
    w.put_matrix(t.value());
  }
  const auto& st = optimizer_.state();
  w.put<std::uint64_t>(st.step);
  w.put<double>(optimizer_.learning_rate());
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.put_matrix(st.first[i]);
    w.put_matrix(st.second[i]);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(class_weights_.size()));
  for (double x : class_weights_) w.put<double>(x);
  for (const auto& list : anchors_) {
    w.put<std::uint64_t>(list.next_seq());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (const auto& e : list.entries()) {
      w.put<std::uint64_t>(e.seq);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(e.label));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(e.feature.dim()));
      for (double x : e.feature.coords()) w.put<double>(x);
    }
  }
  std::ostringstream rng;
  rng << shuffle_rng_;
  w.put_string(rng.str());
  w.put<std::uint32_t>(crc32_of(w.bytes.data() + 6, w.bytes.size() - 6));
  return std::move(w.bytes);
}

Trainer Trainer::decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw FormatError("bad checkpoint magic (expected TICK)", 0);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (stored != crc32_of(bytes.data() + 6, bytes.size() - 10))
    throw FormatError("checkpoint checksum mismatch", bytes.size() - 4);

  ByteReader r(bytes, bytes.size() - 4);
  r.seek(4);
  if (const auto v = r.get<std::uint16_t>("version"); v != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(v), 4);
  TrainConfig cfg = parse_train_config(r.get_string("config"));
  const auto epoch = r.get<std::uint32_t>("epoch");

  const auto n_params = r.get<std::uint32_t>("parameters");
  std::vector<std::pair<std::string, Matrix>> values;
  for (std::uint32_t i = 0; i < n_params; ++i) {
    auto name = r.get_string("parameter name");
    values.emplace_back(std::move(name), r.get_matrix("parameter"));
  }
  nn::AdamState st;
  st.step = r.get<std::uint64_t>("optimizer");
  const double lr = r.get<double>("optimizer");
  for (std::uint32_t i = 0; i < n_params; ++i) {
    st.first.push_back(r.get_matrix("optimizer moments"));
    st.second.push_back(r.get_matrix("optimizer moments"));
  }
  std::vector<double> weights(r.get<std::uint32_t>("class weights"));
  for (auto& x : weights) x = r.get<double>("class weights");

  Trainer t(std::move(cfg), std::move(weights));
  auto& params = t.model_.named_parameters();
  if (params.size() != n_params) throw FormatError("checkpoint parameter count does not match its config", 0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].first != values[i].first || params[i].second.rows() != values[i].second.rows() ||
        params[i].second.cols() != values[i].second.cols())
      throw FormatError("checkpoint parameter '" + values[i].first + "' does not match the model layout", 0);
    params[i].second.mutable_value() = std::move(values[i].second);
  }
  t.optimizer_.restore(std::move(st));
  t.optimizer_.set_learning_rate(lr);
  const BallConfig ball = t.config_.model.ball();
  for (auto& list : t.anchors_) {
    const auto at = r.pos();
    const auto next_seq = r.get<std::uint64_t>("anchors");
    std::vector<AnchorEntry> entries(r.get<std::uint32_t>("anchors"));
    for (auto& e : entries) {
      e.seq = r.get<std::uint64_t>("anchor");
      e.label = r.get<std::uint32_t>("anchor");
      std::vector<double> coords(r.get<std::uint32_t>("anchor"));
      for (auto& x : coords) x = r.get<double>("anchor");
      try {
        e.feature = BallPoint::checked(std::move(coords), ball);
      } catch (const InvalidInput& err) {
        throw FormatError(std::string("invalid anchor: ") + err.what(), at);
      }
    }
    try {
      list.restore(std::move(entries), next_seq);
    } catch (const InvalidInput& err) {
      throw FormatError(std::string("invalid anchor list: ") + err.what(), at);
    }
  }
  std::istringstream rng(r.get_string("rng state"));
  rng >> t.shuffle_rng_;
  t.completed_epochs_ = epoch;
  return t;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  const auto bytes = encode_checkpoint();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Trainer Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tical
