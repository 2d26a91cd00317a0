// tical: generate synthetic data, train, evaluate and inspect.
//
//   tical gen     --out DIR [--seed S] [--p-conflict P] ...
//   tical train   --out DIR [--epochs N] [--ablate NAME]...
//   tical eval    --out DIR [--subset conflict]
//   tical inspect --out DIR [--split val]
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tical/config.hpp"
#include "tical/errors.hpp"
#include "tical/trainer.hpp"

namespace fs = std::filesystem;
using namespace tical;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;  // applied in this order
  std::vector<std::string> ablations;
  std::vector<std::string> settings;  // raw key=value
  std::string split = "test";
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

Dataset load_split(const RunConfig& rc, const std::string& split) {
  const fs::path path = rc.data_path() / (split + ".ticd");
  if (!fs::exists(path)) throw IoError("dataset " + path.string() + " does not exist (run `tical gen` first)");
  return read_dataset(path);
}

void check_compatible(const ModelConfig& model, const Dataset& data, const std::string& what) {
  if (data.n_classes != model.n_classes || data.dims != model.input_dims)
    throw ConfigError(what + " has K=" + std::to_string(data.n_classes) + " dims " + std::to_string(data.dims[0]) +
                      "/" + std::to_string(data.dims[1]) + "/" + std::to_string(data.dims[2]) +
                      " but the model expects K=" + std::to_string(model.n_classes) + " dims " +
                      std::to_string(model.input_dims[0]) + "/" + std::to_string(model.input_dims[1]) + "/" +
                      std::to_string(model.input_dims[2]));
}

RunConfig build_config(const Options& o) {
  RunConfig rc;
  if (!o.config_file.empty()) rc.load_file(o.config_file);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : o.overrides) rc.set(k, v);
  if (!o.ablations.empty()) {
    std::string joined;
    for (const auto& a : o.ablations) joined += (joined.empty() ? "" : ",") + a;
    rc.set("ablate", joined);
  }
  rc.finalize();
  return rc;
}

int cmd_gen(const RunConfig& rc) {
  const GeneratedData g = generate(rc.data);
  const fs::path dir = rc.data_path();
  ensure_dir(dir);
  const std::pair<const char*, const Dataset*> splits[] = {{"train", &g.train}, {"val", &g.val}, {"test", &g.test}};
  for (const auto& [name, d] : splits) {
    write_dataset(*d, dir / (std::string(name) + ".ticd"));
    if (rc.csv) write_dataset_csv(*d, dir / (std::string(name) + ".csv"));
  }
  write_text(dir / "manifest.txt", format_manifest(rc.data));
  for (const auto& [name, d] : splits) std::cout << name << "=" << d->size() << "\n";
  return 0;
}

int cmd_train(const RunConfig& rc) {
  const Dataset train = load_split(rc, "train");
  const Dataset val = load_split(rc, "val");
  check_compatible(rc.train.model, train, "train split");
  check_compatible(rc.train.model, val, "val split");
  const fs::path out(rc.out_dir);
  ensure_dir(out);
  const fs::path log_path = out / "run_log.jsonl";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + log_path.string() + " for writing");

  Trainer trainer = Trainer::for_dataset(rc.train, train);
  trainer.fit(train, &val, &log, [](const EpochReport& r) {
    std::cerr << "epoch " << r.epoch << " loss " << r.loss_total;
    if (r.validation) std::cerr << " val_war " << r.validation->war;
    std::cerr << "\n";
  });
  log.close();
  if (!log) throw IoError("failed writing " + log_path.string());
  trainer.save_checkpoint(rc.checkpoint_path());
  std::cout << "epochs=" << trainer.completed_epochs() << "\ncheckpoint=" << rc.checkpoint_path().string() << "\n";
  return 0;
}

// Rows of `data` in `subset`, with their original indices.
std::pair<Dataset, std::vector<std::size_t>> select(const Dataset& data, const std::string& subset) {
  const Subset s = parse_subset(subset);
  Dataset out{data.n_classes, data.dims, {}};
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool conflict = data.samples[i].conflict();
    if (s == Subset::kAll || (s == Subset::kConflict) == conflict) {
      out.samples.push_back(data.samples[i]);
      ids.push_back(i);
    }
  }
  if (out.samples.empty()) throw InvalidInput("subset '" + subset + "' of the dataset is empty");
  return {std::move(out), std::move(ids)};
}

int cmd_eval(const RunConfig& rc, const std::string& split) {
  const Trainer trainer = Trainer::load_checkpoint(rc.checkpoint_path());
  const Dataset data = load_split(rc, split);
  check_compatible(trainer.config().model, data, split + " split");
  const auto [subset, ids] = select(data, rc.subset);
  const Evaluation ev = trainer.evaluate(subset);

  std::string record = "split=" + split + "\nsubset=" + rc.subset + "\n" + format_metrics(ev.metrics);
  char buf[64];
  std::snprintf(buf, sizeof buf, "mean_kappa=%.17g\n", ev.mean_kappa);
  record += buf;
  const fs::path out(rc.out_dir);
  ensure_dir(out);
  write_text(out / ("metrics_" + split + "_" + rc.subset + ".txt"), record);
  if (rc.csv) {
    std::string rows = "sample_id,label,y_ep,y_ci,y_ac,y_final,kappa\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& s = ev.samples[i];
      std::snprintf(buf, sizeof buf, "%.17g", s.kappa);
      rows += std::to_string(ids[i]) + "," + std::to_string(subset.samples[i].label) + "," +
              std::to_string(s.outputs.y_ep) + "," + std::to_string(s.outputs.y_ci) + "," +
              std::to_string(s.outputs.y_ac) + "," + std::to_string(s.outputs.y_final) + "," + buf + "\n";
    }
    write_text(out / ("predictions_" + split + "_" + rc.subset + ".csv"), rows);
  }
  std::cout << record;
  return 0;
}

int cmd_inspect(const RunConfig& rc, const std::string& split) {
  const Trainer trainer = Trainer::load_checkpoint(rc.checkpoint_path());
  if (!trainer.anchors_ready())
    throw NotReady("anchor lists are not ready in " + rc.checkpoint_path().string() +
                   " (train past the warm-up phase first)");
  const Dataset data = load_split(rc, split);
  check_compatible(trainer.config().model, data, split + " split");
  const auto [subset, ids] = select(data, rc.subset);
  const Evaluation ev = trainer.evaluate(subset);

  std::string rows =
      "sample_id,label,gen_l,gen_v,gen_a,ystar_l,ystar_v,ystar_a,tau_l,tau_v,tau_a,d_label,kappa,"
      "y_ep,y_ci,y_ac,y_final\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& s = ev.samples[i];
    const auto& rec = subset.samples[i];
    const ConsistencyReport& r = *s.report;
    std::string row = std::to_string(ids[i]) + "," + std::to_string(rec.label);
    for (auto g : rec.gen_labels) row += "," + std::to_string(g);
    for (const auto& m : r.modality) row += "," + std::to_string(m.pseudo_label);
    for (const auto& m : r.modality) row += "," + num(m.typicality);
    row += "," + num(r.d_label) + "," + num(r.kappa);
    row += "," + std::to_string(s.outputs.y_ep) + "," + std::to_string(s.outputs.y_ci) + "," +
           std::to_string(s.outputs.y_ac) + "," + std::to_string(s.outputs.y_final) + "\n";
    rows += row;
  }
  const fs::path out(rc.out_dir);
  ensure_dir(out);
  const fs::path path = out / ("inspect_" + split + "_" + rc.subset + ".csv");
  write_text(path, rows);
  std::cout << "rows=" << ids.size() << "\nfile=" << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency-aware multimodal fusion on synthetic data"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", o.settings, "override any config key (key=value), repeatable");
  app.add_option("--ablate", o.ablations, "no-tau, no-kappa, euclid-hasl or no-hypcpcc (repeatable)");
  app.add_option("--split", o.split, "dataset split for eval and inspect")
      ->check(CLI::IsMember({"train", "val", "test"}));
  // Flags that map one-to-one onto config keys.
  const std::pair<const char*, const char*> keyed[] = {
      {"--seed", "seed"},       {"--epochs", "epochs"},       {"--lambda", "lambda"},
      {"--theta", "theta"},     {"--hasl-capacity", "hasl_capacity"}, {"--t", "t"},
      {"--k", "k"},             {"--rho", "rho"},             {"--p-conflict", "p_conflict"},
      {"--subset", "subset"},   {"--out", "out"},             {"--data", "data"},
      {"--checkpoint", "checkpoint"}, {"--tree", "tree_file"},
  };
  for (const auto& [flag, key] : keyed) {
    std::string k = key;
    app.add_option_function<std::string>(flag, [&o, k](const std::string& v) { o.overrides.emplace_back(k, v); },
                                         "config key " + k);
  }
  app.add_flag_callback("--csv", [&o] { o.overrides.emplace_back("csv", "true"); }, "also write CSV files");

  auto* gen = app.add_subcommand("gen", "generate train/val/test splits and a manifest");
  auto* train = app.add_subcommand("train", "train a model, write a checkpoint and a JSON-lines log");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  auto* inspect = app.add_subcommand("inspect", "write per-sample consistency reports as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig rc = build_config(o);
    if (gen->parsed()) return cmd_gen(rc);
    if (train->parsed()) return cmd_train(rc);
    if (eval->parsed()) return cmd_eval(rc, o.split);
    if (inspect->parsed()) return cmd_inspect(rc, o.split);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "bad file: " << e.what() << "\n";
    return kExitIo;
  } catch (const NotReady& e) {
    std::cerr << "not ready: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
