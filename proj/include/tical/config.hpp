#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tical/datasyn.hpp"
#include "tical/trainer.hpp"

namespace tical {

// Everything a CLI run needs. Loaded from a plain-text "key = value" file and then
// overridden key by key; unknown keys are rejected with ConfigError.
struct RunConfig {
  TrainConfig train;
  SyntheticSpec data;
  std::string tree_file;  // optional tree spec file; replaces train.tree when set
  std::string out_dir = "run";
  std::string data_dir;   // defaults to out_dir
  std::string checkpoint; // defaults to <out_dir>/checkpoint.tick
  std::string subset = "all";
  bool csv = false;

  // Sets one key. Keys use underscores; dashes are accepted as aliases.
  void set(std::string_view key, std::string_view value);
  void load_file(const std::filesystem::path& path);
  void parse(std::string_view text, const std::string& origin = "config");

  // Cross-field consistency (dims, class counts, tree) and per-struct validation.
  void finalize();

  std::string format() const;  // round-trips through parse()
  std::filesystem::path data_path() const;
  std::filesystem::path checkpoint_path() const;
};

// Serialises only the training-related keys (checkpoint config echo).
std::string format_train_config(const TrainConfig& c);
TrainConfig parse_train_config(std::string_view text);

}  // namespace tical
