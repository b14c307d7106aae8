#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "silverqa/common.hpp"

namespace silverqa {

// Flat configuration shared by all subcommands. Every key can come from a
// key=value config file or a --key value command-line override.
//
// Transformer-scale settings (classifier fine-tuning at batch 256 / lr 3e-5;
// retriever at batch 64 / lr 1e-4 / 200 epochs) assume pretrained encoders.
// The defaults here are desk-scale settings for the from-scratch
// bag-of-embeddings models; both sets are listed in the README.
struct PipelineConfig {
  // paths
  std::string train_pairs;
  std::string test_pairs;
  std::string pool;       // train candidate pool; defaults to the pairs' own answers
  std::string test_pool;  // test candidate pool
  std::string work_dir = "work";

  // retriever (dense encoder)
  int encoder_dim = 64;
  int encoder_hash_buckets = 4096;
  double encoder_scale_init = 10.0;
  double encoder_lr = 1e-3;
  int encoder_batch = 32;
  int encoder_epochs = 50;

  // pair scorer (classifier)
  double scorer_lr = 0.25;
  int scorer_epochs = 200;
  double scorer_l2 = 1e-3;
  int negatives_per_strategy = 1;

  // mining
  int mine_k = 10;
  double mine_threshold = 0.5;
  double weight_exponent = 2.0;

  // evaluation
  int eval_cutoff = 100;

  // synthetic corpus generation
  uint64_t synth_entities = 1000;
  uint64_t synth_test_entities = 0;  // 0 = entities / 5
  int synth_templates = 3;
  double synth_rate = 0.5;
  uint64_t synth_vocab = 200;

  uint64_t seed = 1;
};

using ConfigMap = std::map<std::string, std::string>;

// key=value lines; blank lines and '#' comments are ignored.
inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  ConfigMap map;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    map[key] = value;
  }
  return map;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T out;
  ss >> out;
  if (ss.fail() || !ss.eof()) {
    throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
  }
  return out;
}

}  // namespace detail

inline PipelineConfig make_config(const ConfigMap& map) {
  PipelineConfig cfg;
  for (const auto& [key, value] : map) {
    if (key == "train_pairs") cfg.train_pairs = value;
    else if (key == "test_pairs") cfg.test_pairs = value;
    else if (key == "pool") cfg.pool = value;
    else if (key == "test_pool") cfg.test_pool = value;
    else if (key == "work_dir") cfg.work_dir = value;
    else if (key == "encoder_dim") cfg.encoder_dim = detail::parse_number<int>(key, value);
    else if (key == "encoder_hash_buckets") cfg.encoder_hash_buckets = detail::parse_number<int>(key, value);
    else if (key == "encoder_scale_init") cfg.encoder_scale_init = detail::parse_number<double>(key, value);
    else if (key == "encoder_lr") cfg.encoder_lr = detail::parse_number<double>(key, value);
    else if (key == "encoder_batch") cfg.encoder_batch = detail::parse_number<int>(key, value);
    else if (key == "encoder_epochs") cfg.encoder_epochs = detail::parse_number<int>(key, value);
    else if (key == "scorer_lr") cfg.scorer_lr = detail::parse_number<double>(key, value);
    else if (key == "scorer_epochs") cfg.scorer_epochs = detail::parse_number<int>(key, value);
    else if (key == "scorer_l2") cfg.scorer_l2 = detail::parse_number<double>(key, value);
    else if (key == "negatives_per_strategy") cfg.negatives_per_strategy = detail::parse_number<int>(key, value);
    else if (key == "mine_k") cfg.mine_k = detail::parse_number<int>(key, value);
    else if (key == "mine_threshold") cfg.mine_threshold = detail::parse_number<double>(key, value);
    else if (key == "weight_exponent") cfg.weight_exponent = detail::parse_number<double>(key, value);
    else if (key == "eval_cutoff") cfg.eval_cutoff = detail::parse_number<int>(key, value);
    else if (key == "synth_entities") cfg.synth_entities = detail::parse_number<uint64_t>(key, value);
    else if (key == "synth_test_entities") cfg.synth_test_entities = detail::parse_number<uint64_t>(key, value);
    else if (key == "synth_templates") cfg.synth_templates = detail::parse_number<int>(key, value);
    else if (key == "synth_rate") cfg.synth_rate = detail::parse_number<double>(key, value);
    else if (key == "synth_vocab") cfg.synth_vocab = detail::parse_number<uint64_t>(key, value);
    else if (key == "seed") cfg.seed = detail::parse_number<uint64_t>(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

inline void validate_ranges(const PipelineConfig& cfg) {
  if (cfg.encoder_dim < 2) throw ConfigError("encoder_dim must be >= 2");
  if (cfg.encoder_hash_buckets < 1) throw ConfigError("encoder_hash_buckets must be >= 1");
  if (!(cfg.encoder_scale_init > 0.0)) throw ConfigError("encoder_scale_init must be > 0");
  if (cfg.encoder_batch < 2) throw ConfigError("encoder_batch must be >= 2");
  if (cfg.encoder_epochs < 1) throw ConfigError("encoder_epochs must be >= 1");
  if (cfg.scorer_epochs < 1) throw ConfigError("scorer_epochs must be >= 1");
  if (cfg.negatives_per_strategy < 1) throw ConfigError("negatives_per_strategy must be >= 1");
  if (cfg.mine_k < 1) throw ConfigError("mine_k must be >= 1");
  if (!(cfg.mine_threshold >= 0.0 && cfg.mine_threshold <= 1.0)) {
    throw ConfigError("mine_threshold must lie in [0,1]");
  }
  if (!(cfg.weight_exponent > 0.0)) throw ConfigError("weight_exponent must be > 0");
  if (cfg.eval_cutoff < 1) throw ConfigError("eval_cutoff must be >= 1");
}

}  // namespace silverqa
