// silverqa: train and evaluate a retrieval QA pipeline in which an accurate
// pair classifier supervises the mining of weighted silver training pairs
// for an efficient dual-encoder retriever.

#include <filesystem>
#include <iostream>
#include <string>

#include "silverqa/pipeline.hpp"

namespace {

constexpr const char* kUsage = R"(usage: silverqa <subcommand> [options]

subcommands:
  gen-synthetic     generate a synthetic entity-fact corpus into the work dir
  build-index       build the BM25 index and vocabulary over the train pool
  train-scorer      train the pair classifier and report ACC / AUC-PR
  mine              mine weighted silver pairs with the trained supervisor
  train-retriever   train the dual encoder (--pairs gold|augmented)
  evaluate          evaluate a retriever checkpoint on the test split
  e2e               run the whole pipeline and print gold vs augmented metrics

options:
  --config FILE     key=value configuration file
  --<key> VALUE     override any config key (e.g. --seed 3, --work-dir out,
                    --encoder_epochs 80); --work-dir is an alias of work_dir
  --pairs MODE      train-retriever input: gold (default) or augmented
  --checkpoint PATH evaluate: model checkpoint (default: gold checkpoint)
  --bm25            evaluate: score the BM25 baseline instead of a checkpoint
  -h, --help        show this message

exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure
)";

struct Args {
  std::string subcommand;
  std::string config_file;
  std::string pairs_mode = "gold";
  std::string checkpoint;
  bool bm25_baseline = false;
  silverqa::ConfigMap overrides;
};

Args parse_args(int argc, char** argv) {
  Args args;
  if (argc < 2) throw silverqa::ConfigError("missing subcommand");
  args.subcommand = argv[1];
  if (args.subcommand == "-h" || args.subcommand == "--help") {
    args.subcommand = "help";
    return args;
  }
  int i = 2;
  auto next_value = [&](const std::string& flag) {
    if (i + 1 >= argc) throw silverqa::ConfigError("flag " + flag + " expects a value");
    return std::string(argv[++i]);
  };
  for (; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "-h" || arg == "--help") {
      args.subcommand = "help";
      return args;
    }
    if (arg == "--bm25") {
      args.bm25_baseline = true;
      continue;
    }
    if (arg.rfind("--", 0) != 0) {
      throw silverqa::ConfigError("unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      value = next_value(arg);
    }
    if (key == "config") {
      args.config_file = value;
    } else if (key == "pairs") {
      args.pairs_mode = value;
    } else if (key == "checkpoint") {
      args.checkpoint = value;
    } else if (key == "work-dir") {
      args.overrides["work_dir"] = value;
    } else {
      args.overrides[key] = value;
    }
  }
  return args;
}

int run(const Args& args) {
  using namespace silverqa;
  ConfigMap map;
  if (!args.config_file.empty()) map = load_config_file(args.config_file);
  for (const auto& [k, v] : args.overrides) map[k] = v;
  PipelineConfig cfg = make_config(map);
  validate_ranges(cfg);

  if (args.subcommand == "gen-synthetic") {
    cmd_gen_synthetic(cfg);
  } else if (args.subcommand == "build-index") {
    cmd_build_index(cfg);
  } else if (args.subcommand == "train-scorer") {
    cmd_train_scorer(cfg);
  } else if (args.subcommand == "mine") {
    cmd_mine(cfg);
  } else if (args.subcommand == "train-retriever") {
    if (args.pairs_mode == "gold") {
      cmd_train_retriever(cfg, PairsMode::gold);
    } else if (args.pairs_mode == "augmented") {
      cmd_train_retriever(cfg, PairsMode::augmented);
    } else {
      throw ConfigError("--pairs must be 'gold' or 'augmented'");
    }
  } else if (args.subcommand == "evaluate") {
    if (args.bm25_baseline) {
      cmd_evaluate_bm25(cfg);
    } else {
      std::string ckpt =
          args.checkpoint.empty()
              ? (std::filesystem::path(cfg.work_dir) / files::encoder_gold).string()
              : args.checkpoint;
      cmd_evaluate(cfg, ckpt);
    }
  } else if (args.subcommand == "e2e") {
    cmd_e2e(cfg);
  } else {
    throw ConfigError("unknown subcommand '" + args.subcommand + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    Args args = parse_args(argc, argv);
    if (args.subcommand == "help") {
      std::cout << kUsage;
      return 0;
    }
    return run(args);
  } catch (const silverqa::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << kUsage;
    return 1;
  } catch (const silverqa::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const silverqa::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
