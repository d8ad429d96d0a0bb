#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "toolexpander/toolexpander.h"

namespace {

int report(tx_status s) {
  if (s != TX_OK) std::fprintf(stderr, "error: %s\n", tx_last_error());
  // Bad arguments are a configuration problem from the command line's view.
  return s == TX_ERR_INVALID_ARGUMENT ? TX_ERR_CONFIG : static_cast<int>(s);
}

int print_owned(tx_status s, char* text) {
  if (s == TX_OK && text != nullptr) {
    std::fputs(text, stdout);
    const std::size_t n = std::char_traits<char>::length(text);
    if (n == 0 || text[n - 1] != '\n') std::fputc('\n', stdout);
  }
  tx_string_free(text);
  return report(s);
}

struct DatasetHandle {
  tx_dataset* p = nullptr;
  ~DatasetHandle() { tx_dataset_free(p); }
};

struct PolicyHandle {
  tx_policy* p = nullptr;
  ~PolicyHandle() { tx_policy_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-sample GRPO training on a toy tool-calling environment"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  int workers = 0;
  auto* train = app.add_subcommand("train", "Run multi-round training");
  train->add_option("--config", config_path, "JSON config file")->required();
  train->add_option("--output-dir", output_dir, "Overrides output_dir from the config");
  train->add_option("--workers", workers, "Overrides workers from the config");

  std::string checkpoint, dataset_path, reward_mode = "plain";
  int rollouts = 10;
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;
  auto* classify = app.add_subcommand("classify-hard", "List samples with no correct rollout");
  classify->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  classify->add_option("--rollouts", rollouts, "Rollouts per sample (M)")->required();
  classify->add_option("--dataset", dataset_path, "Dataset JSONL")->required();
  classify->add_option("--temperature", temperature, "Sampling temperature");
  classify->add_option("--reward-mode", reward_mode, "plain or self_exemplifying");
  classify->add_option("--seed", seed, "Defaults to the checkpoint's global seed");
  classify->add_option("--workers", workers, "Worker threads");

  std::string mode, output_path;
  int k = 1;
  auto* fewshots = app.add_subcommand("build-fewshots", "Attach exemplars to a dataset");
  fewshots->add_option("--mode", mode, "random, cautious or bold")
      ->required()
      ->check(CLI::IsMember({"random", "cautious", "bold"}));
  fewshots->add_option("--dataset", dataset_path, "Input dataset JSONL")->required();
  fewshots->add_option("--output", output_path, "Output dataset JSONL")->required();
  fewshots->add_option("--checkpoint", checkpoint, "Policy used for vetting");
  fewshots->add_option("-k", k, "Exemplars per ground-truth tool");
  fewshots->add_option("--rollouts", rollouts, "Vetting rollouts");
  fewshots->add_option("--temperature", temperature, "Vetting temperature");
  fewshots->add_option("--seed", seed, "RNG seed (default 0)");

  std::string input_path;
  auto* score = app.add_subcommand("score", "Score responses with the rule-based reward");
  score->add_option("--input", input_path, "JSONL of {sample_id, text}")->required();
  score->add_option("--dataset", dataset_path, "Dataset JSONL holding the samples")->required();
  score->add_option("--reward-mode", reward_mode, "plain or self_exemplifying");

  std::string experiment_name;
  auto* experiment = app.add_subcommand("experiment", "Run a bundled experiment");
  experiment->add_option("name", experiment_name, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"rollouts-vs-fewshots"}));
  experiment->add_option("--config", config_path, "JSON config file")->required();
  experiment->add_option("--workers", workers, "Worker threads");

  auto* make_toy = app.add_subcommand("make-toy", "Write the toy dataset bundle");
  make_toy->add_option("--output-dir", output_dir, "Target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return TX_ERR_CONFIG;
  }

  if (*train) {
    char* summary = nullptr;
    const tx_status s = tx_train(config_path.c_str(), output_dir.empty() ? nullptr : output_dir.c_str(),
                                 workers, &summary);
    return print_owned(s, summary);
  }

  if (*classify) {
    DatasetHandle ds;
    PolicyHandle policy;
    if (tx_status s = tx_dataset_load(dataset_path.c_str(), &ds.p); s != TX_OK) return report(s);
    if (tx_status s = tx_policy_load(checkpoint.c_str(), &policy.p); s != TX_OK) return report(s);
    std::uint64_t effective_seed = 0;
    if (seed) {
      effective_seed = *seed;
    } else if (tx_status s = tx_policy_seed(policy.p, &effective_seed); s != TX_OK) {
      return report(s);
    }
    char* out = nullptr;
    const tx_status s = tx_classify_hard(ds.p, policy.p, reward_mode.c_str(), rollouts, temperature,
                                         effective_seed, workers, &out);
    return print_owned(s, out);
  }

  if (*fewshots) {
    DatasetHandle ds;
    PolicyHandle policy;
    if (tx_status s = tx_dataset_load(dataset_path.c_str(), &ds.p); s != TX_OK) return report(s);
    if (!checkpoint.empty()) {
      if (tx_status s = tx_policy_load(checkpoint.c_str(), &policy.p); s != TX_OK) return report(s);
    }
    if (tx_status s = tx_dataset_build_fewshots(ds.p, mode.c_str(), policy.p, k, rollouts,
                                                temperature, seed.value_or(0));
        s != TX_OK) {
      return report(s);
    }
    if (tx_status s = tx_dataset_save(ds.p, output_path.c_str()); s != TX_OK) return report(s);
    std::size_t total = 0, with = 0, without = 0;
    tx_dataset_counts(ds.p, &total, &with, &without);
    std::printf("{\"total\":%zu,\"with_fewshot\":%zu,\"without_fewshot\":%zu}\n", total, with, without);
    return 0;
  }

  if (*score) {
    DatasetHandle ds;
    if (tx_status s = tx_dataset_load(dataset_path.c_str(), &ds.p); s != TX_OK) return report(s);
    char* out = nullptr;
    const tx_status s = tx_score_jsonl(ds.p, input_path.c_str(), reward_mode.c_str(), &out);
    if (s == TX_OK && out != nullptr) std::fputs(out, stdout);
    tx_string_free(out);
    return report(s);
  }

  if (*experiment) {
    char* out = nullptr;
    const tx_status s = tx_experiment_rollouts_vs_fewshots(config_path.c_str(), workers, &out);
    return print_owned(s, out);
  }

  if (*make_toy) return report(tx_write_toy_bundle(output_dir.c_str()));
  return TX_ERR_CONFIG;
}
