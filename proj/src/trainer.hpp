#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "fewshot.hpp"
#include "grpo.hpp"
#include "policy.hpp"
#include "reward.hpp"

namespace toolexpander {

enum class Strategy { GrpoBaseline, Replace, Add, DropHard };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct TrainConfig {
  GrpoConfig grpo;
  int rounds = 10;
  int batch_size = 1024;
  int hard_rollouts = 10;
  double hard_temperature = 0.7;
  double temperature = 0.7;
  Strategy strategy = Strategy::Replace;
  RewardMode reward_mode;
  FewshotMode fewshot_mode = FewshotMode::Random;
  int fewshot_k = kDefaultExemplarsPerTool;
  std::uint64_t seed = 0;
  std::filesystem::path dataset_path;
  std::filesystem::path output_dir;
  std::filesystem::path init_checkpoint;
  int workers = 1;
  bool record_wall_time = false;

  void validate() const;
};

/// Flat JSON object keyed by field name; the GrpoConfig and RewardMode
/// fields sit at top level. Relative paths resolve against `base_dir`.
TrainConfig train_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
TrainConfig load_train_config(const std::filesystem::path& path);
Json train_config_to_json(const TrainConfig& cfg);

struct RoundReport {
  int round = 0;
  double lr = 0.0;
  int hard_count = 0;
  int guided_active = 0;
  int detached_total = 0;
  double mean_reward = 0.0;
  double mean_reward_guided = 0.0;
  double clipped_fraction = 0.0;
  std::int64_t wall_ms = 0;
  double grad_norm = 0.0;  // not part of the CSV
};

struct ClassifyOptions {
  int rollouts = 10;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  int round = 0;
  int workers = 1;
  /// Classify samples that carry exemplars in their guided form.
  bool use_guidance = false;
};

/// A sample is hard iff every one of its rollouts scores below 1. Streams
/// are keyed by (seed, round, id), so raising the rollout count extends the
/// same draws.
std::set<std::string> classify_hard(const Dataset& dataset, const Environment& env,
                                    const PolicyParams& params, const ClassifyOptions& opts);

struct TrainingEntry {
  std::size_t sample = 0;  // index into Dataset::samples
  bool guided = false;
};

bool has_guided_variant(const GuidedSample& gs);

std::vector<TrainingEntry> apply_strategy(const Dataset& dataset,
                                          const std::set<std::string>& hard_ids,
                                          Strategy strategy);

struct TrainingState {
  PolicyParams params;
  Dataset dataset;
  int round = 0;

  int detached_total() const;
};

struct RoundResult {
  TrainingState state;
  RoundReport report;
  std::set<std::string> hard_ids;
  /// Sum of the batch gradients applied this round.
  PolicyGradient gradient;
};

RoundResult run_round(const TrainingState& state, const TrainConfig& cfg, const Environment& env);

/// Zero rows for every sample, g = 2, e = 0.
PolicyParams default_params(const Dataset& dataset, const Environment& env);

/// Loads dataset/checkpoint, builds the environment and random exemplars.
struct TrainingSetup {
  TrainingState state;
  Environment env;
};
TrainingSetup prepare_training(const TrainConfig& cfg);
TrainingSetup prepare_training(const TrainConfig& cfg, Dataset dataset);
/// Ignores cfg.init_checkpoint; `params` must cover every sample.
TrainingSetup prepare_training(const TrainConfig& cfg, Dataset dataset, PolicyParams params);

struct TrainingSummary {
  std::vector<RoundReport> reports;
  std::vector<std::set<std::string>> hard_sets;
  TrainingState final_state;
  int final_hard_count = 0;
};

/// Runs cfg.rounds rounds. With a non-empty output_dir writes metrics.csv,
/// checkpoint.json and hard_trajectory.json there.
TrainingSummary run_training(const TrainConfig& cfg);
TrainingSummary run_training(const TrainConfig& cfg, TrainingSetup setup);

void write_metrics_csv(std::ostream& out, const std::vector<RoundReport>& reports,
                       bool include_wall_time);
Json summary_to_json(const TrainingSummary& summary);

}  // namespace toolexpander
