#include "toolexpander/toolexpander.h"

#include <cstring>
#include <memory>
#include <fstream>
#include <sstream>
#include <string>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "fewshot.hpp"
#include "reward.hpp"
#include "toy_dataset.hpp"
#include "trainer.hpp"

using namespace toolexpander;

struct tx_dataset {
  Dataset data;
};

struct tx_policy {
  Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

tx_status fail(tx_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
tx_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TX_OK;
  } catch (const Error& e) {
    return fail(static_cast<tx_status>(static_cast<int>(e.code())), e.what());
  } catch (const Json::exception& e) {
    return fail(TX_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(TX_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(TX_ERR_RUNTIME, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw invalid_argument(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

RewardMode reward_mode_of(const char* name) {
  RewardMode m;
  if (name != nullptr) m.variant = reward_variant_from_string(name);
  return m;
}

Json score_json(const std::string& id, const RewardBreakdown& r) {
  return {{"sample_id", id},
          {"value", r.value},
          {"result_ok", r.result_ok},
          {"format_ok", r.format_ok},
          {"fewshot_ok", r.fewshot_ok}};
}

const GuidedSample& sample_of(const Dataset& ds, const std::string& id) {
  const GuidedSample* gs = ds.find(id);
  if (gs == nullptr) throw data_error("unknown sample id '" + id + "'");
  return *gs;
}

}  // namespace

extern "C" {

const char* tx_last_error(void) { return g_last_error.c_str(); }

void tx_string_free(char* s) { delete[] s; }

tx_status tx_dataset_load(const char* path, tx_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<tx_dataset>();
    ds->data = load_dataset(path);
    *out = ds.release();
  });
}

void tx_dataset_free(tx_dataset* ds) { delete ds; }

tx_status tx_dataset_counts(const tx_dataset* ds, size_t* total, size_t* with_fewshot,
                            size_t* without_fewshot) {
  return guarded([&] {
    require(ds, "dataset");
    const DatasetCounters c = ds->data.counters();
    if (total) *total = c.total;
    if (with_fewshot) *with_fewshot = c.with_fewshot;
    if (without_fewshot) *without_fewshot = c.without_fewshot;
  });
}

tx_status tx_dataset_save(const tx_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    save_dataset(path, ds->data);
  });
}

tx_status tx_policy_load(const char* path, tx_policy** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto p = std::make_unique<tx_policy>();
    p->ckpt = load_checkpoint(path);
    *out = p.release();
  });
}

void tx_policy_free(tx_policy* policy) { delete policy; }

tx_status tx_policy_round(const tx_policy* policy, int* round) {
  return guarded([&] {
    require(policy, "policy");
    require(round, "round");
    *round = policy->ckpt.round;
  });
}

tx_status tx_policy_seed(const tx_policy* policy, uint64_t* seed) {
  return guarded([&] {
    require(policy, "policy");
    require(seed, "seed");
    *seed = policy->ckpt.global_seed;
  });
}

tx_status tx_dataset_build_fewshots(tx_dataset* ds, const char* mode, const tx_policy* policy,
                                    int k, int rollouts, double temperature, uint64_t seed) {
  return guarded([&] {
    require(ds, "dataset");
    require(mode, "mode");
    if (k < 1) throw invalid_argument("k must be >= 1");
    const FewshotMode m = fewshot_mode_from_string(mode);
    if (m == FewshotMode::Random) {
      ds->data = build_random_fewshots(ds->data, k, seed);
      return;
    }
    if (policy == nullptr) throw config_error("vetted few-shot modes need a checkpoint");
    const Environment env(ds->data, RewardMode{}, seed);
    const VettingOptions opts{rollouts, temperature, k, kVettingRetries};
    ds->data = build_vetted_fewshots(ds->data, env, policy->ckpt.params, m, opts, seed);
  });
}

tx_status tx_classify_hard(const tx_dataset* ds, const tx_policy* policy, const char* reward_mode,
                           int rollouts, double temperature, uint64_t seed, int workers,
                           char** json_out) {
  return guarded([&] {
    require(ds, "dataset");
    require(policy, "policy");
    require(json_out, "json_out");
    if (!(temperature > 0.0)) throw invalid_argument("temperature must be > 0");
    const Environment env(ds->data, reward_mode_of(reward_mode), seed);
    const auto hard = classify_hard(ds->data, env, policy->ckpt.params,
                                    {rollouts, temperature, seed, policy->ckpt.round,
                                     workers < 1 ? 1 : workers, false});
    const Json j{{"hard_count", hard.size()}, {"hard_ids", hard}};
    *json_out = dup_string(j.dump());
  });
}

tx_status tx_score_text(const tx_dataset* ds, const char* sample_id, const char* text,
                        const char* reward_mode, char** json_out) {
  return guarded([&] {
    require(ds, "dataset");
    require(sample_id, "sample_id");
    require(text, "text");
    require(json_out, "json_out");
    const RewardMode mode = reward_mode_of(reward_mode);
    const GuidedSample& gs = sample_of(ds->data, sample_id);
    *json_out = dup_string(score_json(sample_id, reward(text, gs.base, mode)).dump());
  });
}

tx_status tx_score_jsonl(const tx_dataset* ds, const char* input_path, const char* reward_mode,
                         char** jsonl_out) {
  return guarded([&] {
    require(ds, "dataset");
    require(input_path, "input_path");
    require(jsonl_out, "jsonl_out");
    const RewardMode mode = reward_mode_of(reward_mode);
    std::ifstream in(input_path);
    if (!in) throw data_error(std::string("cannot open '") + input_path + "'");
    std::ostringstream out;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const Json j = Json::parse(line);
        const std::string id = j.at("sample_id").get<std::string>();
        const std::string text = j.at("text").get<std::string>();
        out << score_json(id, reward(text, sample_of(ds->data, id).base, mode)).dump() << '\n';
      } catch (const Json::exception& e) {
        throw data_error("line " + std::to_string(n) + ": " + e.what());
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(n) + ": " + e.what());
      }
    }
    *jsonl_out = dup_string(out.str());
  });
}

tx_status tx_train(const char* config_path, const char* output_dir, int workers,
                   char** summary_json_out) {
  return guarded([&] {
    require(config_path, "config_path");
    TrainConfig cfg = load_train_config(config_path);
    if (output_dir != nullptr) cfg.output_dir = output_dir;
    if (workers > 0) cfg.workers = workers;
    if (cfg.output_dir.empty()) throw config_error("output_dir is required");
    const TrainingSummary s = run_training(cfg);
    if (summary_json_out) *summary_json_out = dup_string(summary_to_json(s).dump());
  });
}

tx_status tx_experiment_rollouts_vs_fewshots(const char* config_path, int workers,
                                             char** report_json_out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(report_json_out, "report_json_out");
    TrainConfig cfg = load_train_config(config_path);
    if (workers > 0) cfg.workers = workers;
    const TrainingSetup setup = prepare_training(cfg);
    const RolloutsVsFewshotsOptions opts{cfg.hard_rollouts, 32, cfg.hard_temperature, cfg.seed,
                                         cfg.workers};
    const auto r = experiment_rollouts_vs_fewshots(setup.state.dataset, setup.env,
                                                   setup.state.params, opts);
    *report_json_out = dup_string(report_to_json(r).dump());
  });
}

tx_status tx_write_toy_bundle(const char* dir) {
  return guarded([&] {
    require(dir, "dir");
    write_toy_bundle(dir);
  });
}

}  // extern "C"
