#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "parallel.hpp"

namespace toolexpander {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::GrpoBaseline: return "grpo_baseline";
    case Strategy::Replace: return "replace";
    case Strategy::Add: return "add";
    case Strategy::DropHard: return "drop_hard";
  }
  return "replace";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "grpo_baseline") return Strategy::GrpoBaseline;
  if (s == "replace") return Strategy::Replace;
  if (s == "add") return Strategy::Add;
  if (s == "drop_hard") return Strategy::DropHard;
  throw config_error("unknown strategy '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  grpo.validate();
  reward_mode.validate();
  if (rounds < 1) throw config_error("rounds must be >= 1");
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  if (hard_rollouts < 1) throw config_error("hard_rollouts must be >= 1");
  if (!(hard_temperature > 0.0)) throw config_error("hard_temperature must be > 0");
  if (!(temperature > 0.0)) throw config_error("temperature must be > 0");
  if (fewshot_k < 1) throw config_error("fewshot_k must be >= 1");
  if (workers < 1) throw config_error("workers must be >= 1");
}

namespace {

template <class T>
T get_as(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw config_error("config key '" + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

TrainConfig train_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "group_size") c.grpo.group_size = get_as<int>(v, key);
    else if (key == "eps_low") c.grpo.eps_low = get_as<double>(v, key);
    else if (key == "eps_high") c.grpo.eps_high = get_as<double>(v, key);
    else if (key == "beta") c.grpo.beta = get_as<double>(v, key);
    else if (key == "use_kl") c.grpo.use_kl = get_as<bool>(v, key);
    else if (key == "lr0") c.grpo.lr0 = get_as<double>(v, key);
    else if (key == "decay_gamma") c.grpo.decay_gamma = get_as<double>(v, key);
    else if (key == "inner_epochs") c.grpo.inner_epochs = get_as<int>(v, key);
    else if (key == "std_floor") c.grpo.std_floor = get_as<double>(v, key);
    else if (key == "rounds") c.rounds = get_as<int>(v, key);
    else if (key == "batch_size") c.batch_size = get_as<int>(v, key);
    else if (key == "hard_rollouts") c.hard_rollouts = get_as<int>(v, key);
    else if (key == "hard_temperature") c.hard_temperature = get_as<double>(v, key);
    else if (key == "temperature") c.temperature = get_as<double>(v, key);
    else if (key == "strategy") c.strategy = strategy_from_string(get_as<std::string>(v, key));
    else if (key == "reward_mode") c.reward_mode.variant = reward_variant_from_string(get_as<std::string>(v, key));
    else if (key == "bonus") c.reward_mode.bonus = get_as<double>(v, key);
    else if (key == "min_examples_exclusive") c.reward_mode.min_examples_exclusive = get_as<int>(v, key);
    else if (key == "fewshot_mode") c.fewshot_mode = fewshot_mode_from_string(get_as<std::string>(v, key));
    else if (key == "fewshot_k") c.fewshot_k = get_as<int>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "dataset_path") c.dataset_path = resolve(base_dir, get_as<std::string>(v, key));
    else if (key == "output_dir") c.output_dir = resolve(base_dir, get_as<std::string>(v, key));
    else if (key == "init_checkpoint") c.init_checkpoint = resolve(base_dir, get_as<std::string>(v, key));
    else if (key == "workers") c.workers = get_as<int>(v, key);
    else if (key == "record_wall_time") c.record_wall_time = get_as<bool>(v, key);
    else throw config_error("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw config_error("config '" + path.string() + "': " + e.what());
  }
  return train_config_from_json(j, path.parent_path());
}

Json train_config_to_json(const TrainConfig& c) {
  return {{"group_size", c.grpo.group_size},
          {"eps_low", c.grpo.eps_low},
          {"eps_high", c.grpo.eps_high},
          {"beta", c.grpo.beta},
          {"use_kl", c.grpo.use_kl},
          {"lr0", c.grpo.lr0},
          {"decay_gamma", c.grpo.decay_gamma},
          {"inner_epochs", c.grpo.inner_epochs},
          {"std_floor", c.grpo.std_floor},
          {"rounds", c.rounds},
          {"batch_size", c.batch_size},
          {"hard_rollouts", c.hard_rollouts},
          {"hard_temperature", c.hard_temperature},
          {"temperature", c.temperature},
          {"strategy", to_string(c.strategy)},
          {"reward_mode", to_string(c.reward_mode.variant)},
          {"bonus", c.reward_mode.bonus},
          {"min_examples_exclusive", c.reward_mode.min_examples_exclusive},
          {"fewshot_mode", to_string(c.fewshot_mode)},
          {"fewshot_k", c.fewshot_k},
          {"seed", c.seed},
          {"dataset_path", c.dataset_path.string()},
          {"output_dir", c.output_dir.string()},
          {"init_checkpoint", c.init_checkpoint.string()},
          {"workers", c.workers},
          {"record_wall_time", c.record_wall_time}};
}

std::set<std::string> classify_hard(const Dataset& dataset, const Environment& env,
                                    const PolicyParams& params, const ClassifyOptions& opts) {
  if (opts.rollouts < 1) throw invalid_argument("classification rollouts must be >= 1");
  std::vector<char> hard(dataset.samples.size(), 0);
  parallel_for(dataset.samples.size(), opts.workers, [&](std::size_t i) {
    const GuidedSample& gs = dataset.samples[i];
    const CandidateSpace& space = env.space(gs.base.id);
    const std::vector<double>& rewards = env.rewards(gs.base.id);
    const bool guided = opts.use_guidance && !gs.exemplars.empty() && demonstrates_tool(gs, space);
    Rng rng = make_stream(opts.seed, static_cast<std::uint64_t>(opts.round), gs.base.id,
                          StreamPurpose::Classify);
    const RolloutGroup g = sample_rollouts(params, space, guided,
                                           static_cast<std::size_t>(opts.rollouts),
                                           opts.temperature, rng);
    bool any_correct = false;
    for (std::size_t k : g.chosen) any_correct = any_correct || rewards[k] >= 1.0;
    hard[i] = any_correct ? 0 : 1;
  });
  std::set<std::string> out;
  for (std::size_t i = 0; i < hard.size(); ++i) {
    if (hard[i]) out.insert(dataset.samples[i].base.id);
  }
  return out;
}

bool has_guided_variant(const GuidedSample& gs) { return !gs.detached && !gs.exemplars.empty(); }

std::vector<TrainingEntry> apply_strategy(const Dataset& dataset,
                                          const std::set<std::string>& hard_ids,
                                          Strategy strategy) {
  std::vector<TrainingEntry> entries;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const GuidedSample& gs = dataset.samples[i];
    const bool hard = hard_ids.count(gs.base.id) > 0;
    if (!hard || strategy == Strategy::GrpoBaseline) {
      entries.push_back({i, false});
      continue;
    }
    switch (strategy) {
      case Strategy::Replace:
        entries.push_back({i, has_guided_variant(gs)});
        break;
      case Strategy::Add:
        entries.push_back({i, false});
        if (has_guided_variant(gs)) entries.push_back({i, true});
        break;
      case Strategy::DropHard:
      case Strategy::GrpoBaseline:
        break;
    }
  }
  return entries;
}

int TrainingState::detached_total() const {
  int n = 0;
  for (const auto& s : dataset.samples) n += s.detached ? 1 : 0;
  return n;
}

RoundResult run_round(const TrainingState& in, const TrainConfig& cfg, const Environment& env) {
  const auto started = std::chrono::steady_clock::now();
  RoundResult res;
  res.state = in;
  TrainingState& st = res.state;
  const int round = st.round;

  // (1) hard samples, always judged on the raw sample
  res.hard_ids = classify_hard(st.dataset, env, st.params,
                               {cfg.hard_rollouts, cfg.hard_temperature, cfg.seed, round,
                                cfg.workers, false});

  // Vetted modes re-draw guidance for this round's hard samples against the
  // current snapshot.
  const bool uses_guidance = cfg.strategy == Strategy::Replace || cfg.strategy == Strategy::Add;
  if (uses_guidance && cfg.fewshot_mode != FewshotMode::Random) {
    const DonorIndex donors(st.dataset);
    const VettingOptions opts{cfg.hard_rollouts, cfg.hard_temperature, cfg.fewshot_k,
                              kVettingRetries};
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < st.dataset.samples.size(); ++i) {
      const auto& gs = st.dataset.samples[i];
      if (!gs.detached && res.hard_ids.count(gs.base.id)) targets.push_back(i);
    }
    std::vector<GuidedSample> vetted(targets.size());
    parallel_for(targets.size(), cfg.workers, [&](std::size_t t) {
      vetted[t] = vet_sample(st.dataset.samples[targets[t]], donors, env, st.params,
                             cfg.fewshot_mode, opts, cfg.seed, static_cast<std::uint64_t>(round));
    });
    for (std::size_t t = 0; t < targets.size(); ++t) st.dataset.samples[targets[t]] = vetted[t];
  }

  // (2) round training set
  const std::vector<TrainingEntry> entries = apply_strategy(st.dataset, res.hard_ids, cfg.strategy);

  // (3) rollouts, rewards, advantages at the round snapshot
  const std::size_t group_size = static_cast<std::size_t>(cfg.grpo.group_size);
  std::vector<RolloutGroup> groups(entries.size());
  parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
    const GuidedSample& gs = st.dataset.samples[entries[i].sample];
    const CandidateSpace& space = env.space(gs.base.id);
    const std::vector<double>& rewards = env.rewards(gs.base.id);
    const bool guided = entries[i].guided && demonstrates_tool(gs, space);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(round), gs.base.id,
                          entries[i].guided ? StreamPurpose::RolloutGuided : StreamPurpose::RolloutRaw);
    RolloutGroup g = sample_rollouts(st.params, space, guided, group_size, cfg.temperature, rng);
    for (std::size_t k : g.chosen) g.rewards.push_back(rewards[k]);
    g.advantages = compute_advantages(g.rewards, cfg.grpo.std_floor);
    groups[i] = std::move(g);
  });

  // (4) fixed-order chunked ascent
  const double lr = lr_at_round(cfg.grpo.lr0, cfg.grpo.decay_gamma, round);
  const std::size_t chunk = static_cast<std::size_t>(cfg.batch_size);
  double clipped_terms = 0.0;
  double total_terms = 0.0;
  for (int epoch = 0; epoch < cfg.grpo.inner_epochs; ++epoch) {
    for (std::size_t begin = 0; begin < groups.size(); begin += chunk) {
      const std::size_t end = std::min(groups.size(), begin + chunk);
      std::vector<PolicyGradient> grads(end - begin);
      std::vector<double> clipped(end - begin, 0.0);
      parallel_for(end - begin, cfg.workers, [&](std::size_t i) {
        const RolloutGroup& g = groups[begin + i];
        const CandidateSpace& space = env.space(g.sample_id);
        grads[i] = objective_gradient(g, st.params, space, cfg.grpo, cfg.temperature);
        clipped[i] = surrogate_objective(g, st.params, space, cfg.grpo, cfg.temperature).clipped_fraction;
      });
      PolicyGradient batch;
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t i = 0; i < grads.size(); ++i) {
        batch.add_scaled(grads[i], inv);
        clipped_terms += clipped[i] * static_cast<double>(group_size);
        total_terms += static_cast<double>(group_size);
      }
      st.params = update_step(st.params, batch, lr);
      res.gradient.add_scaled(batch, 1.0);
    }
  }

  // (5) detach guidance that produced a correct rollout
  double raw_sum = 0.0, guided_sum = 0.0;
  std::size_t raw_n = 0, guided_n = 0;
  int guided_active = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const RolloutGroup& g = groups[i];
    double sum = 0.0;
    bool any_correct = false;
    for (double r : g.rewards) {
      sum += r;
      any_correct = any_correct || r >= 1.0;
    }
    if (entries[i].guided) {
      ++guided_active;
      guided_sum += sum;
      guided_n += g.rewards.size();
      GuidedSample& gs = st.dataset.samples[entries[i].sample];
      if (any_correct && !gs.detached) gs = detach_fewshot(std::move(gs));
    } else {
      raw_sum += sum;
      raw_n += g.rewards.size();
    }
  }

  // (6) report
  RoundReport& rep = res.report;
  rep.round = round;
  rep.lr = lr;
  rep.hard_count = static_cast<int>(res.hard_ids.size());
  rep.guided_active = guided_active;
  rep.detached_total = st.detached_total();
  rep.mean_reward = raw_n ? raw_sum / static_cast<double>(raw_n) : 0.0;
  rep.mean_reward_guided = guided_n ? guided_sum / static_cast<double>(guided_n) : 0.0;
  rep.clipped_fraction = total_terms > 0.0 ? clipped_terms / total_terms : 0.0;
  rep.grad_norm = res.gradient.norm();
  rep.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  st.round = round + 1;
  return res;
}

PolicyParams default_params(const Dataset& dataset, const Environment& env) {
  PolicyParams p;
  for (const auto& gs : dataset.samples) {
    p.theta[gs.base.id].assign(env.space(gs.base.id).size(), 0.0);
  }
  return p;
}

TrainingSetup prepare_training(const TrainConfig& cfg) {
  if (cfg.dataset_path.empty()) throw config_error("dataset_path is required");
  return prepare_training(cfg, load_dataset(cfg.dataset_path));
}

TrainingSetup prepare_training(const TrainConfig& cfg, Dataset dataset) {
  if (!cfg.init_checkpoint.empty()) {
    PolicyParams params = load_checkpoint(cfg.init_checkpoint).params;
    return prepare_training(cfg, std::move(dataset), std::move(params));
  }
  cfg.validate();
  Environment env(dataset, cfg.reward_mode, cfg.seed);
  PolicyParams params = default_params(dataset, env);
  return prepare_training(cfg, std::move(dataset), std::move(params));
}

TrainingSetup prepare_training(const TrainConfig& cfg, Dataset dataset, PolicyParams params) {
  cfg.validate();
  TrainingSetup setup;
  setup.env = Environment(dataset, cfg.reward_mode, cfg.seed);
  for (const auto& gs : dataset.samples) {
    auto it = params.theta.find(gs.base.id);
    if (it == params.theta.end()) {
      throw data_error("no policy parameters for sample '" + gs.base.id + "'");
    }
    if (it->second.size() != setup.env.space(gs.base.id).size()) {
      throw data_error("parameter row for '" + gs.base.id + "' does not match its candidate space");
    }
  }
  setup.state.params = std::move(params);
  bool any_exemplars = false;
  for (const auto& gs : dataset.samples) any_exemplars = any_exemplars || !gs.exemplars.empty();
  if (!any_exemplars) dataset = build_random_fewshots(dataset, cfg.fewshot_k, cfg.seed);
  setup.state.dataset = std::move(dataset);
  return setup;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<RoundReport>& reports,
                       bool include_wall_time) {
  out << "round,lr,hard_count,guided_active,detached_total,mean_reward,mean_reward_guided,"
         "clipped_fraction,wall_ms\n";
  for (const auto& r : reports) {
    out << r.round << ',' << fmt_double(r.lr) << ',' << r.hard_count << ',' << r.guided_active << ','
        << r.detached_total << ',' << fmt_double(r.mean_reward) << ','
        << fmt_double(r.mean_reward_guided) << ',' << fmt_double(r.clipped_fraction) << ','
        << (include_wall_time ? r.wall_ms : 0) << '\n';
  }
}

Json summary_to_json(const TrainingSummary& s) {
  Json traj = Json::array();
  for (std::size_t r = 0; r < s.reports.size(); ++r) {
    traj.push_back({{"round", s.reports[r].round},
                    {"hard_count", s.reports[r].hard_count},
                    {"mean_reward", s.reports[r].mean_reward}});
  }
  return {{"rounds", s.reports.size()},
          {"final_hard_count", s.final_hard_count},
          {"detached_total", s.final_state.detached_total()},
          {"trajectory", traj}};
}

TrainingSummary run_training(const TrainConfig& cfg) {
  return run_training(cfg, prepare_training(cfg));
}

TrainingSummary run_training(const TrainConfig& cfg, TrainingSetup setup) {
  cfg.validate();
  TrainingSummary summary;
  TrainingState state = std::move(setup.state);
  for (int r = 0; r < cfg.rounds; ++r) {
    try {
      RoundResult res = run_round(state, cfg, setup.env);
      summary.reports.push_back(res.report);
      summary.hard_sets.push_back(std::move(res.hard_ids));
      state = std::move(res.state);
    } catch (const Error& e) {
      throw Error(e.code(), "round " + std::to_string(state.round) + ": " + e.what());
    }
  }
  // Hard count under the final parameters, next round's streams.
  summary.final_hard_count = static_cast<int>(
      classify_hard(state.dataset, setup.env, state.params,
                    {cfg.hard_rollouts, cfg.hard_temperature, cfg.seed, state.round, cfg.workers,
                     false})
          .size());
  summary.final_state = std::move(state);

  if (!cfg.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw runtime_error("cannot create '" + cfg.output_dir.string() + "': " + ec.message());
    {
      std::ofstream out(cfg.output_dir / "metrics.csv");
      if (!out) throw runtime_error("cannot write metrics.csv");
      write_metrics_csv(out, summary.reports, cfg.record_wall_time);
    }
    save_checkpoint(cfg.output_dir / "checkpoint.json",
                    {summary.final_state.round, summary.final_state.params, cfg.seed});
    Json traj = Json::array();
    for (std::size_t r = 0; r < summary.hard_sets.size(); ++r) {
      traj.push_back({{"round", summary.reports[r].round},
                      {"hard_count", summary.reports[r].hard_count},
                      {"hard_ids", summary.hard_sets[r]}});
    }
    std::ofstream out(cfg.output_dir / "hard_trajectory.json");
    if (!out) throw runtime_error("cannot write hard_trajectory.json");
    out << Json{{"rounds", traj}, {"final_hard_count", summary.final_hard_count}}.dump(2) << '\n';
  }
  return summary;
}

}  // namespace toolexpander
