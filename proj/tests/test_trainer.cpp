#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "helpers.hpp"
#include "toy_dataset.hpp"
#include "trainer.hpp"

#ifndef TX_SOURCE_DIR
#error "TX_SOURCE_DIR must point at the repository root"
#endif

using namespace txtest;

namespace {

// Rows where the correct candidate logit is `correct` and the rest are 0.
PolicyParams rows(const Dataset& ds, const Environment& env, const std::vector<double>& correct, double g) {
  PolicyParams p;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& id = ds.samples[i].base.id;
    std::vector<double> row(env.space(id).size(), 0.0);
    row[env.space(id).index_of(CandidateKind::Correct)] = correct[i];
    p.theta[id] = row;
  }
  p.guidance_weight = g;
  return p;
}

Dataset ten_samples() {
  Dataset ds;
  for (int i = 0; i < 10; ++i) ds.samples.push_back(guided(sample("s" + std::to_string(i), "a", "c" + std::to_string(i))));
  return build_random_fewshots(ds, 1, 0);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const Json j = Json::parse(R"({"group_size":4,"eps_high":0.26,"use_kl":false,"rounds":3,
    "strategy":"add","reward_mode":"self_exemplifying","fewshot_mode":"bold","seed":9,
    "dataset_path":"d.jsonl","workers":2})");
  const TrainConfig c = train_config_from_json(j, "/base");
  CHECK(c.grpo.group_size == 4);
  CHECK(c.grpo.eps_high == 0.26);
  CHECK_FALSE(c.grpo.use_kl);
  CHECK(c.rounds == 3);
  CHECK(c.strategy == Strategy::Add);
  CHECK(c.reward_mode.variant == RewardVariant::SelfExemplifying);
  CHECK(c.fewshot_mode == FewshotMode::Bold);
  CHECK(c.seed == 9);
  CHECK(c.dataset_path == std::filesystem::path("/base/d.jsonl"));
  CHECK(c.batch_size == 1024);
  CHECK(c.hard_rollouts == 10);

  auto code = [](const char* text) {
    try {
      train_config_from_json(Json::parse(text));
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  CHECK(code(R"({"bogus":1})") == 1);
  CHECK(code(R"({"rounds":0})") == 1);
  CHECK(code(R"({"rounds":"many"})") == 1);
  CHECK(code(R"({"strategy":"mix"})") == 1);
  CHECK(code(R"({"hard_rollouts":0})") == 1);
  CHECK(code(R"({"batch_size":0})") == 1);
  CHECK(code(R"([1,2])") == 1);
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  CHECK(train_config_to_json(back) == train_config_to_json(c));
}

TEST_CASE("classify_hard on success probabilities 0, 0.5 and 1") {
  Dataset ds;
  ds.samples = {guided(sample("p0")), guided(sample("p50", "get_weather", "Rome")),
                guided(sample("p100", "get_weather", "Oslo"))};
  const Environment env(ds, RewardMode{}, 0);
  // Temperature 1 and five zero logits: logit ln 5 gives p = 0.5.
  const PolicyParams p = rows(ds, env, {-1e4, std::log(5.0), 1e4}, 0.0);
  CHECK(probs(p, env.space("p50"), false, 1.0)[0] == doctest::Approx(0.5).epsilon(1e-12));
  const auto hard = classify_hard(ds, env, p, {10, 1.0, 123, 0, 1, false});
  CHECK(hard == std::set<std::string>{"p0"});
  CHECK(classify_hard(ds, env, p, {1, 1.0, 123, 0, 1, false}).count("p0") == 1);
}

TEST_CASE("hard needs every rollout below one") {
  Dataset ds;
  ds.samples = {guided(sample("x"))};
  const Environment env(ds, RewardMode{}, 0);
  // Find a seed where exactly one of ten rollouts is correct.
  const PolicyParams p = rows(ds, env, {0.0}, 0.0);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 500 && !found; ++seed) {
    Rng rng = make_stream(seed, 0, "x", StreamPurpose::Classify);
    const RolloutGroup g = sample_rollouts(p, env.space("x"), false, 10, 0.7, rng);
    int correct = 0;
    for (std::size_t k : g.chosen) correct += env.rewards("x")[k] >= 1.0 ? 1 : 0;
    if (correct == 1) {
      found = true;
      CHECK(classify_hard(ds, env, p, {10, 0.7, seed, 0, 1, false}).empty());
    }
  }
  CHECK(found);
}

TEST_CASE("more rollouts never add hard samples") {
  const ToyBundle b = make_toy_bundle();
  const Environment env(b.dataset, RewardMode{}, b.config.seed);
  const auto m10 = classify_hard(b.dataset, env, b.init.params, {10, 0.7, 3, 0, 1, false});
  const auto m32 = classify_hard(b.dataset, env, b.init.params, {32, 0.7, 3, 0, 1, false});
  for (const auto& id : m32) CHECK(m10.count(id) == 1);
}

TEST_CASE("apply_strategy counts") {
  const Dataset ds = ten_samples();
  CHECK(apply_strategy(ds, {}, Strategy::Replace).size() == 10);
  CHECK(apply_strategy(ds, {}, Strategy::Add).size() == 10);
  CHECK(apply_strategy(ds, {}, Strategy::DropHard).size() == 10);
  CHECK(apply_strategy(ds, {}, Strategy::GrpoBaseline).size() == 10);

  const std::set<std::string> hard{"s1", "s4", "s7"};
  const auto replace = apply_strategy(ds, hard, Strategy::Replace);
  CHECK(replace.size() == 10);
  CHECK(std::count_if(replace.begin(), replace.end(), [](const TrainingEntry& e) { return e.guided; }) == 3);
  CHECK(apply_strategy(ds, hard, Strategy::Add).size() == 13);
  CHECK(apply_strategy(ds, hard, Strategy::DropHard).size() == 7);
  const auto base = apply_strategy(ds, hard, Strategy::GrpoBaseline);
  CHECK(base.size() == 10);
  CHECK(std::none_of(base.begin(), base.end(), [](const TrainingEntry& e) { return e.guided; }));

  Dataset detached = ds;
  detached.samples[1] = detach_fewshot(detached.samples[1]);
  const auto r2 = apply_strategy(detached, hard, Strategy::Replace);
  CHECK_FALSE(r2[1].guided);
  CHECK(r2[4].guided);
  CHECK(apply_strategy(detached, hard, Strategy::Add).size() == 12);
}

namespace {

struct RoundFixture {
  TrainConfig cfg;
  TrainingSetup setup;
};

// Ten samples that never succeed raw; guidance lifts them to about 0.5.
RoundFixture all_hard(Strategy strategy) {
  RoundFixture f;
  f.cfg.strategy = strategy;
  f.cfg.grpo.lr0 = 1.0;
  f.cfg.seed = 5;
  const Dataset ds = ten_samples();
  const Environment env(ds, RewardMode{}, f.cfg.seed);
  PolicyParams p = rows(ds, env, std::vector<double>(10, -30.0), 30.0 + std::log(5.0));
  f.setup = prepare_training(f.cfg, ds, p);
  return f;
}

}  // namespace

TEST_CASE("baseline on an all-hard dataset leaves parameters unchanged") {
  RoundFixture f = all_hard(Strategy::GrpoBaseline);
  const RoundResult r = run_round(f.setup.state, f.cfg, f.setup.env);
  CHECK(r.gradient.is_zero());
  CHECK(r.state.params == f.setup.state.params);
  CHECK(r.report.hard_count == 10);
  const RoundResult r2 = run_round(r.state, f.cfg, f.setup.env);
  CHECK(r2.report.hard_count == 10);
  CHECK(r2.report.lr == doctest::Approx(0.8));
}

TEST_CASE("replace on an all-hard dataset revives the gradient and detaches") {
  RoundFixture f = all_hard(Strategy::Replace);
  const RoundResult r = run_round(f.setup.state, f.cfg, f.setup.env);
  CHECK(r.report.hard_count == 10);
  CHECK(r.report.guided_active == 10);
  CHECK(r.gradient.norm() > 0.0);
  bool some_row = false;
  for (const auto& [id, row] : r.gradient.theta) {
    for (double v : row) some_row = some_row || v != 0.0;
  }
  CHECK(some_row);
  CHECK(r.report.detached_total > 0);
  CHECK(r.report.mean_reward_guided > 0.0);
  // Detached samples train raw in the next round.
  const RoundResult r2 = run_round(r.state, f.cfg, f.setup.env);
  const auto entries = apply_strategy(r.state.dataset, r2.hard_ids, Strategy::Replace);
  for (const auto& e : entries) {
    if (r.state.dataset.samples[e.sample].detached) CHECK_FALSE(e.guided);
  }
  CHECK(r2.report.detached_total >= r.report.detached_total);
  for (std::size_t i = 0; i < r.state.dataset.samples.size(); ++i) {
    if (r.state.dataset.samples[i].detached) CHECK(r2.state.dataset.samples[i].detached);
  }
}

TEST_CASE("add keeps raw and guided copies") {
  RoundFixture f = all_hard(Strategy::Add);
  const RoundResult r = run_round(f.setup.state, f.cfg, f.setup.env);
  CHECK(r.report.guided_active == 10);
  CHECK(r.report.mean_reward == 0.0);
}

TEST_CASE("rounds=1 equals a single run_round") {
  RoundFixture f = all_hard(Strategy::Replace);
  f.cfg.rounds = 1;
  const RoundResult r = run_round(f.setup.state, f.cfg, f.setup.env);
  const TrainingSummary s = run_training(f.cfg, f.setup);
  REQUIRE(s.reports.size() == 1);
  CHECK(s.final_state.params == r.state.params);
  CHECK(s.reports[0].hard_count == r.report.hard_count);
  CHECK(s.reports[0].detached_total == r.report.detached_total);
}

TEST_CASE("metrics are invariant to the worker count") {
  ToyBundle b = make_toy_bundle();
  TrainConfig cfg = b.config;
  cfg.rounds = 3;
  cfg.batch_size = 64;
  cfg.fewshot_mode = FewshotMode::Cautious;
  std::string first;
  for (int w : {1, 3, 8}) {
    cfg.workers = w;
    const TrainingSummary s = run_training(cfg, prepare_training(cfg, b.dataset, b.init.params));
    std::ostringstream out;
    write_metrics_csv(out, s.reports, false);
    if (first.empty()) first = out.str();
    CHECK(out.str() == first);
  }
}

TEST_CASE("metrics CSV layout") {
  RoundReport r;
  r.round = 2;
  r.lr = 0.64;
  r.hard_count = 3;
  r.wall_ms = 17;
  std::ostringstream with, without;
  write_metrics_csv(with, {r}, true);
  write_metrics_csv(without, {r}, false);
  CHECK(with.str() ==
        "round,lr,hard_count,guided_active,detached_total,mean_reward,mean_reward_guided,clipped_fraction,wall_ms\n"
        "2,0.64,3,0,0,0,0,0,17\n");
  CHECK(without.str().substr(without.str().rfind(',')) == ",0\n");
}

TEST_CASE("learning rates decay per round") {
  RoundFixture f = all_hard(Strategy::GrpoBaseline);
  f.cfg.rounds = 5;
  const TrainingSummary s = run_training(f.cfg, f.setup);
  for (std::size_t r = 1; r < s.reports.size(); ++r) {
    CHECK(s.reports[r].lr < s.reports[r - 1].lr);
    CHECK(s.reports[r].lr / s.reports[r - 1].lr == doctest::Approx(0.8).epsilon(1e-15));
  }
}

TEST_CASE("training writes metrics, checkpoint and trajectory") {
  const auto dir = std::filesystem::temp_directory_path() / "tx_trainer_artifacts";
  std::filesystem::remove_all(dir);
  RoundFixture f = all_hard(Strategy::Replace);
  f.cfg.rounds = 2;
  f.cfg.output_dir = dir;
  const TrainingSummary s = run_training(f.cfg, f.setup);
  const Checkpoint c = load_checkpoint(dir / "checkpoint.json");
  CHECK(c.round == 2);
  CHECK(c.params == s.final_state.params);
  CHECK(c.global_seed == f.cfg.seed);
  const Json traj = Json::parse(slurp(dir / "hard_trajectory.json"));
  CHECK(traj["rounds"].size() == 2);
  CHECK(slurp(dir / "metrics.csv").rfind("round,lr,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint rows must cover the dataset") {
  TrainConfig cfg;
  const Dataset ds = ten_samples();
  PolicyParams p;
  p.theta["s0"] = std::vector<double>(6, 0.0);
  CHECK_THROWS_AS(prepare_training(cfg, ds, p), Error);
}

TEST_CASE("bundled toy data matches the generator") {
  const auto dir = std::filesystem::temp_directory_path() / "tx_toy_bundle";
  std::filesystem::remove_all(dir);
  write_toy_bundle(dir);
  const std::filesystem::path data = std::filesystem::path(TX_SOURCE_DIR) / "data";
  for (const char* name : {"toy_dataset.jsonl", "toy_init_checkpoint.json", "toy_config.json"}) {
    CHECK_MESSAGE(slurp(dir / name) == slurp(data / name), name);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("toy bundle shape") {
  const ToyBundle b = make_toy_bundle();
  CHECK(b.dataset.samples.size() == 200);
  std::map<ToyStratum, int> n;
  for (const auto& [id, s] : b.strata) ++n[s];
  CHECK(n[ToyStratum::Recoverable] == 70);
  CHECK(n[ToyStratum::NoDonor] == 15);
  CHECK(n[ToyStratum::Blocked] == 15);
  CHECK(n[ToyStratum::Low] == 50);
  CHECK(n[ToyStratum::High] == 50);
  const Dataset fs = build_random_fewshots(b.dataset, 1, b.config.seed);
  for (const auto& gs : fs.samples) {
    if (b.strata.at(gs.base.id) == ToyStratum::NoDonor) CHECK(gs.exemplars.empty());
    if (b.strata.at(gs.base.id) == ToyStratum::Recoverable) CHECK_FALSE(gs.exemplars.empty());
  }
}

TEST_CASE("rollouts-vs-fewshots control reproduces the base hard set") {
  const ToyBundle b = make_toy_bundle();
  const TrainingSetup setup = prepare_training(b.config, b.dataset, b.init.params);
  const auto r = experiment_rollouts_vs_fewshots(setup.state.dataset, setup.env, setup.state.params,
                                                 {10, 32, 0.7, b.config.seed, 1});
  CHECK(r.control_identical());
  for (const auto& id : r.hard_scaled) CHECK(r.hard_base.count(id) == 1);
  // Blocked samples stay hard whatever the rollout count.
  for (const auto& [id, s] : b.strata) {
    if (s == ToyStratum::Blocked) CHECK(r.hard_scaled.count(id) == 1);
  }
}
