#include "toy_dataset.hpp"

#include <cstdio>
#include <fstream>

#include "dataset.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace toolexpander {

std::string_view to_string(ToyStratum s) {
  switch (s) {
    case ToyStratum::Recoverable: return "recoverable";
    case ToyStratum::NoDonor: return "no_donor";
    case ToyStratum::Blocked: return "blocked";
    case ToyStratum::Low: return "low";
    case ToyStratum::High: return "high";
  }
  return "recoverable";
}

// Picked for p(correct) at temperature 0.7 against five zero logits:
// about 0.003, 0, 0.12 and 0.6.
double toy_correct_logit(ToyStratum s) {
  switch (s) {
    case ToyStratum::Recoverable:
    case ToyStratum::NoDonor: return -2.94;
    case ToyStratum::Blocked: return -20.0;
    case ToyStratum::Low: return -0.268;
    case ToyStratum::High: return 1.41;
  }
  return 0.0;
}

namespace {

ToolParam param(std::string name, ParamType type, bool required = true) {
  return {std::move(name), type, required};
}

std::vector<ToolSpec> shared_tools() {
  using P = ParamType;
  return {
      {"get_weather", "Current weather for a city", {param("city", P::String), param("units", P::String, false)}},
      {"search_flights", "Flights between two airports", {param("origin", P::String), param("destination", P::String), param("passengers", P::Int)}},
      {"convert_currency", "Convert an amount", {param("amount", P::Float), param("from", P::String), param("to", P::String)}},
      {"book_table", "Reserve a restaurant table", {param("restaurant", P::String), param("guests", P::Int), param("outdoor", P::Bool, false)}},
      {"send_email", "Send an email", {param("to", P::String), param("subject", P::String)}},
      {"get_stock_price", "Latest price for a ticker", {param("ticker", P::String)}},
      {"translate_text", "Translate text", {param("text", P::String), param("target", P::String)}},
      {"set_reminder", "Create a reminder", {param("message", P::String), param("minutes", P::Int)}},
      {"find_recipe", "Recipes by ingredients", {param("ingredients", P::List), param("max_minutes", P::Int, false)}},
      {"track_package", "Shipping status", {param("tracking_id", P::String), param("carrier", P::Object, false)}},
  };
}

Json argument_value(const ToolParam& p, int n) {
  switch (p.type) {
    case ParamType::String: return p.name + "_" + std::to_string(n);
    case ParamType::Int: return n % 9 + 1;
    case ParamType::Float: return 10.0 + n * 0.25;
    case ParamType::Bool: return n % 2 == 0;
    case ParamType::List: return Json::array({"item_" + std::to_string(n), "item_" + std::to_string(n + 1)});
    case ParamType::Object: return Json{{"code", n}};
  }
  return nullptr;
}

ToolCall make_call(const ToolSpec& t, int n) {
  ToolCall c{t.name, Json::object()};
  for (const auto& p : t.params) {
    if (p.required) c.arguments[p.name] = argument_value(p, n);
  }
  return c;
}

std::string render_args(const Json& args) {
  std::string out;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (!out.empty()) out += ", ";
    out += it.key() + "=" + it.value().dump();
  }
  return out;
}

}  // namespace

ToyBundle make_toy_bundle() {
  constexpr int kRecoverable = 70, kNoDonor = 15, kBlocked = 15, kLow = 50, kHigh = 50;
  std::vector<ToyStratum> plan;
  plan.insert(plan.end(), kRecoverable, ToyStratum::Recoverable);
  plan.insert(plan.end(), kNoDonor, ToyStratum::NoDonor);
  plan.insert(plan.end(), kBlocked, ToyStratum::Blocked);
  plan.insert(plan.end(), kLow, ToyStratum::Low);
  plan.insert(plan.end(), kHigh, ToyStratum::High);
  Rng rng(stream_seed(kToySeed, 0, "toy-order", StreamPurpose::Fixture));
  for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[uniform_index(rng, i)]);

  const std::vector<ToolSpec> pool = shared_tools();
  ToyBundle b;
  b.init.params.guidance_weight = kToyGuidanceWeight;
  b.init.params.exemplify_weight = 0.0;
  b.init.global_seed = kToySeed;

  int unique_tools = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const int n = static_cast<int>(i);
    char id[16];
    std::snprintf(id, sizeof id, "toy-%03d", n);
    GuidedSample gs;
    gs.base.id = id;

    ToolSpec truth_tool;
    if (plan[i] == ToyStratum::NoDonor) {
      truth_tool = {"lookup_record_" + std::to_string(unique_tools++), "Fetch one archived record",
                    {param("record", ParamType::String)}};
    } else {
      truth_tool = pool[i % pool.size()];
    }
    const ToolSpec& d1 = pool[(i + 3) % pool.size()];
    const ToolSpec& d2 = pool[(i + 7) % pool.size()];
    gs.base.tools = {truth_tool, d1, d2};
    gs.base.ground_truth = {make_call(truth_tool, n)};
    // A few two-call requests; the first call decides the correct tool.
    if ((plan[i] == ToyStratum::Low || plan[i] == ToyStratum::High) && n % 5 == 0) {
      gs.base.ground_truth.push_back(make_call(d1, n));
    }
    gs.base.query = "Request " + std::to_string(n) + ": ";
    for (std::size_t c = 0; c < gs.base.ground_truth.size(); ++c) {
      const ToolCall& call = gs.base.ground_truth[c];
      gs.base.query += (c ? " then " : "") + std::string("use ") + call.tool_name + " with " +
                       render_args(call.arguments);
    }
    gs.base.query += ".";
    validate_guided(gs);

    std::vector<double> row(6, 0.0);
    row[0] = toy_correct_logit(plan[i]);
    b.init.params.theta[gs.base.id] = row;
    b.strata[gs.base.id] = plan[i];
    b.dataset.samples.push_back(std::move(gs));
  }

  TrainConfig& c = b.config;
  c.grpo.lr0 = 1000.0;
  c.grpo.decay_gamma = 0.8;
  c.rounds = 6;
  c.seed = kToySeed;
  c.strategy = Strategy::Replace;
  c.dataset_path = "toy_dataset.jsonl";
  c.init_checkpoint = "toy_init_checkpoint.json";
  return b;
}

void write_toy_bundle(const std::filesystem::path& dir) {
  const ToyBundle b = make_toy_bundle();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  save_dataset(dir / "toy_dataset.jsonl", b.dataset);
  save_checkpoint(dir / "toy_init_checkpoint.json", b.init);
  Json cfg = train_config_to_json(b.config);
  cfg.erase("output_dir");
  std::ofstream out(dir / "toy_config.json");
  if (!out) throw runtime_error("cannot write toy_config.json");
  out << cfg.dump(2) << '\n';
}

}  // namespace toolexpander
