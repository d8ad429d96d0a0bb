#include <string>
#include <vector>

#include "error.hpp"
#include "policy.hpp"

namespace toolexpander {

namespace {

Json placeholder_value(ParamType type, int variant) {
  switch (type) {
    case ParamType::String: return "value_" + std::to_string(variant);
    case ParamType::Int: return variant + 1;
    case ParamType::Float: return variant + 0.5;
    case ParamType::Bool: return variant % 2 == 0;
    case ParamType::List: return Json::array({variant});
    case ParamType::Object: return Json{{"k", variant}};
  }
  return nullptr;
}

Json placeholder_arguments(const ToolSpec& tool, int variant) {
  Json args = Json::object();
  for (const auto& p : tool.params) {
    if (p.required) args[p.name] = placeholder_value(p.type, variant);
  }
  return args;
}

Json perturb(const Json& v, int variant) {
  if (v.is_string()) return v.get<std::string>() + (variant == 0 ? "_alt" : "_other");
  if (v.is_boolean()) return !v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>() + 1 + variant;
  if (v.is_number()) return v.get<double>() + 0.5 + variant;
  if (v.is_array()) {
    Json a = v;
    a.push_back(variant);
    return a;
  }
  if (v.is_object()) {
    Json o = v;
    o["extra_" + std::to_string(variant)] = variant;
    return o;
  }
  return "value_" + std::to_string(variant);
}

std::string call_payload(const std::vector<ToolCall>& calls) {
  return calls.size() == 1 ? tool_call_to_json(calls.front()).dump() : calls_to_json(calls).dump();
}

std::string tool_call_block(const std::vector<ToolCall>& calls) {
  return "<tool_call>" + call_payload(calls) + "</tool_call>";
}

const ToolSpec& tool_spec(const Sample& s, const std::string& name) {
  for (const auto& t : s.tools) {
    if (t.name == name) return t;
  }
  throw data_error("sample '" + s.id + "' does not declare tool '" + name + "'");
}

std::vector<ToolCall> wrong_argument(const std::vector<ToolCall>& truth, int variant, Rng& rng) {
  std::vector<ToolCall> calls = truth;
  Json& args = calls.front().arguments;
  if (args.empty()) {
    args["unexpected"] = variant;
    return calls;
  }
  std::vector<std::string> keys;
  for (auto it = args.begin(); it != args.end(); ++it) keys.push_back(it.key());
  const std::string& key = keys[uniform_index(rng, keys.size())];
  args[key] = perturb(args[key], variant);
  return calls;
}

std::vector<ToolCall> wrong_tool(const Sample& s, Rng& rng) {
  const std::string& truth_tool = s.ground_truth.front().tool_name;
  std::vector<const ToolSpec*> others;
  for (const auto& t : s.tools) {
    if (t.name != truth_tool) others.push_back(&t);
  }
  ToolCall call;
  if (others.empty()) {
    call.tool_name = truth_tool + "_v2";
    call.arguments = s.ground_truth.front().arguments;
  } else {
    const ToolSpec& t = *others[uniform_index(rng, others.size())];
    call.tool_name = t.name;
    call.arguments = placeholder_arguments(t, 0);
  }
  return {call};
}

Json example_array(const Sample& s, const std::vector<int>& variants) {
  const ToolSpec& tool = tool_spec(s, s.ground_truth.front().tool_name);
  Json arr = Json::array();
  for (int v : variants) {
    FewShotExample ex;
    ex.tools = {tool};
    ex.question = "Example request " + std::to_string(v) + " for " + tool.name;
    ex.answers = {ToolCall{tool.name, placeholder_arguments(tool, v)}};
    arr.push_back(example_to_json(ex));
  }
  return arr;
}

std::string self_exemplifying_text(const Json& examples, const std::string& think,
                                   const std::vector<ToolCall>& calls) {
  return "<examples>" + examples.dump() + "</examples>\n<think>" + think + "</think>\n" +
         tool_call_block(calls);
}

void verify_contract(const CandidateResponse& c, const Sample& s, const RewardMode& mode) {
  const RewardBreakdown r = reward(c.text, s, mode);
  bool ok = true;
  switch (c.kind) {
    case CandidateKind::Correct:
      ok = r.result_ok && r.value == 1.0;
      break;
    case CandidateKind::CorrectWithValidExamples:
      ok = r.result_ok && r.fewshot_ok && r.value == 1.0 + mode.bonus;
      break;
    case CandidateKind::CorrectWithDegenerateExamples:
      ok = r.result_ok && !r.fewshot_ok && r.value == 1.0;
      break;
    case CandidateKind::WrongArg:
    case CandidateKind::WrongTool:
      ok = !r.result_ok && r.value == 0.0;
      break;
    case CandidateKind::Malformed:
      ok = !r.format_ok && r.value == 0.0;
      break;
  }
  if (!ok) {
    throw runtime_error("toy space self-check failed for sample '" + s.id + "', candidate " +
                        std::to_string(c.index) + " (" + std::string(to_string(c.kind)) + ")");
  }
}

}  // namespace

CandidateSpace make_toy_space(const Sample& sample, const RewardMode& mode, std::uint64_t rng_seed) {
  validate_sample(sample);
  Rng rng(rng_seed);
  const std::vector<ToolCall>& truth = sample.ground_truth;
  const std::string truth_tool = truth.front().tool_name;

  CandidateSpace space;
  space.sample_id = sample.id;
  auto add = [&](CandidateKind kind, std::string text, std::optional<std::string> tool) {
    space.candidates.push_back({space.candidates.size(), std::move(text), std::move(tool), kind});
  };

  const auto bad_arg = wrong_argument(truth, 0, rng);
  const auto bad_tool = wrong_tool(sample, rng);
  const std::string truncated =
      "<tool_call>" + call_payload(truth).substr(0, call_payload(truth).size() / 2) + "</tool_call>";

  if (mode.variant == RewardVariant::Plain) {
    add(CandidateKind::Correct, tool_call_block(truth), truth_tool);
    add(CandidateKind::WrongArg, tool_call_block(bad_arg), truth_tool);
    add(CandidateKind::WrongArg, tool_call_block(wrong_argument(truth, 1, rng)), truth_tool);
    add(CandidateKind::WrongTool, tool_call_block(bad_tool), bad_tool.front().tool_name);
    add(CandidateKind::Malformed, truncated, std::nullopt);
    add(CandidateKind::Malformed, "Sure, I will call " + truth_tool + " now. " + tool_call_block(truth),
        truth_tool);
  } else {
    const std::string think = "The request maps onto " + truth_tool + "; fill its arguments.";
    add(CandidateKind::Correct, self_exemplifying_text(Json::array(), think, truth), truth_tool);
    add(CandidateKind::CorrectWithValidExamples,
        self_exemplifying_text(example_array(sample, {1, 2, 3, 4}), think, truth), truth_tool);
    add(CandidateKind::CorrectWithDegenerateExamples,
        self_exemplifying_text(example_array(sample, {1, 1, 1, 2, 3}), think, truth), truth_tool);
    add(CandidateKind::WrongArg, self_exemplifying_text(Json::array(), think, bad_arg), truth_tool);
    add(CandidateKind::WrongTool, self_exemplifying_text(Json::array(), think, bad_tool),
        bad_tool.front().tool_name);
    add(CandidateKind::Malformed, truncated, std::nullopt);
  }

  for (const auto& c : space.candidates) verify_contract(c, sample, mode);
  return space;
}

}  // namespace toolexpander
