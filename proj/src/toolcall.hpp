#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toolexpander {

using Json = nlohmann::json;

enum class ParamType { String, Int, Float, Bool, List, Object };

struct ToolParam {
  std::string name;
  ParamType type = ParamType::String;
  bool required = false;

  bool operator==(const ToolParam&) const = default;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ToolParam> params;

  bool operator==(const ToolSpec&) const = default;
};

/// One tool invocation. `arguments` is always a JSON object; nlohmann keeps
/// object keys sorted, so dumping it is already canonical.
struct ToolCall {
  std::string tool_name;
  Json arguments = Json::object();

  // Numbers compare by value (1 == 1.0), strings case-sensitively.
  bool operator==(const ToolCall& other) const {
    return tool_name == other.tool_name && arguments == other.arguments;
  }
};

struct Sample {
  std::string id;
  std::string query;
  std::vector<ToolSpec> tools;
  std::vector<ToolCall> ground_truth;
};

struct FewShotExample {
  std::vector<ToolSpec> tools;
  std::string question;
  std::vector<ToolCall> answers;

  bool operator==(const FewShotExample&) const = default;
};

enum class Provenance { None, Random, Cautious, Bold };

struct GuidedSample {
  Sample base;
  std::vector<FewShotExample> exemplars;
  Provenance provenance = Provenance::None;
  bool detached = false;
};

struct DatasetCounters {
  std::size_t total = 0;
  std::size_t with_fewshot = 0;
  std::size_t without_fewshot = 0;

  bool operator==(const DatasetCounters&) const = default;
};

struct Dataset {
  std::vector<GuidedSample> samples;

  DatasetCounters counters() const;
  const GuidedSample* find(std::string_view id) const;
  GuidedSample* find(std::string_view id);
};

std::string_view to_string(ParamType t);
ParamType param_type_from_string(std::string_view s);
std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

// Throw Error(Data) on invariant violations.
void validate_tools(const std::vector<ToolSpec>& tools);
void validate_calls(const std::vector<ToolCall>& calls, const std::vector<ToolSpec>& tools);
void validate_sample(const Sample& s);
void validate_example(const FewShotExample& ex);
void validate_guided(const GuidedSample& gs);

// JSON mappings for the dataset schema. from_json validates structure only;
// cross-field invariants are checked by validate_*.
Json tool_spec_to_json(const ToolSpec& t);
ToolSpec tool_spec_from_json(const Json& j);
Json tool_call_to_json(const ToolCall& c);
ToolCall tool_call_from_json(const Json& j);
Json example_to_json(const FewShotExample& ex);
FewShotExample example_from_json(const Json& j);
Json calls_to_json(const std::vector<ToolCall>& calls);
Json tools_to_json(const std::vector<ToolSpec>& tools);

/// Keys sorted, compact; used for every distinctness check.
std::string canonical(const ToolCall& c);
std::string canonical(const std::vector<ToolCall>& calls);
std::string canonical(const FewShotExample& ex);
/// Dedup key of a (question, answers) pair.
std::string pair_key(std::string_view question, const std::vector<ToolCall>& answers);

}  // namespace toolexpander
