#include "toolcall.hpp"

#include <set>

#include "error.hpp"

namespace toolexpander {

DatasetCounters Dataset::counters() const {
  DatasetCounters c;
  c.total = samples.size();
  for (const auto& s : samples) {
    if (s.exemplars.empty()) {
      ++c.without_fewshot;
    } else {
      ++c.with_fewshot;
    }
  }
  return c;
}

const GuidedSample* Dataset::find(std::string_view id) const {
  for (const auto& s : samples) {
    if (s.base.id == id) return &s;
  }
  return nullptr;
}

GuidedSample* Dataset::find(std::string_view id) {
  for (auto& s : samples) {
    if (s.base.id == id) return &s;
  }
  return nullptr;
}

std::string_view to_string(ParamType t) {
  switch (t) {
    case ParamType::String: return "string";
    case ParamType::Int: return "int";
    case ParamType::Float: return "float";
    case ParamType::Bool: return "bool";
    case ParamType::List: return "list";
    case ParamType::Object: return "object";
  }
  return "string";
}

ParamType param_type_from_string(std::string_view s) {
  if (s == "string") return ParamType::String;
  if (s == "int") return ParamType::Int;
  if (s == "float") return ParamType::Float;
  if (s == "bool") return ParamType::Bool;
  if (s == "list") return ParamType::List;
  if (s == "object") return ParamType::Object;
  throw data_error("unknown parameter type '" + std::string(s) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::None: return "none";
    case Provenance::Random: return "random";
    case Provenance::Cautious: return "cautious";
    case Provenance::Bold: return "bold";
  }
  return "none";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "none") return Provenance::None;
  if (s == "random") return Provenance::Random;
  if (s == "cautious") return Provenance::Cautious;
  if (s == "bold") return Provenance::Bold;
  throw data_error("unknown provenance '" + std::string(s) + "'");
}

void validate_tools(const std::vector<ToolSpec>& tools) {
  std::set<std::string> names;
  for (const auto& t : tools) {
    if (t.name.empty()) throw data_error("tool with empty name");
    if (!names.insert(t.name).second) throw data_error("duplicate tool '" + t.name + "'");
    std::set<std::string> params;
    for (const auto& p : t.params) {
      if (!params.insert(p.name).second) {
        throw data_error("duplicate parameter '" + p.name + "' in tool '" + t.name + "'");
      }
    }
  }
}

void validate_calls(const std::vector<ToolCall>& calls, const std::vector<ToolSpec>& tools) {
  for (const auto& call : calls) {
    if (call.tool_name.empty()) throw data_error("tool call with empty name");
    const ToolSpec* spec = nullptr;
    for (const auto& t : tools) {
      if (t.name == call.tool_name) spec = &t;
    }
    if (spec == nullptr) {
      throw data_error("ground-truth tool '" + call.tool_name + "' not in tools");
    }
    for (const auto& p : spec->params) {
      if (p.required && !call.arguments.contains(p.name)) {
        throw data_error("call to '" + call.tool_name + "' lacks required argument '" + p.name +
                         "'");
      }
    }
  }
}

void validate_sample(const Sample& s) {
  if (s.id.empty()) throw data_error("sample with empty id");
  validate_tools(s.tools);
  if (s.ground_truth.empty()) throw data_error("sample '" + s.id + "' has no ground truth");
  validate_calls(s.ground_truth, s.tools);
}

void validate_example(const FewShotExample& ex) {
  validate_tools(ex.tools);
  if (ex.answers.empty()) throw data_error("example without answers");
  validate_calls(ex.answers, ex.tools);
}

void validate_guided(const GuidedSample& gs) {
  validate_sample(gs.base);
  if (gs.exemplars.empty() != (gs.provenance == Provenance::None)) {
    throw data_error("sample '" + gs.base.id + "': provenance must be none iff no exemplars");
  }
  const std::string own = pair_key(gs.base.query, gs.base.ground_truth);
  for (const auto& ex : gs.exemplars) {
    validate_example(ex);
    if (pair_key(ex.question, ex.answers) == own) {
      throw data_error("sample '" + gs.base.id + "' lists its own answer as an exemplar");
    }
  }
}

Json tool_spec_to_json(const ToolSpec& t) {
  Json params = Json::array();
  for (const auto& p : t.params) {
    params.push_back({{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required}});
  }
  return {{"name", t.name}, {"description", t.description}, {"params", params}};
}

namespace {

const Json& require(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw data_error(std::string(where) + ": missing field '" + key + "'");
  }
  return j.at(key);
}

std::string require_string(const Json& j, const char* key, const char* where) {
  const Json& v = require(j, key, where);
  if (!v.is_string()) throw data_error(std::string(where) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

const Json& require_array(const Json& j, const char* key, const char* where) {
  const Json& v = require(j, key, where);
  if (!v.is_array()) throw data_error(std::string(where) + ": field '" + key + "' must be an array");
  return v;
}

}  // namespace

ToolSpec tool_spec_from_json(const Json& j) {
  ToolSpec t;
  t.name = require_string(j, "name", "tool");
  t.description = j.contains("description") && j["description"].is_string()
                      ? j["description"].get<std::string>()
                      : std::string{};
  if (j.contains("params")) {
    const Json& params = require_array(j, "params", "tool");
    for (const auto& p : params) {
      ToolParam tp;
      tp.name = require_string(p, "name", "param");
      tp.type = param_type_from_string(require_string(p, "type", "param"));
      const Json& req = require(p, "required", "param");
      if (!req.is_boolean()) throw data_error("param: field 'required' must be a boolean");
      tp.required = req.get<bool>();
      t.params.push_back(std::move(tp));
    }
  }
  return t;
}

Json tool_call_to_json(const ToolCall& c) { return {{"name", c.tool_name}, {"arguments", c.arguments}}; }

ToolCall tool_call_from_json(const Json& j) {
  if (!j.is_object()) {
    throw ParseError(ParseErrorKind::JsonInvalid, "tool call must be a JSON object");
  }
  if (!j.contains("name") || !j["name"].is_string()) {
    throw ParseError(ParseErrorKind::MissingField, "tool call missing field 'name'", {}, 0, "name");
  }
  if (!j.contains("arguments")) {
    throw ParseError(ParseErrorKind::MissingField, "tool call missing field 'arguments'", {}, 0,
                     "arguments");
  }
  if (!j["arguments"].is_object()) {
    throw ParseError(ParseErrorKind::ArgumentsNotObject, "tool call 'arguments' is not an object");
  }
  ToolCall c;
  c.tool_name = j["name"].get<std::string>();
  c.arguments = j["arguments"];
  return c;
}

Json calls_to_json(const std::vector<ToolCall>& calls) {
  Json arr = Json::array();
  for (const auto& c : calls) arr.push_back(tool_call_to_json(c));
  return arr;
}

Json tools_to_json(const std::vector<ToolSpec>& tools) {
  Json arr = Json::array();
  for (const auto& t : tools) arr.push_back(tool_spec_to_json(t));
  return arr;
}

Json example_to_json(const FewShotExample& ex) {
  return {{"tools", tools_to_json(ex.tools)},
          {"question", ex.question},
          {"answers", calls_to_json(ex.answers)}};
}

FewShotExample example_from_json(const Json& j) {
  FewShotExample ex;
  for (const auto& t : require_array(j, "tools", "example")) ex.tools.push_back(tool_spec_from_json(t));
  ex.question = require_string(j, "question", "example");
  for (const auto& a : require_array(j, "answers", "example")) {
    ex.answers.push_back(tool_call_from_json(a));
  }
  return ex;
}

std::string canonical(const ToolCall& c) { return tool_call_to_json(c).dump(); }

std::string canonical(const std::vector<ToolCall>& calls) { return calls_to_json(calls).dump(); }

std::string canonical(const FewShotExample& ex) { return example_to_json(ex).dump(); }

std::string pair_key(std::string_view question, const std::vector<ToolCall>& answers) {
  return Json{{"question", question}, {"answers", calls_to_json(answers)}}.dump();
}

}  // namespace toolexpander
