#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "policy.hpp"
#include "toolcall.hpp"

namespace txtest {

using namespace toolexpander;

inline ToolSpec tool(const std::string& name, std::vector<std::string> required = {"city"}) {
  ToolSpec t{name, name + " tool", {}};
  for (auto& p : required) t.params.push_back({p, ParamType::String, true});
  return t;
}

/// Sample calling `tool_name` with {city: value}; a second tool "other" is
/// always declared so wrong-tool candidates exist.
inline Sample sample(const std::string& id, const std::string& tool_name = "get_weather",
                     const std::string& city = "Paris") {
  Sample s;
  s.id = id;
  s.query = "What is the weather in " + city + "? (" + id + ")";
  s.tools = {tool(tool_name), tool("other_" + tool_name)};
  s.ground_truth = {ToolCall{tool_name, Json{{"city", city}}}};
  return s;
}

inline GuidedSample guided(const Sample& s) { return GuidedSample{s, {}, Provenance::None, false}; }

inline FewShotExample example(const std::string& tool_name, const std::string& question,
                              const std::string& city) {
  return FewShotExample{{tool(tool_name)}, question, {ToolCall{tool_name, Json{{"city", city}}}}};
}

inline Json examples_json(const std::vector<FewShotExample>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(example_to_json(x));
  return a;
}

/// Relative error with both-tiny treated as exact agreement.
inline double rel_err(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale <= 1e-9) return 0.0;
  return std::fabs(a - b) / scale;
}

/// Flat view over every coordinate of a PolicyParams for finite differences.
struct Coord {
  std::string label;
  std::function<double&(PolicyParams&)> ref;
  std::function<double(const PolicyGradient&)> grad;
};

inline std::vector<Coord> coords(const PolicyParams& p, const std::string& id) {
  std::vector<Coord> out;
  for (std::size_t j = 0; j < p.theta.at(id).size(); ++j) {
    out.push_back({"theta[" + std::to_string(j) + "]",
                   [id, j](PolicyParams& q) -> double& { return q.theta.find(id)->second[j]; },
                   [id, j](const PolicyGradient& g) {
                     auto it = g.theta.find(id);
                     return it == g.theta.end() ? 0.0 : it->second[j];
                   }});
  }
  out.push_back({"g", [](PolicyParams& q) -> double& { return q.guidance_weight; },
                 [](const PolicyGradient& g) { return g.guidance; }});
  out.push_back({"e", [](PolicyParams& q) -> double& { return q.exemplify_weight; },
                 [](const PolicyGradient& g) { return g.exemplify; }});
  return out;
}

inline double central_difference(const std::function<double(const PolicyParams&)>& f,
                                 const PolicyParams& p, const Coord& c, double h = 1e-6) {
  PolicyParams plus = p, minus = p;
  c.ref(plus) += h;
  c.ref(minus) -= h;
  return (f(plus) - f(minus)) / (2 * h);
}

}  // namespace txtest
