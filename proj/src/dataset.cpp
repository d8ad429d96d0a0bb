#include "dataset.hpp"

#include <fstream>
#include <istream>
#include <set>

#include "error.hpp"

namespace toolexpander {

GuidedSample guided_sample_from_json(const Json& j) {
  if (!j.is_object()) throw data_error("sample must be a JSON object");
  auto string_field = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw data_error(std::string("missing or non-string field '") + key + "'");
    }
    return j[key].get<std::string>();
  };
  auto array_field = [&](const char* key) -> const Json& {
    if (!j.contains(key) || !j[key].is_array()) {
      throw data_error(std::string("missing or non-array field '") + key + "'");
    }
    return j[key];
  };

  GuidedSample gs;
  gs.base.id = string_field("id");
  gs.base.query = string_field("query");
  for (const auto& t : array_field("tools")) gs.base.tools.push_back(tool_spec_from_json(t));
  for (const auto& c : array_field("ground_truth")) {
    gs.base.ground_truth.push_back(tool_call_from_json(c));
  }
  if (j.contains("exemplars")) {
    for (const auto& e : array_field("exemplars")) gs.exemplars.push_back(example_from_json(e));
  }
  if (j.contains("provenance")) {
    gs.provenance = provenance_from_string(string_field("provenance"));
  } else if (!gs.exemplars.empty()) {
    gs.provenance = Provenance::Random;
  }
  if (j.contains("detached")) {
    if (!j["detached"].is_boolean()) throw data_error("field 'detached' must be a boolean");
    gs.detached = j["detached"].get<bool>();
  }
  validate_guided(gs);
  return gs;
}

Json guided_sample_to_json(const GuidedSample& gs) {
  Json j = {{"id", gs.base.id},
            {"query", gs.base.query},
            {"tools", tools_to_json(gs.base.tools)},
            {"ground_truth", calls_to_json(gs.base.ground_truth)}};
  if (!gs.exemplars.empty()) {
    Json ex = Json::array();
    for (const auto& e : gs.exemplars) ex.push_back(example_to_json(e));
    j["exemplars"] = ex;
  }
  j["provenance"] = to_string(gs.provenance);
  if (gs.detached) j["detached"] = true;
  return j;
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      GuidedSample gs = guided_sample_from_json(j);
      if (!ids.insert(gs.base.id).second) throw data_error("duplicate id '" + gs.base.id + "'");
      ds.samples.push_back(std::move(gs));
    } catch (const Json::exception& e) {
      throw data_error("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    } catch (const Error& e) {
      throw data_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  for (const auto& s : ds.samples) out << guided_sample_to_json(s).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw runtime_error("cannot write '" + path.string() + "'");
  write_dataset(out, ds);
  if (!out) throw runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace toolexpander
