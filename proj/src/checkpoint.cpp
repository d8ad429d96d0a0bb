#include "checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "error.hpp"

namespace toolexpander {

Json checkpoint_to_json(const Checkpoint& ckpt) {
  Json theta = Json::object();
  for (const auto& [id, row] : ckpt.params.theta) theta[id] = row;
  return {{"round", ckpt.round},
          {"theta", theta},
          {"g", ckpt.params.guidance_weight},
          {"e", ckpt.params.exemplify_weight},
          {"rng", {{"global_seed", ckpt.global_seed}}}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  auto finite = [](const Json& v, const std::string& what) {
    if (!v.is_number()) throw data_error("checkpoint: " + what + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw data_error("checkpoint: " + what + " must be finite");
    return d;
  };
  try {
    Checkpoint c;
    c.round = j.at("round").get<int>();
    for (const auto& [id, row] : j.at("theta").items()) {
      if (!row.is_array()) throw data_error("checkpoint: theta['" + id + "'] must be an array");
      std::vector<double> values;
      for (const auto& v : row) values.push_back(finite(v, "theta['" + id + "']"));
      c.params.theta[id] = std::move(values);
    }
    c.params.guidance_weight = finite(j.at("g"), "g");
    c.params.exemplify_weight = finite(j.at("e"), "e");
    c.global_seed = j.at("rng").at("global_seed").get<std::uint64_t>();
    return c;
  } catch (const Json::exception& e) {
    throw data_error(std::string("checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open checkpoint '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw data_error("checkpoint '" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw runtime_error("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(ckpt).dump(2) << '\n';
}

}  // namespace toolexpander
