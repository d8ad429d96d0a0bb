#pragma once

#include <cstdint>
#include <filesystem>

#include "policy.hpp"

namespace toolexpander {

struct Checkpoint {
  int round = 0;
  PolicyParams params;
  std::uint64_t global_seed = 0;
};

Json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const Json& j);
Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

}  // namespace toolexpander
