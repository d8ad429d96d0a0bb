#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "checkpoint.hpp"
#include "trainer.hpp"

namespace toolexpander {

/// Unguided success bands of the toy samples.
enum class ToyStratum {
  Recoverable,  // almost never correct raw; exemplars from other samples exist
  NoDonor,      // same starting logits, but its tool appears nowhere else
  Blocked,      // correct candidate logit pinned far below the rest
  Low,
  High,
};

std::string_view to_string(ToyStratum s);

inline constexpr std::uint64_t kToySeed = 7;
inline constexpr double kToyGuidanceWeight = 4.0;

struct ToyBundle {
  Dataset dataset;
  Checkpoint init;
  /// Same as data/toy_config.json; paths are relative to the bundle directory.
  TrainConfig config;
  std::map<std::string, ToyStratum> strata;
};

/// Deterministic; no inputs beyond the constants above.
ToyBundle make_toy_bundle();

/// Writes toy_dataset.jsonl, toy_init_checkpoint.json and toy_config.json.
void write_toy_bundle(const std::filesystem::path& dir);

/// Starting correct-candidate logit for a stratum.
double toy_correct_logit(ToyStratum s);

}  // namespace toolexpander
