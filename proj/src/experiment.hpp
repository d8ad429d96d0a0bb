#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "policy.hpp"

namespace toolexpander {

struct RolloutsVsFewshotsOptions {
  int base_rollouts = 10;
  int scaled_rollouts = 32;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct RolloutsVsFewshotsReport {
  std::set<std::string> hard_base;     // M = base_rollouts, raw
  std::set<std::string> hard_scaled;   // M = scaled_rollouts, raw
  std::set<std::string> hard_fewshot;  // M = base_rollouts, cautious exemplars attached
  std::set<std::string> hard_control;  // rerun of the base configuration

  int reduction_scaled() const;
  int reduction_fewshot() const;
  bool control_identical() const { return hard_base == hard_control; }
  bool fewshot_beats_rollouts() const { return reduction_fewshot() > reduction_scaled(); }
};

/// Hard counts when spending more rollouts versus attaching vetted exemplars.
RolloutsVsFewshotsReport experiment_rollouts_vs_fewshots(const Dataset& dataset,
                                                         const Environment& env,
                                                         const PolicyParams& params,
                                                         const RolloutsVsFewshotsOptions& opts);

Json report_to_json(const RolloutsVsFewshotsReport& r);

}  // namespace toolexpander
