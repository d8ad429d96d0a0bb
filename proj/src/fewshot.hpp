#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "policy.hpp"
#include "toolcall.hpp"

namespace toolexpander {

enum class FewshotMode { Random, Cautious, Bold };

std::string_view to_string(FewshotMode m);
FewshotMode fewshot_mode_from_string(std::string_view s);

inline constexpr int kDefaultExemplarsPerTool = 1;
inline constexpr int kVettingRetries = 8;

/// Samples grouped by the tools their ground truth calls.
class DonorIndex {
 public:
  explicit DonorIndex(const Dataset& dataset);

  /// Up to `k` exemplars per distinct ground-truth tool of `target`, drawn
  /// uniformly without replacement from other samples calling that tool.
  /// A donor whose (question, answers) equals the target's own pair is never
  /// eligible. Results are deduplicated by canonical pair key.
  std::vector<FewShotExample> draw(const Sample& target, int k, Rng& rng) const;

  bool has_donors(const Sample& target) const;

 private:
  const Dataset* dataset_;
  std::map<std::string, std::vector<std::size_t>> by_tool_;
};

/// Errors if the target is detached; guidance never returns once removed.
void attach_exemplars(GuidedSample& sample, std::vector<FewShotExample> exemplars,
                      Provenance provenance);

/// Clears exemplars and marks the sample detached. Idempotent.
GuidedSample detach_fewshot(GuidedSample sample);

/// Detached samples are passed through untouched.
Dataset build_random_fewshots(const Dataset& dataset, int k, std::uint64_t rng_seed);

struct VettingOptions {
  int rollouts = 10;
  double temperature = 0.7;
  int k = kDefaultExemplarsPerTool;
  int retries = kVettingRetries;
};

/// True iff at least one of `rollouts` guided draws scores reward >= 1.
bool verify_guidance(const GuidedSample& candidate, const Environment& env,
                     const PolicyParams& policy, int rollouts, double temperature, Rng& rng);

/// Vetting for a single sample: cautious keeps the first exemplar set that
/// passes verify_guidance within 1 + retries draws, else provenance none;
/// bold keeps the first draw. Streams derive from (rng_seed, round, id).
GuidedSample vet_sample(const GuidedSample& sample, const DonorIndex& donors,
                        const Environment& env, const PolicyParams& policy, FewshotMode mode,
                        const VettingOptions& opts, std::uint64_t rng_seed,
                        std::uint64_t round = 0);

Dataset build_vetted_fewshots(const Dataset& dataset, const Environment& env,
                              const PolicyParams& policy, FewshotMode mode,
                              const VettingOptions& opts, std::uint64_t rng_seed);

}  // namespace toolexpander
