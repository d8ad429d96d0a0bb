#include "fewshot.hpp"

#include <set>

#include "error.hpp"

namespace toolexpander {

std::string_view to_string(FewshotMode m) {
  switch (m) {
    case FewshotMode::Random: return "random";
    case FewshotMode::Cautious: return "cautious";
    case FewshotMode::Bold: return "bold";
  }
  return "random";
}

FewshotMode fewshot_mode_from_string(std::string_view s) {
  if (s == "random") return FewshotMode::Random;
  if (s == "cautious") return FewshotMode::Cautious;
  if (s == "bold") return FewshotMode::Bold;
  throw config_error("unknown few-shot mode '" + std::string(s) + "'");
}

DonorIndex::DonorIndex(const Dataset& dataset) : dataset_(&dataset) {
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    std::set<std::string> tools;
    for (const auto& c : dataset.samples[i].base.ground_truth) tools.insert(c.tool_name);
    for (const auto& t : tools) by_tool_[t].push_back(i);
  }
}

namespace {

std::vector<std::string> distinct_tools(const Sample& s) {
  std::vector<std::string> out;
  for (const auto& c : s.ground_truth) {
    bool seen = false;
    for (const auto& t : out) seen = seen || t == c.tool_name;
    if (!seen) out.push_back(c.tool_name);
  }
  return out;
}

}  // namespace

std::vector<FewShotExample> DonorIndex::draw(const Sample& target, int k, Rng& rng) const {
  if (k < 1) throw invalid_argument("exemplars per tool must be >= 1");
  const std::string own = pair_key(target.query, target.ground_truth);
  std::vector<FewShotExample> out;
  std::set<std::string> keys;
  for (const auto& tool : distinct_tools(target)) {
    auto it = by_tool_.find(tool);
    if (it == by_tool_.end()) continue;
    std::vector<std::size_t> pool;
    for (std::size_t idx : it->second) {
      const Sample& donor = dataset_->samples[idx].base;
      if (donor.id != target.id && pair_key(donor.query, donor.ground_truth) != own) {
        pool.push_back(idx);
      }
    }
    // Partial Fisher-Yates over the eligible donors.
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      const Sample& donor = dataset_->samples[pool[i]].base;
      if (keys.insert(pair_key(donor.query, donor.ground_truth)).second) {
        out.push_back({donor.tools, donor.query, donor.ground_truth});
      }
    }
  }
  return out;
}

bool DonorIndex::has_donors(const Sample& target) const {
  Rng rng(0);
  return !draw(target, 1, rng).empty();
}

void attach_exemplars(GuidedSample& sample, std::vector<FewShotExample> exemplars,
                      Provenance provenance) {
  if (sample.detached) {
    throw invalid_argument("sample '" + sample.base.id + "' is detached; guidance cannot return");
  }
  if (exemplars.empty()) {
    sample.exemplars.clear();
    sample.provenance = Provenance::None;
    return;
  }
  if (provenance == Provenance::None) {
    throw invalid_argument("exemplars attached with provenance none");
  }
  sample.exemplars = std::move(exemplars);
  sample.provenance = provenance;
}

GuidedSample detach_fewshot(GuidedSample sample) {
  sample.exemplars.clear();
  sample.provenance = Provenance::None;
  sample.detached = true;
  return sample;
}

Dataset build_random_fewshots(const Dataset& dataset, int k, std::uint64_t rng_seed) {
  const DonorIndex donors(dataset);
  Dataset out = dataset;
  for (auto& gs : out.samples) {
    if (gs.detached) continue;
    Rng rng = make_stream(rng_seed, 0, gs.base.id, StreamPurpose::Donors);
    attach_exemplars(gs, donors.draw(gs.base, k, rng), Provenance::Random);
  }
  return out;
}

bool verify_guidance(const GuidedSample& candidate, const Environment& env,
                     const PolicyParams& policy, int rollouts, double temperature, Rng& rng) {
  const CandidateSpace& space = env.space(candidate.base.id);
  const std::vector<double>& rewards = env.rewards(candidate.base.id);
  const bool guided = demonstrates_tool(candidate, space);
  const RolloutGroup g = sample_rollouts(policy, space, guided, static_cast<std::size_t>(rollouts),
                                         temperature, rng);
  for (std::size_t k : g.chosen) {
    if (rewards[k] >= 1.0) return true;
  }
  return false;
}

GuidedSample vet_sample(const GuidedSample& sample, const DonorIndex& donors,
                        const Environment& env, const PolicyParams& policy, FewshotMode mode,
                        const VettingOptions& opts, std::uint64_t rng_seed, std::uint64_t round) {
  if (sample.detached) return sample;
  if (!env.contains(sample.base.id)) {
    throw data_error("no candidate space for sample '" + sample.base.id + "'");
  }
  GuidedSample out = sample;
  const Provenance provenance = mode == FewshotMode::Bold ? Provenance::Bold
                                : mode == FewshotMode::Cautious ? Provenance::Cautious
                                                                : Provenance::Random;
  Rng draw_rng = make_stream(rng_seed, round, sample.base.id, StreamPurpose::Donors);
  const int attempts = mode == FewshotMode::Cautious ? 1 + opts.retries : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto exemplars = donors.draw(sample.base, opts.k, draw_rng);
    if (exemplars.empty()) break;
    GuidedSample trial = sample;
    attach_exemplars(trial, std::move(exemplars), provenance);
    if (mode != FewshotMode::Cautious) return trial;
    Rng vet_rng = make_stream(rng_seed, round, sample.base.id, StreamPurpose::Vetting,
                              static_cast<std::uint64_t>(attempt));
    if (verify_guidance(trial, env, policy, opts.rollouts, opts.temperature, vet_rng)) return trial;
  }
  attach_exemplars(out, {}, Provenance::None);
  return out;
}

Dataset build_vetted_fewshots(const Dataset& dataset, const Environment& env,
                              const PolicyParams& policy, FewshotMode mode,
                              const VettingOptions& opts, std::uint64_t rng_seed) {
  if (opts.rollouts < 1) throw invalid_argument("vetting rollouts must be >= 1");
  const DonorIndex donors(dataset);
  Dataset out = dataset;
  for (auto& gs : out.samples) gs = vet_sample(gs, donors, env, policy, mode, opts, rng_seed);
  return out;
}

}  // namespace toolexpander
