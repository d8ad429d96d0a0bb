#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace toolexpander {

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw invalid_argument("temperature must be a positive finite number");
  }
}

void check_index(const CandidateSpace& space, std::size_t k) {
  if (k >= space.size()) {
    throw invalid_argument("candidate index " + std::to_string(k) + " out of range for '" +
                           space.sample_id + "'");
  }
}

double guidance_feature(const CandidateResponse& c, bool guided) {
  return guided && is_correct_kind(c.kind) ? 1.0 : 0.0;
}

double exemplify_feature(const CandidateResponse& c) {
  return c.kind == CandidateKind::CorrectWithValidExamples ? 1.0 : 0.0;
}

}  // namespace

std::string_view to_string(CandidateKind k) {
  switch (k) {
    case CandidateKind::Correct: return "correct";
    case CandidateKind::WrongArg: return "wrong_arg";
    case CandidateKind::WrongTool: return "wrong_tool";
    case CandidateKind::Malformed: return "malformed";
    case CandidateKind::CorrectWithValidExamples: return "correct_with_valid_examples";
    case CandidateKind::CorrectWithDegenerateExamples: return "correct_with_degenerate_examples";
  }
  return "correct";
}

bool is_correct_kind(CandidateKind k) {
  return k == CandidateKind::Correct || k == CandidateKind::CorrectWithValidExamples ||
         k == CandidateKind::CorrectWithDegenerateExamples;
}

std::size_t CandidateSpace::index_of(CandidateKind kind) const {
  for (const auto& c : candidates) {
    if (c.kind == kind) return c.index;
  }
  throw invalid_argument("space '" + sample_id + "' has no candidate of kind " +
                         std::string(to_string(kind)));
}

const std::vector<double>& PolicyParams::row(std::string_view sample_id) const {
  auto it = theta.find(sample_id);
  if (it == theta.end()) throw data_error("no parameters for sample '" + std::string(sample_id) + "'");
  return it->second;
}

void PolicyGradient::add_scaled(const PolicyGradient& other, double scale) {
  for (const auto& [id, g] : other.theta) {
    auto& row = theta[id];
    if (row.size() < g.size()) row.resize(g.size(), 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) row[j] += scale * g[j];
  }
  guidance += scale * other.guidance;
  exemplify += scale * other.exemplify;
}

void PolicyGradient::scale(double factor) {
  for (auto& [id, row] : theta) {
    for (double& v : row) v *= factor;
  }
  guidance *= factor;
  exemplify *= factor;
}

double PolicyGradient::norm() const {
  double sq = guidance * guidance + exemplify * exemplify;
  for (const auto& [id, row] : theta) {
    for (double v : row) sq += v * v;
  }
  return std::sqrt(sq);
}

bool PolicyGradient::is_zero() const {
  if (guidance != 0.0 || exemplify != 0.0) return false;
  for (const auto& [id, row] : theta) {
    for (double v : row) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

std::vector<double> logits(const PolicyParams& params, const CandidateSpace& space, bool guided) {
  const auto& row = params.row(space.sample_id);
  if (row.size() != space.size()) {
    throw data_error("parameter row for '" + space.sample_id + "' has " +
                     std::to_string(row.size()) + " entries, space has " +
                     std::to_string(space.size()));
  }
  std::vector<double> z(row);
  for (const auto& c : space.candidates) {
    z[c.index] += params.guidance_weight * guidance_feature(c, guided) +
                  params.exemplify_weight * exemplify_feature(c);
  }
  return z;
}

std::vector<double> log_probs(const PolicyParams& params, const CandidateSpace& space, bool guided,
                              double temperature) {
  check_temperature(temperature);
  std::vector<double> z = logits(params, space, guided);
  for (double& v : z) v /= temperature;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

std::vector<double> probs(const PolicyParams& params, const CandidateSpace& space, bool guided,
                          double temperature) {
  check_temperature(temperature);
  std::vector<double> z = logits(params, space, guided);
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp((v - m) / temperature);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

double log_prob(const PolicyParams& params, const CandidateSpace& space, bool guided,
                std::size_t k, double temperature) {
  check_index(space, k);
  return log_probs(params, space, guided, temperature)[k];
}

PolicyGradient grad_log_prob(const PolicyParams& params, const CandidateSpace& space, bool guided,
                             std::size_t k, double temperature) {
  check_index(space, k);
  const std::vector<double> p = probs(params, space, guided, temperature);
  PolicyGradient g;
  auto& row = g.theta[space.sample_id];
  row.assign(space.size(), 0.0);
  double mean_u = 0.0;
  double mean_v = 0.0;
  for (const auto& c : space.candidates) {
    row[c.index] = ((c.index == k ? 1.0 : 0.0) - p[c.index]) / temperature;
    mean_u += p[c.index] * guidance_feature(c, guided);
    mean_v += p[c.index] * exemplify_feature(c);
  }
  const auto& chosen = space.candidates[k];
  g.guidance = (guidance_feature(chosen, guided) - mean_u) / temperature;
  g.exemplify = (exemplify_feature(chosen) - mean_v) / temperature;
  return g;
}

double kl_from_logprobs(const std::vector<double>& new_lp, const std::vector<double>& old_lp) {
  if (new_lp.size() != old_lp.size()) throw invalid_argument("KL over mismatched supports");
  double kl = 0.0;
  for (std::size_t k = 0; k < new_lp.size(); ++k) {
    kl += std::exp(new_lp[k]) * (new_lp[k] - old_lp[k]);
  }
  return kl;
}

double kl_exact(const PolicyParams& params_new, const PolicyParams& params_old,
                const CandidateSpace& space, bool guided, double temperature) {
  return kl_from_logprobs(log_probs(params_new, space, guided, temperature),
                          log_probs(params_old, space, guided, temperature));
}

PolicyGradient grad_kl(const PolicyParams& params_new, const std::vector<double>& old_logprobs,
                       const CandidateSpace& space, bool guided, double temperature) {
  const std::vector<double> lp = log_probs(params_new, space, guided, temperature);
  const double kl = kl_from_logprobs(lp, old_logprobs);
  // d KL / d z_j = p_j (log p_j - log q_j - KL) / T
  PolicyGradient g;
  auto& row = g.theta[space.sample_id];
  row.assign(space.size(), 0.0);
  for (const auto& c : space.candidates) {
    const std::size_t j = c.index;
    const double dz = std::exp(lp[j]) * (lp[j] - old_logprobs[j] - kl) / temperature;
    row[j] = dz;
    g.guidance += guidance_feature(c, guided) * dz;
    g.exemplify += exemplify_feature(c) * dz;
  }
  return g;
}

RolloutGroup sample_rollouts(const PolicyParams& params, const CandidateSpace& space, bool guided,
                             std::size_t n, double temperature, Rng& rng) {
  if (n < 1) throw invalid_argument("rollout count must be >= 1");
  RolloutGroup group;
  group.sample_id = space.sample_id;
  group.guided = guided;
  group.snapshot_logprobs = log_probs(params, space, guided, temperature);
  const std::vector<double> p = probs(params, space, guided, temperature);
  group.chosen.reserve(n);
  group.old_logprobs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t pick = p.size() - 1;
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += p[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    // Never land on a zero-probability tail entry through rounding.
    while (p[pick] == 0.0 && pick > 0) --pick;
    group.chosen.push_back(pick);
    group.old_logprobs.push_back(group.snapshot_logprobs[pick]);
  }
  return group;
}

double expected_reward(const PolicyParams& params, const CandidateSpace& space, bool guided,
                       double temperature, const std::vector<double>& candidate_rewards) {
  const std::vector<double> p = probs(params, space, guided, temperature);
  return std::inner_product(p.begin(), p.end(), candidate_rewards.begin(), 0.0);
}

bool demonstrates_tool(const GuidedSample& sample, const CandidateSpace& space) {
  std::optional<std::string> tool;
  for (const auto& c : space.candidates) {
    if (c.kind == CandidateKind::Correct) tool = c.tool_of_call;
  }
  if (!tool) return false;
  for (const auto& ex : sample.exemplars) {
    for (const auto& a : ex.answers) {
      if (a.tool_name == *tool) return true;
    }
  }
  return false;
}

Environment::Environment(const Dataset& dataset, const RewardMode& mode, std::uint64_t seed)
    : mode_(mode) {
  for (const auto& gs : dataset.samples) {
    add(gs.base, make_toy_space(gs.base, mode, stream_seed(seed, 0, gs.base.id, StreamPurpose::Fixture)),
        mode);
  }
}

void Environment::add(const Sample& sample, CandidateSpace space, const RewardMode& mode) {
  mode_ = mode;
  Entry e;
  for (const auto& c : space.candidates) e.rewards.push_back(reward(c.text, sample, mode).value);
  e.space = std::move(space);
  entries_[sample.id] = std::move(e);
}

const CandidateSpace& Environment::space(std::string_view sample_id) const {
  auto it = entries_.find(sample_id);
  if (it == entries_.end()) {
    throw data_error("no candidate space for sample '" + std::string(sample_id) + "'");
  }
  return it->second.space;
}

const std::vector<double>& Environment::rewards(std::string_view sample_id) const {
  auto it = entries_.find(sample_id);
  if (it == entries_.end()) {
    throw data_error("no candidate space for sample '" + std::string(sample_id) + "'");
  }
  return it->second.rewards;
}

bool Environment::contains(std::string_view sample_id) const {
  return entries_.find(sample_id) != entries_.end();
}

}  // namespace toolexpander
