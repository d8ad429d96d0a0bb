#include "grpo.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace toolexpander {

void GrpoConfig::validate() const {
  if (group_size < 2) throw config_error("group_size must be >= 2");
  if (!(eps_low > 0.0 && eps_low < 1.0)) throw config_error("eps_low must lie in (0, 1)");
  if (!(eps_high > 0.0 && eps_high < 1.0)) throw config_error("eps_high must lie in (0, 1)");
  if (!(beta >= 0.0)) throw config_error("beta must be >= 0");
  if (!(decay_gamma > 0.0 && decay_gamma <= 1.0)) throw config_error("decay_gamma must lie in (0, 1]");
  if (!(lr0 >= 0.0) || !std::isfinite(lr0)) throw config_error("lr0 must be finite and >= 0");
  if (inner_epochs < 1) throw config_error("inner_epochs must be >= 1");
  if (!(std_floor > 0.0)) throw config_error("std_floor must be > 0");
}

std::vector<double> compute_advantages(const std::vector<double>& rewards, double std_floor) {
  if (rewards.size() < 2) throw invalid_argument("advantages need a group of at least 2");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

namespace {

struct TermEval {
  double value = 0.0;
  double ratio = 1.0;
  bool clipped = false;  // clipped branch strictly below the unclipped one
};

TermEval evaluate_term(double new_lp, double old_lp, double adv, const GrpoConfig& cfg) {
  TermEval t;
  t.ratio = std::exp(new_lp - old_lp);
  const double unclipped = t.ratio * adv;
  const double clipped = std::clamp(t.ratio, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high) * adv;
  t.clipped = clipped < unclipped;
  t.value = t.clipped ? clipped : unclipped;
  return t;
}

void check_group(const RolloutGroup& group, const CandidateSpace& space) {
  const std::size_t n = group.chosen.size();
  if (n == 0 || group.old_logprobs.size() != n || group.advantages.size() != n) {
    throw invalid_argument("rollout group for '" + group.sample_id + "' is incomplete");
  }
  if (group.sample_id != space.sample_id) {
    throw invalid_argument("rollout group and candidate space disagree on the sample");
  }
}

}  // namespace

ObjectiveReport surrogate_objective(const RolloutGroup& group, const PolicyParams& params_new,
                                    const CandidateSpace& space, const GrpoConfig& cfg,
                                    double temperature) {
  check_group(group, space);
  const std::vector<double> lp = log_probs(params_new, space, group.guided, temperature);
  const std::size_t n = group.chosen.size();
  ObjectiveReport rep;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const TermEval t = evaluate_term(lp[group.chosen[i]], group.old_logprobs[i], group.advantages[i], cfg);
    rep.surrogate += t.value;
    clipped += t.clipped ? 1 : 0;
  }
  rep.surrogate /= static_cast<double>(n);
  rep.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  if (cfg.use_kl) {
    rep.kl_term = kl_from_logprobs(lp, group.snapshot_logprobs);
    rep.total = rep.surrogate - cfg.beta * rep.kl_term;
  } else {
    rep.total = rep.surrogate;
  }
  return rep;
}

PolicyGradient objective_gradient(const RolloutGroup& group, const PolicyParams& params_new,
                                  const CandidateSpace& space, const GrpoConfig& cfg,
                                  double temperature) {
  check_group(group, space);
  const std::vector<double> lp = log_probs(params_new, space, group.guided, temperature);
  const std::size_t n = group.chosen.size();
  PolicyGradient grad;
  grad.theta[space.sample_id].assign(space.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const TermEval t = evaluate_term(lp[group.chosen[i]], group.old_logprobs[i], group.advantages[i], cfg);
    if (t.clipped || group.advantages[i] == 0.0) continue;
    // d(rho * A) = rho * A * d log pi
    const PolicyGradient g =
        grad_log_prob(params_new, space, group.guided, group.chosen[i], temperature);
    grad.add_scaled(g, t.ratio * group.advantages[i] / static_cast<double>(n));
  }
  if (cfg.use_kl && cfg.beta != 0.0) {
    grad.add_scaled(grad_kl(params_new, group.snapshot_logprobs, space, group.guided, temperature),
                    -cfg.beta);
  }
  return grad;
}

double lr_at_round(double lr0, double gamma, int round) {
  if (round < 0) throw invalid_argument("round must be >= 0");
  return lr0 * std::pow(gamma, round);
}

PolicyParams update_step(const PolicyParams& params, const PolicyGradient& grad, double lr) {
  PolicyParams out = params;
  for (const auto& [id, g] : grad.theta) {
    auto it = out.theta.find(id);
    if (it == out.theta.end()) throw invalid_argument("gradient row '" + id + "' has no parameters");
    if (it->second.size() != g.size()) {
      throw invalid_argument("gradient row '" + id + "' has mismatched length");
    }
    for (std::size_t j = 0; j < g.size(); ++j) it->second[j] += lr * g[j];
  }
  out.guidance_weight += lr * grad.guidance;
  out.exemplify_weight += lr * grad.exemplify;
  return out;
}

}  // namespace toolexpander
