#pragma once

#include <vector>

#include "policy.hpp"

namespace toolexpander {

/// Defaults follow the dynamic-sampling training table: symmetric clip 0.2,
/// KL 1e-3, lr 1e-6 decayed by 0.8 per round, 5 rollouts per group.
struct GrpoConfig {
  int group_size = 5;
  double eps_low = 0.2;
  double eps_high = 0.2;
  double beta = 1e-3;
  bool use_kl = true;
  double lr0 = 1e-6;
  double decay_gamma = 0.8;
  int inner_epochs = 1;
  double std_floor = 1e-8;

  void validate() const;
};

/// Entropy bonus is fixed at zero and not part of the objective.
inline constexpr double kEntropyCoefficient = 0.0;

struct ObjectiveReport {
  double surrogate = 0.0;
  double kl_term = 0.0;
  double total = 0.0;
  double clipped_fraction = 0.0;
};

/// (r - mean) / std with the population std; all zeros when std < std_floor.
std::vector<double> compute_advantages(const std::vector<double>& rewards, double std_floor);

/// Mean over the group of min(rho*A, clip(rho, 1-eps_low, 1+eps_high)*A),
/// minus beta * KL(new || snapshot) when use_kl.
ObjectiveReport surrogate_objective(const RolloutGroup& group, const PolicyParams& params_new,
                                    const CandidateSpace& space, const GrpoConfig& cfg,
                                    double temperature);

/// Exact gradient of ObjectiveReport::total. A term whose clipped branch is
/// strictly smaller contributes nothing; ties take the unclipped branch.
PolicyGradient objective_gradient(const RolloutGroup& group, const PolicyParams& params_new,
                                  const CandidateSpace& space, const GrpoConfig& cfg,
                                  double temperature);

double lr_at_round(double lr0, double gamma, int round);

/// Gradient ascent: params + lr * grad. Rows absent from grad are untouched.
PolicyParams update_step(const PolicyParams& params, const PolicyGradient& grad, double lr);

}  // namespace toolexpander
