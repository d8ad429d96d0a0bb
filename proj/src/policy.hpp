#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reward.hpp"
#include "rng.hpp"
#include "toolcall.hpp"

namespace toolexpander {

enum class CandidateKind {
  Correct,
  WrongArg,
  WrongTool,
  Malformed,
  CorrectWithValidExamples,
  CorrectWithDegenerateExamples,
};

std::string_view to_string(CandidateKind k);
bool is_correct_kind(CandidateKind k);

struct CandidateResponse {
  std::size_t index = 0;
  std::string text;
  std::optional<std::string> tool_of_call;
  CandidateKind kind = CandidateKind::Correct;
};

/// Finite stand-in for the response space of one sample.
struct CandidateSpace {
  std::string sample_id;
  std::vector<CandidateResponse> candidates;

  std::size_t size() const { return candidates.size(); }
  std::size_t index_of(CandidateKind kind) const;
};

using ThetaTable = std::map<std::string, std::vector<double>, std::less<>>;

/// Tabular logits per sample plus the two shared feature weights.
struct PolicyParams {
  ThetaTable theta;
  double guidance_weight = 2.0;
  double exemplify_weight = 0.0;

  const std::vector<double>& row(std::string_view sample_id) const;
  bool operator==(const PolicyParams&) const = default;
};

/// Same layout as PolicyParams; rows absent from `theta` are zero.
struct PolicyGradient {
  ThetaTable theta;
  double guidance = 0.0;
  double exemplify = 0.0;

  /// this += scale * other
  void add_scaled(const PolicyGradient& other, double scale);
  void scale(double factor);
  double norm() const;
  bool is_zero() const;
};

/// N draws for one sample. `snapshot_logprobs` is the full old-policy
/// distribution (length K), kept so the KL term can be evaluated exactly.
struct RolloutGroup {
  std::string sample_id;
  bool guided = false;
  std::vector<std::size_t> chosen;
  std::vector<double> old_logprobs;
  std::vector<double> snapshot_logprobs;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// `guided` means exemplars demonstrating the sample's tool are attached; it
// switches on the guidance feature for every correct-kind candidate.
std::vector<double> logits(const PolicyParams& params, const CandidateSpace& space, bool guided);
std::vector<double> probs(const PolicyParams& params, const CandidateSpace& space, bool guided,
                          double temperature);
std::vector<double> log_probs(const PolicyParams& params, const CandidateSpace& space, bool guided,
                              double temperature);
double log_prob(const PolicyParams& params, const CandidateSpace& space, bool guided,
                std::size_t k, double temperature);
PolicyGradient grad_log_prob(const PolicyParams& params, const CandidateSpace& space, bool guided,
                             std::size_t k, double temperature);

/// KL(new || old) summed over the whole candidate space.
double kl_exact(const PolicyParams& params_new, const PolicyParams& params_old,
                const CandidateSpace& space, bool guided, double temperature);
double kl_from_logprobs(const std::vector<double>& new_lp, const std::vector<double>& old_lp);
/// Gradient of KL(new || old) with respect to the new parameters.
PolicyGradient grad_kl(const PolicyParams& params_new, const std::vector<double>& old_logprobs,
                       const CandidateSpace& space, bool guided, double temperature);

/// Rewards/advantages are left empty.
RolloutGroup sample_rollouts(const PolicyParams& params, const CandidateSpace& space, bool guided,
                             std::size_t n, double temperature, Rng& rng);

double expected_reward(const PolicyParams& params, const CandidateSpace& space, bool guided,
                       double temperature, const std::vector<double>& candidate_rewards);

/// Builds K candidates whose texts hit their kind's reward contract; the
/// contract is checked through reward() and violations throw Error(Runtime).
CandidateSpace make_toy_space(const Sample& sample, const RewardMode& mode, std::uint64_t rng_seed);

/// Whether attached exemplars demonstrate the tool called by the space's
/// correct candidate. Feeds the `guided` flag.
bool demonstrates_tool(const GuidedSample& sample, const CandidateSpace& space);

/// Candidate spaces and their reward-engine scores for a dataset.
class Environment {
 public:
  Environment() = default;
  Environment(const Dataset& dataset, const RewardMode& mode, std::uint64_t seed);

  void add(const Sample& sample, CandidateSpace space, const RewardMode& mode);
  const CandidateSpace& space(std::string_view sample_id) const;
  const std::vector<double>& rewards(std::string_view sample_id) const;
  bool contains(std::string_view sample_id) const;
  const RewardMode& mode() const { return mode_; }

 private:
  struct Entry {
    CandidateSpace space;
    std::vector<double> rewards;
  };
  std::map<std::string, Entry, std::less<>> entries_;
  RewardMode mode_;
};

}  // namespace toolexpander
