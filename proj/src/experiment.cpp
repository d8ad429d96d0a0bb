#include "experiment.hpp"

#include "fewshot.hpp"
#include "trainer.hpp"

namespace toolexpander {

int RolloutsVsFewshotsReport::reduction_scaled() const {
  return static_cast<int>(hard_base.size()) - static_cast<int>(hard_scaled.size());
}

int RolloutsVsFewshotsReport::reduction_fewshot() const {
  return static_cast<int>(hard_base.size()) - static_cast<int>(hard_fewshot.size());
}

RolloutsVsFewshotsReport experiment_rollouts_vs_fewshots(const Dataset& dataset,
                                                         const Environment& env,
                                                         const PolicyParams& params,
                                                         const RolloutsVsFewshotsOptions& opts) {
  ClassifyOptions base{opts.base_rollouts, opts.temperature, opts.seed, 0, opts.workers, false};
  RolloutsVsFewshotsReport r;
  r.hard_base = classify_hard(dataset, env, params, base);

  ClassifyOptions scaled = base;
  scaled.rollouts = opts.scaled_rollouts;
  r.hard_scaled = classify_hard(dataset, env, params, scaled);

  const VettingOptions vetting{opts.base_rollouts, opts.temperature, kDefaultExemplarsPerTool,
                               kVettingRetries};
  const Dataset guided =
      build_vetted_fewshots(dataset, env, params, FewshotMode::Cautious, vetting, opts.seed);
  ClassifyOptions with_guidance = base;
  with_guidance.use_guidance = true;
  r.hard_fewshot = classify_hard(guided, env, params, with_guidance);

  r.hard_control = classify_hard(dataset, env, params, base);
  return r;
}

Json report_to_json(const RolloutsVsFewshotsReport& r) {
  return {{"hard_base", r.hard_base.size()},
          {"hard_scaled", r.hard_scaled.size()},
          {"hard_fewshot", r.hard_fewshot.size()},
          {"hard_control", r.hard_control.size()},
          {"reduction_scaled", r.reduction_scaled()},
          {"reduction_fewshot", r.reduction_fewshot()},
          {"control_identical", r.control_identical()},
          {"fewshot_beats_rollouts", r.fewshot_beats_rollouts()}};
}

}  // namespace toolexpander
