#include "pathgls/fusion.hpp"

#include <cmath>

#include "pathgls/error.hpp"
#include "pathgls/tessellate.hpp"

namespace pathgls {

void Weights::validate() const {
  require(grounding >= 0.0 && logic >= 0.0 && stability >= 0.0, "invalid-weights",
          "weights must be non-negative");
  require(std::fabs(grounding + logic + stability - 1.0) <= 1e-9, "invalid-weights",
          "weights must sum to 1");
}

Weights Weights::renormalized_without_stability() const {
  validate();
  const double rest = grounding + logic;
  require(rest > 0.0, "invalid-weights", "cannot renormalize: grounding and logic weights are 0");
  return Weights{grounding / rest, logic / rest, 0.0};
}

void RoutingThresholds::validate() const {
  require(reject_max >= 0.0 && deploy_min <= 1.0 && reject_max < deploy_min,
          "invalid-thresholds", "need 0 <= reject_max < deploy_min <= 1");
}

const char* to_string(Routing routing) {
  switch (routing) {
    case Routing::Deploy: return "Deploy";
    case Routing::Review: return "Review";
    case Routing::Reject: return "Reject";
  }
  return "Review";
}

double fuse(double s_g, double s_l, double s_s, const Weights& weights) {
  weights.validate();
  require(s_g >= 0.0 && s_g <= 1.0 && s_l >= 0.0 && s_l <= 1.0 && s_s >= 0.0 && s_s <= 1.0,
          "score-out-of-range", "component scores must lie in [0,1]");
  return s_g * weights.grounding + s_l * weights.logic + s_s * weights.stability;
}

Routing route(double s_total, const RoutingThresholds& thresholds) {
  thresholds.validate();
  if (s_total >= thresholds.deploy_min) return Routing::Deploy;
  if (s_total <= thresholds.reject_max) return Routing::Reject;
  return Routing::Review;
}

ScoreBundle evaluate_case(const CaseInput& input, const PipelineContext& context) {
  try {
    context.weights.validate();
    context.thresholds.validate();
    require(context.providers.text && context.providers.image && context.providers.nli,
            "config-invalid", "text, image and NLI providers are required");

    ScoreBundle bundle;
    bundle.case_id = input.case_id;

    const PatchBag raw_bag = tessellate(input.image, context.patch_size, context.stride);
    const PatchBag bag =
        filter_background(raw_bag, context.saturation_threshold, context.min_tissue_fraction);

    std::string report;
    if (input.report.has_value()) {
      report = *input.report;
    } else {
      require(context.providers.subject != nullptr, "config-invalid",
              "no report supplied and no subject provider configured");
      report = context.providers.subject->generate(input.image, context.base_prompt);
      require(!report.empty(), "empty-generation", "subject produced an empty report");
    }

    bundle.grounding = compute_grounding(report, context.lexicon, *context.providers.text,
                                         *context.providers.image, bag);
    bundle.s_g = bundle.grounding.score;
    if (bundle.grounding.ungroundable) bundle.flags.insert("ungroundable");

    LogicOutcome logic = compute_logic(report, context.lexicon, context.cue_words,
                                       *context.providers.nli, context.top_k);
    bundle.s_l = logic.result.score;
    if (logic.result.vacuous) bundle.flags.insert("vacuous");
    bundle.logic = std::move(logic);

    if (context.stability_enabled) {
      require(context.providers.subject != nullptr, "config-invalid",
              "stability requires a subject provider (or set stability to skip)");
      bundle.stability = evaluate_stability(input.image, context.base_prompt, input.case_id,
                                            *context.providers.subject, *context.providers.text,
                                            context.perturbation, context.attack_histories);
      bundle.s_s = bundle.stability->score;
      bundle.effective_weights = context.weights;
    } else {
      bundle.stability_skipped = true;
      bundle.s_s = 0.0;
      bundle.effective_weights = context.weights.renormalized_without_stability();
    }

    bundle.s_total = fuse(bundle.s_g, bundle.s_l, bundle.s_s, bundle.effective_weights);
    bundle.routing = route(bundle.s_total, context.thresholds);
    return bundle;
  } catch (const Error& e) {
    throw Error(e.code(), "case '" + input.case_id + "': " + e.what());
  }
}

}  // namespace pathgls
