#include <doctest.h>

#include "pathgls/error.hpp"
#include "pathgls/fusion.hpp"

using namespace pathgls;

TEST_CASE("weights validation") {
  CHECK_NOTHROW((Weights{0.4, 0.3, 0.3}.validate()));
  CHECK_THROWS_WITH_AS((Weights{0.5, 0.3, 0.3}.validate()), doctest::Contains("invalid-weights"),
                       Error);
  CHECK_THROWS_AS((Weights{1.2, -0.1, -0.1}.validate()), Error);
}

TEST_CASE("fusion arithmetic") {
  const Weights w{0.4, 0.3, 0.3};
  CHECK(fuse(0.38, 0.96, 0.30, w) == doctest::Approx(0.530));
  CHECK(fuse(0.73, 0.97, 0.75, w) == doctest::Approx(0.808));
  CHECK(fuse(1.0, 1.0, 1.0, w) == doctest::Approx(1.0));
  CHECK(fuse(0.0, 0.0, 0.0, w) == doctest::Approx(0.0));
  CHECK_THROWS_AS(fuse(1.5, 0.5, 0.5, w), Error);
}

TEST_CASE("renormalization without the stability axis") {
  const Weights w = Weights{0.4, 0.3, 0.3}.renormalized_without_stability();
  CHECK(w.grounding == doctest::Approx(4.0 / 7.0));
  CHECK(w.logic == doctest::Approx(3.0 / 7.0));
  CHECK(w.stability == doctest::Approx(0.0));
  // (0.8, 0.9) with (4/7, 3/7) -> 0.843
  CHECK(fuse(0.8, 0.9, 0.0, w) == doctest::Approx(0.8428571).epsilon(1e-6));
}

TEST_CASE("routing thresholds") {
  const RoutingThresholds t{0.7, 0.4};
  CHECK(route(0.83, t) == Routing::Deploy);
  CHECK(route(0.55, t) == Routing::Review);
  CHECK(route(0.2, t) == Routing::Reject);
  // Documented boundary rule.
  CHECK(route(0.7, t) == Routing::Deploy);
  CHECK(route(0.4, t) == Routing::Reject);
  CHECK_THROWS_AS((RoutingThresholds{0.4, 0.7}.validate()), Error);
  CHECK(std::string(to_string(Routing::Review)) == "Review");
}

TEST_CASE("monotonicity in each component") {
  const Weights w{0.4, 0.3, 0.3};
  const double base = fuse(0.5, 0.5, 0.5, w);
  CHECK(fuse(0.6, 0.5, 0.5, w) > base);
  CHECK(fuse(0.5, 0.6, 0.5, w) > base);
  CHECK(fuse(0.5, 0.5, 0.6, w) > base);
}

namespace {

PipelineContext baseline_context(bool stability) {
  PipelineContext ctx;
  ctx.providers.text = std::make_shared<BaselineTextEmbedder>(7, 64);
  ctx.providers.image = std::make_shared<BaselineImageEmbedder>(7, 64);
  ctx.providers.nli = std::make_shared<BaselineNli>();
  ctx.providers.subject = std::make_shared<BaselineSubject>(7);
  ctx.lexicon = Lexicon({{"spindle cells", EntityCategory::Morphology},
                         {"sarcoma", EntityCategory::Diagnosis},
                         {"dermis", EntityCategory::Location}});
  ctx.cue_words = default_cue_words();
  ctx.attack_histories = default_attack_histories();
  ctx.patch_size = 32;
  ctx.stride = 32;
  ctx.stability_enabled = stability;
  return ctx;
}

Image he_like(int size) {
  Image img = Image::blank(size, size, 255, 255, 255);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      auto* p = img.px(x, y);
      if ((x / 8 + y / 8) % 2 == 0) {
        p[0] = 90 + x % 30;
        p[1] = 40 + y % 20;
        p[2] = 140;
      } else {
        p[0] = 190;
        p[1] = 90 + x % 25;
        p[2] = 160;
      }
    }
  return img;
}

}  // namespace

TEST_CASE("evaluate_case end to end") {
  const PipelineContext ctx = baseline_context(true);
  CaseInput input;
  input.case_id = "c1";
  input.image = he_like(64);
  input.report = "Spindle cells are seen in the dermis. Consistent with sarcoma.";

  const ScoreBundle a = evaluate_case(input, ctx);
  const ScoreBundle b = evaluate_case(input, ctx);
  CHECK(a.s_total == b.s_total);
  CHECK(a.s_g >= 0.0);
  CHECK(a.s_g <= 1.0);
  CHECK(a.s_total ==
        doctest::Approx(0.4 * a.s_g + 0.3 * a.s_l + 0.3 * a.s_s).epsilon(1e-9));
  CHECK_FALSE(a.stability_skipped);
  REQUIRE(a.stability.has_value());
}

TEST_CASE("stability skip renormalizes the weights") {
  const PipelineContext ctx = baseline_context(false);
  CaseInput input;
  input.case_id = "c2";
  input.image = he_like(64);
  input.report = "Spindle cells are seen. Consistent with sarcoma.";

  const ScoreBundle bundle = evaluate_case(input, ctx);
  CHECK(bundle.stability_skipped);
  CHECK_FALSE(bundle.stability.has_value());
  CHECK(bundle.s_s == 0.0);
  CHECK(bundle.effective_weights.grounding == doctest::Approx(4.0 / 7.0));
  CHECK(bundle.s_total ==
        doctest::Approx(bundle.s_g * 4.0 / 7.0 + bundle.s_l * 3.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("zero-entity report carries the ungroundable flag") {
  const PipelineContext ctx = baseline_context(false);
  CaseInput input;
  input.case_id = "c3";
  input.image = he_like(64);
  input.report = "Nothing recognizable here.";
  const ScoreBundle bundle = evaluate_case(input, ctx);
  CHECK(bundle.flags.count("ungroundable") == 1);
  CHECK(bundle.s_g == doctest::Approx(0.5));
}

TEST_CASE("generated-report mode uses the subject model") {
  const PipelineContext ctx = baseline_context(true);
  CaseInput input;
  input.case_id = "c4";
  input.image = he_like(64);
  const ScoreBundle bundle = evaluate_case(input, ctx);
  CHECK(bundle.s_total >= 0.0);
  CHECK(bundle.s_total <= 1.0);
}

TEST_CASE("module errors surface with the case id attached") {
  PipelineContext ctx = baseline_context(true);
  CaseInput input;
  input.case_id = "tiny-case";
  input.image = Image::blank(8, 8, 100, 50, 130);  // smaller than the patch size
  input.report = "Spindle cells.";
  CHECK_THROWS_WITH_AS(evaluate_case(input, ctx), doctest::Contains("tiny-case"), Error);
}
