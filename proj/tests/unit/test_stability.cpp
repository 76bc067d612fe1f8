#include <doctest.h>

#include "pathgls/error.hpp"
#include "pathgls/stability.hpp"

using namespace pathgls;

namespace {

// Two-tone H&E-like tile; a flat color has no second stain direction and
// would make the perturbation's stain estimation fail.
Image he_like(int size) {
  Image img = Image::blank(size, size, 255, 255, 255);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      auto* p = img.px(x, y);
      if (((x / 8) + (y / 8)) % 2 == 0) {
        p[0] = static_cast<std::uint8_t>(90 + x % 30);
        p[1] = static_cast<std::uint8_t>(40 + y % 20);
        p[2] = 140;
      } else {
        p[0] = 190;
        p[1] = static_cast<std::uint8_t>(90 + x % 25);
        p[2] = 160;
      }
    }
  }
  return img;
}

}  // namespace

TEST_CASE("attack prompt rendering") {
  const AttackPrompt p =
      build_attack_prompt("Describe the slide.", "Patient has confirmed metastatic melanoma.");
  CHECK(p.rendered ==
        "Clinical history: Patient has confirmed metastatic melanoma.\n\nDescribe the slide.");
  CHECK(build_attack_prompt("Describe the slide.", p.false_history).rendered == p.rendered);
}

TEST_CASE("history selection is a stable hash of the case id") {
  const std::vector<std::string> histories{"h0", "h1", "h2", "h3", "h4"};
  const std::string& first = select_attack_history(histories, "case-42");
  CHECK(select_attack_history(histories, "case-42") == first);
  // Different ids spread across templates (not a strict requirement per id,
  // but the full default set must be reachable).
  bool differs = false;
  for (int i = 0; i < 20 && !differs; ++i) {
    differs = select_attack_history(histories, "case-" + std::to_string(i)) != first;
  }
  CHECK(differs);
  CHECK_THROWS_AS(select_attack_history({}, "case"), Error);
}

TEST_CASE("semantic distance") {
  BaselineTextEmbedder embedder(7, 64);
  CHECK(semantic_distance("same text", "same text", embedder) == doctest::Approx(0.0));
  CHECK(semantic_distance("Same  Text", "same text", embedder) == doctest::Approx(0.0));
  const double d = semantic_distance("completely different words", "same text", embedder);
  CHECK(d > 0.0);
  CHECK(d <= 1.0);
  CHECK(d == semantic_distance("same text", "completely different words", embedder));
}

TEST_CASE("stability score arithmetic") {
  CHECK(stability_score(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(stability_score(0.1, 0.3) == doctest::Approx(0.8));
  CHECK(stability_score(1.0, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(stability_score(-0.1, 0.0), doctest::Contains("out-of-range-delta"), Error);
  CHECK_THROWS_AS(stability_score(0.0, 1.5), Error);
}

TEST_CASE("evaluate_stability with a constant transcript subject is perfectly stable") {
  auto store = std::make_shared<TranscriptStore>();
  const Image img = he_like(64);
  BaselineTextEmbedder embedder(7, 64);

  // Seed the transcript by recording a baseline run first.
  {
    RecordingSubject rec(std::make_shared<BaselineSubject>(7), store);
    const StabilityResult first = evaluate_stability(img, "Describe.", "case-a", rec, embedder,
                                                     {0.05, 0.01, 1}, default_attack_histories());
    CHECK(first.score >= 0.0);
    CHECK(first.score <= 1.0);
  }

  TranscriptSubject replay(store);
  const StabilityResult a = evaluate_stability(img, "Describe.", "case-a", replay, embedder,
                                               {0.05, 0.01, 1}, default_attack_histories());
  const StabilityResult b = evaluate_stability(img, "Describe.", "case-a", replay, embedder,
                                               {0.05, 0.01, 1}, default_attack_histories());
  CHECK(a.score == b.score);
  CHECK(a.report_orig == b.report_orig);
  CHECK(a.report_aug == b.report_aug);
  CHECK(a.report_attack == b.report_attack);
  CHECK(a.false_history == select_attack_history(default_attack_histories(), "case-a"));
  CHECK(a.score == doctest::Approx(1.0 - (a.delta_aug + a.delta_attack) / 2.0));
}

TEST_CASE("attack flip drops the score by exactly d/2") {
  // Subject that answers the attack prompt with a flipped diagnosis.
  class FlippingSubject : public SubjectModel {
   public:
    std::string generate(const Image&, const std::string& prompt) const override {
      if (prompt.rfind("Clinical history:", 0) == 0) return "The lesion is benign.";
      return "The lesion is malignant.";
    }
  };
  const Image img = he_like(64);
  BaselineTextEmbedder embedder(7, 64);
  const double d = semantic_distance("The lesion is malignant.", "The lesion is benign.", embedder);
  const StabilityResult r = evaluate_stability(img, "Describe.", "case-b", FlippingSubject{},
                                               embedder, {0.0, 0.0, 1}, default_attack_histories());
  CHECK(r.delta_aug == doctest::Approx(0.0));
  CHECK(r.delta_attack == doctest::Approx(d));
  CHECK(r.score == doctest::Approx(1.0 - d / 2.0));
}

TEST_CASE("attack history file loading") {
  CHECK_THROWS_AS(load_attack_histories("/nonexistent/histories.txt"), Error);
  const auto histories =
      load_attack_histories(std::string(PATHGLS_SOURCE_DIR) + "/data/attack_histories.txt");
  CHECK(histories.size() == 10);
}
