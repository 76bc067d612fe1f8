#include <doctest.h>

#include <algorithm>

#include "pathgls/error.hpp"
#include "pathgls/grounding.hpp"
#include "pathgls/rng.hpp"

using namespace pathgls;

TEST_CASE("similarity matrix entries") {
  const std::vector<EmbeddingVector> texts{{{1.0, 0.0}}, {{0.0, 1.0}}};
  const std::vector<EmbeddingVector> patches{{{1.0, 0.0}}, {{0.6, 0.8}}};
  const SimilarityMatrix sim = similarity_matrix(texts, patches);
  REQUIRE(sim.rows == 2);
  REQUIRE(sim.cols == 2);
  CHECK(sim.at(0, 0) == doctest::Approx(1.0));
  CHECK(sim.at(0, 1) == doctest::Approx(0.6));
  CHECK(sim.at(1, 0) == doctest::Approx(0.0));
  CHECK(sim.at(1, 1) == doctest::Approx(0.8));
}

TEST_CASE("hand-traced grounding score") {
  // maxes 1.0 and 0.8, raw mean 0.9, remap (0.9+1)/2 = 0.95
  const std::vector<EmbeddingVector> texts{{{1.0, 0.0}}, {{0.0, 1.0}}};
  const std::vector<EmbeddingVector> patches{{{1.0, 0.0}}, {{0.6, 0.8}}};
  const GroundingResult r = grounding_score(similarity_matrix(texts, patches));
  CHECK(r.raw_score == doctest::Approx(0.9));
  CHECK(r.score == doctest::Approx(0.95));
  REQUIRE(r.evidence.size() == 2);
  CHECK(r.evidence[0].best_patch_index == 0);
  CHECK(r.evidence[1].best_patch_index == 1);
}

TEST_CASE("perfect grounding") {
  const std::vector<EmbeddingVector> v{{{1.0, 0.0}}, {{0.0, 1.0}}};
  const GroundingResult r = grounding_score(similarity_matrix(v, v));
  CHECK(r.raw_score == doctest::Approx(1.0));
  CHECK(r.score == doctest::Approx(1.0));
}

TEST_CASE("argmax ties take the lowest patch index") {
  SimilarityMatrix sim;
  sim.rows = 1;
  sim.cols = 3;
  sim.values = {0.5, 0.5, 0.2};
  const GroundingResult r = grounding_score(sim);
  CHECK(r.evidence[0].best_patch_index == 0);
}

TEST_CASE("empty dimensions are errors") {
  SimilarityMatrix empty;
  CHECK_THROWS_AS(grounding_score(empty), Error);
  SimilarityMatrix no_patches;
  no_patches.rows = 1;
  CHECK_THROWS_AS(grounding_score(no_patches), Error);
}

TEST_CASE("brute-force oracle on random matrices") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    SimilarityMatrix sim;
    sim.rows = 1 + rng.next_below(8);
    sim.cols = 1 + rng.next_below(8);
    sim.values.resize(sim.rows * sim.cols);
    for (auto& v : sim.values) v = 2.0 * rng.next_double() - 1.0;

    double mean = 0.0;
    for (std::size_t j = 0; j < sim.rows; ++j) {
      double best = -2.0;
      for (std::size_t i = 0; i < sim.cols; ++i) best = std::max(best, sim.at(j, i));
      mean += best;
    }
    mean /= double(sim.rows);
    const GroundingResult r = grounding_score(sim);
    CHECK(r.raw_score == doctest::Approx(mean).epsilon(1e-9));
    CHECK(r.score == doctest::Approx((mean + 1.0) / 2.0).epsilon(1e-9));
    CHECK(r.score >= 0.0);
    CHECK(r.score <= 1.0);
  }
}

TEST_CASE("adding patches never lowers the score") {
  Rng rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    SimilarityMatrix sim;
    sim.rows = 1 + rng.next_below(5);
    sim.cols = 2 + rng.next_below(6);
    sim.values.resize(sim.rows * sim.cols);
    for (auto& v : sim.values) v = 2.0 * rng.next_double() - 1.0;

    SimilarityMatrix subset;
    subset.rows = sim.rows;
    subset.cols = sim.cols - 1;
    for (std::size_t j = 0; j < sim.rows; ++j)
      for (std::size_t i = 0; i + 1 < sim.cols; ++i) subset.values.push_back(sim.at(j, i));

    CHECK(grounding_score(sim).score >= grounding_score(subset).score - 1e-12);
  }
}

TEST_CASE("compute_grounding flags entity-free reports") {
  const Lexicon lexicon({{"lymphoma", EntityCategory::Diagnosis}});
  BaselineTextEmbedder text(7, 64);
  BaselineImageEmbedder image(7, 64);
  PatchBag bag;
  Patch p;
  p.tile = Image::blank(8, 8, 120, 40, 160);
  bag.patches.push_back(p);

  const GroundingResult none = compute_grounding("Unremarkable.", lexicon, text, image, bag);
  CHECK(none.ungroundable);
  CHECK(none.score == doctest::Approx(0.5));
  CHECK(none.evidence.empty());

  const GroundingResult some = compute_grounding("Consistent with lymphoma.", lexicon, text, image, bag);
  CHECK_FALSE(some.ungroundable);
  REQUIRE(some.evidence.size() == 1);
  CHECK(some.evidence[0].entity_surface == "lymphoma");
}
