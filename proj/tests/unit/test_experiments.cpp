#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathgls/error.hpp"
#include "pathgls/experiments.hpp"
#include "pathgls/rng.hpp"

using namespace pathgls;

namespace {

Lexicon caption_terms() {
  return Lexicon({{"spindle cells", EntityCategory::Morphology},
                  {"lymphoma", EntityCategory::Diagnosis},
                  {"melanoma", EntityCategory::Diagnosis}});
}

Lexicon pool_terms() {
  return Lexicon({{"epithelioid cells", EntityCategory::Morphology},
                  {"sarcoma", EntityCategory::Diagnosis}});
}

}  // namespace

TEST_CASE("visual hallucination swaps one entity for a same-category pool term") {
  const EditedCaption e = make_visual_hallucination("Sheets of spindle cells suggest lymphoma.",
                                                    caption_terms(), pool_terms(), 5);
  CHECK(e.edit.operation == "entity-swap");
  if (e.edit.original == "lymphoma") {
    CHECK(e.edit.replacement == "sarcoma");
    CHECK(e.text == "Sheets of spindle cells suggest sarcoma.");
  } else {
    CHECK(e.edit.original == "spindle cells");
    CHECK(e.edit.replacement == "epithelioid cells");
    CHECK(e.text == "Sheets of epithelioid cells suggest lymphoma.");
  }
  // Same seed, same output.
  const EditedCaption again = make_visual_hallucination("Sheets of spindle cells suggest lymphoma.",
                                                        caption_terms(), pool_terms(), 5);
  CHECK(again.text == e.text);
}

TEST_CASE("visual hallucination with no entity is an error") {
  CHECK_THROWS_WITH_AS(make_visual_hallucination("Nothing here.", caption_terms(), pool_terms(), 1),
                       doctest::Contains("no-entity-to-replace"), Error);
}

TEST_CASE("logic error flips one polar term") {
  const AntonymTable table = AntonymTable::builtin();
  const EditedCaption a = make_logic_error("consistent with a malignant neoplasm", table, 3);
  CHECK(a.text == "consistent with a benign neoplasm");
  CHECK(a.edit.operation == "antonym-flip");
  const EditedCaption b = make_logic_error("mitoses present", table, 3);
  CHECK(b.text == "mitoses absent");
  CHECK_THROWS_WITH_AS(make_logic_error("cells everywhere", table, 3),
                       doctest::Contains("no-polar-term"), Error);
}

TEST_CASE("sensitivity delta") {
  CHECK(sensitivity_delta({0.77}, {0.46}) == doctest::Approx((0.77 - 0.46) / 0.77));
  CHECK(sensitivity_delta({0.5, 0.7}, {0.5, 0.7}) == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(sensitivity_delta({0.0}, {0.0}), doctest::Contains("zero-control-mean"),
                       Error);
  CHECK_THROWS_AS(sensitivity_delta({0.5}, {0.5, 0.6}), Error);
}

TEST_CASE("spearman hand cases") {
  CHECK(spearman_rho({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman_rho({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(spearman_rho({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
  CHECK_THROWS_WITH_AS(spearman_rho({1, 1, 1}, {1, 2, 3}), doctest::Contains("constant-input"),
                       Error);
  CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), Error);
}

namespace {

// Independent oracle: midranks then Pearson.
double spearman_oracle(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double mid = (double(i) + double(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace

TEST_CASE("spearman random-tie oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.next_below(10);
    std::vector<double> xs(n), ys(n);
    for (auto& v : xs) v = double(rng.next_below(5));
    for (auto& v : ys) v = double(rng.next_below(5));
    const bool const_x = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
    const bool const_y = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
    if (const_x || const_y) {
      CHECK_THROWS_AS(spearman_rho(xs, ys), Error);
      continue;
    }
    CHECK(spearman_rho(xs, ys) == doctest::Approx(spearman_oracle(xs, ys)).epsilon(1e-12));
  }
}

TEST_CASE("run variance") {
  SUBCASE("identical runs: all stds zero") {
    const RunVariance rv = run_variance({{0.5, 0.7}, {0.5, 0.7}, {0.5, 0.7}});
    CHECK(rv.max_std == 0.0);
    CHECK(rv.mean_std == 0.0);
  }
  SUBCASE("definition on a single diverging case") {
    const RunVariance rv = run_variance({{0.5, 0.5}, {0.5, 0.7}});
    CHECK(rv.per_case_std[0] == doctest::Approx(0.0));
    CHECK(rv.per_case_std[1] == doctest::Approx(0.1));  // population std of {0.5, 0.7}
    CHECK(rv.max_std == doctest::Approx(0.1));
  }
  CHECK_THROWS_AS(run_variance({{0.5}, {0.5, 0.6}}), Error);
  CHECK_THROWS_AS(run_variance({}), Error);
}

TEST_CASE("domain gap") {
  const DomainGap g = domain_gap({0.8, 0.802}, {0.74, 0.734});
  CHECK(g.mean_in == doctest::Approx(0.801));
  CHECK(g.mean_out == doctest::Approx(0.737));
  CHECK(g.drop == doctest::Approx(0.064));
  const DomainGap same = domain_gap({0.5}, {0.5});
  CHECK(same.drop == doctest::Approx(0.0));
}

TEST_CASE("aligned tiles actually align") {
  BaselineTextEmbedder text(7, 64);
  BaselineImageEmbedder image(7, 64);
  const EmbeddingVector target = text.embed_text("spindle cells");
  const Image tile = make_aligned_tile(target, image, 32);
  const double aligned = cosine(image.embed_image(tile), target);
  // Unrelated tiles hover near zero cosine in the hashed space.
  CHECK(aligned > 0.35);
  // Determinism.
  const Image again = make_aligned_tile(target, image, 32);
  CHECK(again.pixels == tile.pixels);
}

TEST_CASE("synthetic corpus and perturbed triples") {
  BaselineTextEmbedder text(7, 64);
  BaselineImageEmbedder image(7, 64);
  const SyntheticCorpus corpus = make_synthetic_corpus(6, 11, text, image, 32);
  REQUIRE(corpus.cases.size() == 6);
  for (const auto& c : corpus.cases) {
    CHECK_FALSE(c.caption.empty());
    CHECK(c.image.width > 0);
    CHECK_FALSE(extract_entities(c.caption, corpus.lexicon).empty());
  }
  const auto triples = make_perturbed_triples(corpus, 13);
  REQUIRE(triples.size() == 6);
  for (const auto& t : triples) {
    CHECK(t.control != t.visual_hallucination);
    CHECK(t.control != t.logic_error);
    CHECK(t.edits.size() == 2);
  }
  // Same seeds reproduce the corpus bit for bit.
  const SyntheticCorpus again = make_synthetic_corpus(6, 11, text, image, 32);
  CHECK(again.cases[0].caption == corpus.cases[0].caption);
  CHECK(again.cases[0].image.pixels == corpus.cases[0].image.pixels);
}
