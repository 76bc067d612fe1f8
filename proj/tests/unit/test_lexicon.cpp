#include <doctest.h>

#include "pathgls/error.hpp"
#include "pathgls/lexicon.hpp"

using namespace pathgls;

namespace {

Lexicon tiny() {
  return Lexicon({{"atypical cells", EntityCategory::Morphology},
                  {"lymphoma", EntityCategory::Diagnosis},
                  {"lymph node", EntityCategory::Location},
                  {"cells", EntityCategory::Morphology},
                  {"large cells", EntityCategory::Morphology}});
}

}  // namespace

TEST_CASE("category round-trip") {
  CHECK(category_from_string("morphology") == EntityCategory::Morphology);
  CHECK(std::string(to_string(EntityCategory::Diagnosis)) == "diagnosis");
  CHECK_THROWS_AS(category_from_string("bogus"), Error);
}

TEST_CASE("extraction in text order") {
  const auto entities = extract_entities("Sheets of atypical cells consistent with lymphoma.", tiny());
  REQUIRE(entities.size() == 2);
  CHECK(entities[0].surface == "atypical cells");
  CHECK(entities[0].category == EntityCategory::Morphology);
  CHECK(entities[1].surface == "lymphoma");
  CHECK(entities[1].category == EntityCategory::Diagnosis);
  CHECK(entities[0].begin < entities[1].begin);
}

TEST_CASE("no terms means empty list") {
  CHECK(extract_entities("Unremarkable tissue.", tiny()).empty());
  CHECK(extract_entities("", tiny()).empty());
}

TEST_CASE("longest match wins") {
  const auto entities = extract_entities("large cells are seen", tiny());
  REQUIRE(entities.size() == 1);
  CHECK(entities[0].surface == "large cells");
}

TEST_CASE("matching is case-insensitive and keeps original casing") {
  const auto entities = extract_entities("LYMPHOMA suspected", tiny());
  REQUIRE(entities.size() == 1);
  CHECK(entities[0].surface == "LYMPHOMA");
}

TEST_CASE("word boundaries are respected") {
  // "cells" inside "cellsx" must not match.
  CHECK(extract_entities("acellsx blob", tiny()).empty());
  const auto entities = extract_entities("cells, present", tiny());
  REQUIRE(entities.size() == 1);
  CHECK(entities[0].surface == "cells");
}

TEST_CASE("each occurrence counts") {
  const auto entities = extract_entities("cells here and cells there", tiny());
  CHECK(entities.size() == 2);
}

TEST_CASE("lexicon load validates") {
  CHECK_THROWS_AS(Lexicon::load("/nonexistent/lexicon.tsv"), Error);
  const Lexicon fromRepo = Lexicon::load(std::string(PATHGLS_SOURCE_DIR) + "/data/lexicon.tsv");
  CHECK_FALSE(fromRepo.empty());
  CHECK_FALSE(fromRepo.terms_of(EntityCategory::Diagnosis).empty());
  CHECK_FALSE(fromRepo.terms_of(EntityCategory::Morphology).empty());
}
