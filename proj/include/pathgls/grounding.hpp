#pragma once

#include <string>
#include <vector>

#include "pathgls/lexicon.hpp"
#include "pathgls/providers.hpp"
#include "pathgls/tessellate.hpp"

namespace pathgls {

// Dense M x N matrix of entity/patch cosines, row-major by entity.
struct SimilarityMatrix {
  std::size_t rows = 0;  // M entities
  std::size_t cols = 0;  // N patches
  std::vector<double> values;

  double at(std::size_t j, std::size_t i) const { return values[j * cols + i]; }
};

SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& text_embeddings,
                                   const std::vector<EmbeddingVector>& patch_embeddings);

struct GroundingEvidence {
  std::string entity_surface;
  EntityCategory category = EntityCategory::Other;
  std::size_t best_patch_index = 0;
  int best_patch_x = 0;
  int best_patch_y = 0;
  double raw_cosine = 0.0;  // in [-1, 1]
};

struct GroundingResult {
  double score = 0.0;       // remapped to [0, 1]
  double raw_score = 0.0;   // mean of per-entity max cosines, in [-1, 1]
  bool ungroundable = false;
  std::vector<GroundingEvidence> evidence;  // one per entity
};

// Per-entity spatial argmax (ties -> lowest patch index), mean over entities,
// then remap (c + 1) / 2. Requires M >= 1 and N >= 1.
GroundingResult grounding_score(const SimilarityMatrix& sim);

// Full grounding stage: extract entities, embed entities and patches, score.
// An entity-free report yields score 0.5 with the ungroundable flag set.
GroundingResult compute_grounding(const std::string& report, const Lexicon& lexicon,
                                  const TextEmbedder& text_embedder,
                                  const ImageEmbedder& image_embedder, const PatchBag& bag);

}  // namespace pathgls
