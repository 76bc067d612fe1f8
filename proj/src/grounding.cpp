#include "pathgls/grounding.hpp"

#include "pathgls/error.hpp"

namespace pathgls {

SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& text_embeddings,
                                   const std::vector<EmbeddingVector>& patch_embeddings) {
  SimilarityMatrix sim;
  sim.rows = text_embeddings.size();
  sim.cols = patch_embeddings.size();
  sim.values.resize(sim.rows * sim.cols);
  for (std::size_t j = 0; j < sim.rows; ++j) {
    for (std::size_t i = 0; i < sim.cols; ++i) {
      sim.values[j * sim.cols + i] = cosine(text_embeddings[j], patch_embeddings[i]);
    }
  }
  return sim;
}

GroundingResult grounding_score(const SimilarityMatrix& sim) {
  require(sim.rows >= 1, "empty-entities", "grounding needs at least one entity");
  require(sim.cols >= 1, "empty-patches", "grounding needs at least one patch");

  GroundingResult result;
  result.evidence.resize(sim.rows);
  double sum = 0.0;
  // Fixed entity order, fixed patch scan order: bitwise stable accumulation.
  for (std::size_t j = 0; j < sim.rows; ++j) {
    std::size_t best = 0;
    double best_value = sim.at(j, 0);
    for (std::size_t i = 1; i < sim.cols; ++i) {
      if (sim.at(j, i) > best_value) {  // ties keep the lowest index
        best_value = sim.at(j, i);
        best = i;
      }
    }
    result.evidence[j].best_patch_index = best;
    result.evidence[j].raw_cosine = best_value;
    sum += best_value;
  }
  result.raw_score = sum / static_cast<double>(sim.rows);
  result.score = (result.raw_score + 1.0) / 2.0;
  return result;
}

GroundingResult compute_grounding(const std::string& report, const Lexicon& lexicon,
                                  const TextEmbedder& text_embedder,
                                  const ImageEmbedder& image_embedder, const PatchBag& bag) {
  require(bag.size() >= 1, "empty-patches", "patch bag is empty");
  const ClinicalEntityList entities = extract_entities(report, lexicon);
  if (entities.empty()) {
    // An empty report must not look perfectly grounded: uninformative
    // midpoint plus an audit flag.
    GroundingResult result;
    result.score = 0.5;
    result.raw_score = 0.0;
    result.ungroundable = true;
    return result;
  }

  std::vector<EmbeddingVector> text_embs;
  text_embs.reserve(entities.size());
  for (const auto& e : entities) text_embs.push_back(text_embedder.embed_text(e.surface));
  std::vector<EmbeddingVector> patch_embs;
  patch_embs.reserve(bag.size());
  for (const auto& p : bag.patches) patch_embs.push_back(image_embedder.embed_image(p.tile));

  GroundingResult result = grounding_score(similarity_matrix(text_embs, patch_embs));
  for (std::size_t j = 0; j < entities.size(); ++j) {
    auto& ev = result.evidence[j];
    ev.entity_surface = entities[j].surface;
    ev.category = entities[j].category;
    const Patch& p = bag.patches[ev.best_patch_index];
    ev.best_patch_x = p.x;
    ev.best_patch_y = p.y;
  }
  return result;
}

}  // namespace pathgls
