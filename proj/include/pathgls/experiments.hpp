#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathgls/fusion.hpp"
#include "pathgls/image.hpp"
#include "pathgls/lexicon.hpp"
#include "pathgls/providers.hpp"

namespace pathgls {

struct CaptionEdit {
  std::string operation;  // "entity-swap" or "antonym-flip"
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string original;
  std::string replacement;
};

// Control plus the two perturbed variants of one source caption.
struct PerturbedTriple {
  std::string case_id;
  std::string control;
  std::string visual_hallucination;
  std::string logic_error;
  std::vector<CaptionEdit> edits;
};

struct EditedCaption {
  std::string text;
  CaptionEdit edit;
};

// Replaces one seeded-random lexicon entity with a same-category pool term.
EditedCaption make_visual_hallucination(const std::string& caption, const Lexicon& lexicon,
                                        const Lexicon& entity_pool, std::uint64_t seed);

// Flips one seeded-random polar term to its antonym.
EditedCaption make_logic_error(const std::string& caption, const AntonymTable& antonyms,
                               std::uint64_t seed);

// Relative drop (control - perturbed) / control.
double sensitivity_delta(const std::vector<double>& control_scores,
                         const std::vector<double>& perturbed_scores);

// Midrank-tied Spearman correlation (Pearson over rank vectors).
// Constant input is signaled as an error, never returned as NaN.
double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

struct RunVariance {
  std::vector<double> per_case_std;  // population standard deviation
  double max_std = 0.0;
  double mean_std = 0.0;
};

// score_runs[r][c] is case c's score in run r; all runs must cover the same cases.
RunVariance run_variance(const std::vector<std::vector<double>>& score_runs);

struct DomainGap {
  double mean_in = 0.0;
  double mean_out = 0.0;
  double drop = 0.0;
};

DomainGap domain_gap(const std::vector<double>& totals_in, const std::vector<double>& totals_out);

// ---------------------------------------------------------------------------
// Synthetic corpus: caption + image pairs whose tiles are constructed to
// align with the caption's entities under the baseline embedders, so the
// sensitivity protocol has measurable grounding signal without neural
// backbones.
// ---------------------------------------------------------------------------

struct SyntheticCase {
  std::string case_id;
  std::string caption;
  Image image;
};

struct SyntheticCorpus {
  Lexicon lexicon;      // terms used by the captions
  Lexicon entity_pool;  // same-category replacements, disjoint from captions
  AntonymTable antonyms;
  std::vector<SyntheticCase> cases;
};

// Builds a tile whose baseline image embedding points toward the given text
// embedding: gray 4x4 blocks chosen by coordinate ascent on the cosine.
Image make_aligned_tile(const EmbeddingVector& target, const BaselineImageEmbedder& embedder,
                        int tile_size);

SyntheticCorpus make_synthetic_corpus(std::size_t case_count, std::uint64_t seed,
                                      const BaselineTextEmbedder& text_embedder,
                                      const BaselineImageEmbedder& image_embedder, int tile_size);

// Applies both generators to every caption of the corpus.
std::vector<PerturbedTriple> make_perturbed_triples(const SyntheticCorpus& corpus,
                                                    std::uint64_t seed);

}  // namespace pathgls
