#include "pathgls/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "pathgls/error.hpp"
#include "pathgls/rng.hpp"
#include "pathgls/text.hpp"

namespace pathgls {

EditedCaption make_visual_hallucination(const std::string& caption, const Lexicon& lexicon,
                                        const Lexicon& entity_pool, std::uint64_t seed) {
  const ClinicalEntityList entities = extract_entities(caption, lexicon);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (!entity_pool.terms_of(entities[i].category).empty()) candidates.push_back(i);
  }
  require(!candidates.empty(), "no-entity-to-replace",
          "caption has no lexicon entity with a same-category pool replacement");

  Rng rng(seed);
  const ClinicalEntity& target = entities[candidates[rng.next_below(candidates.size())]];
  const auto pool = entity_pool.terms_of(target.category);
  const std::string& replacement = pool[rng.next_below(pool.size())].term;

  EditedCaption out;
  out.text = caption.substr(0, target.begin) + replacement + caption.substr(target.end);
  out.edit = {"entity-swap", target.begin, target.end, target.surface, replacement};
  return out;
}

EditedCaption make_logic_error(const std::string& caption, const AntonymTable& antonyms,
                               std::uint64_t seed) {
  // All word-boundary occurrences of antonym-table terms, in text order.
  struct Occurrence {
    std::size_t begin, end;
    std::string replacement;
  };
  std::vector<Occurrence> occurrences;
  std::size_t pos = 0;
  while (pos < caption.size()) {
    if (!std::isalpha(static_cast<unsigned char>(caption[pos]))) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    std::string word;
    while (end < caption.size() && std::isalpha(static_cast<unsigned char>(caption[end]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(caption[end]))));
      ++end;
    }
    if (auto antonym = antonyms.antonym_of(word)) {
      occurrences.push_back({pos, end, *antonym});
    }
    pos = end;
  }
  require(!occurrences.empty(), "no-polar-term", "caption contains no antonym-table term");

  Rng rng(seed);
  const Occurrence& target = occurrences[rng.next_below(occurrences.size())];
  EditedCaption out;
  out.text = caption.substr(0, target.begin) + target.replacement + caption.substr(target.end);
  out.edit = {"antonym-flip", target.begin, target.end,
              caption.substr(target.begin, target.end - target.begin), target.replacement};
  return out;
}

namespace {
double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}
}  // namespace

double sensitivity_delta(const std::vector<double>& control_scores,
                         const std::vector<double>& perturbed_scores) {
  require(!control_scores.empty() && !perturbed_scores.empty(), "empty-input",
          "sensitivity delta needs non-empty score lists");
  require(control_scores.size() == perturbed_scores.size(), "length-mismatch",
          "control and perturbed lists cover different case counts");
  const double control_mean = mean(control_scores);
  require(control_mean > 0.0, "zero-control-mean", "control mean must be positive");
  return (control_mean - mean(perturbed_scores)) / control_mean;
}

namespace {

// Average-rank (midrank) treatment of ties, 1-based.
std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), "length-mismatch", "input lists differ in length");
  require(xs.size() >= 2, "length-mismatch", "need at least two observations");

  const std::vector<double> rx = midranks(xs);
  const std::vector<double> ry = midranks(ys);
  const double mx = mean(rx);
  const double my = mean(ry);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  require(dx > 0.0 && dy > 0.0, "constant-input",
          "Spearman correlation is undefined for constant input");
  return num / std::sqrt(dx * dy);
}

RunVariance run_variance(const std::vector<std::vector<double>>& score_runs) {
  require(score_runs.size() >= 2, "empty-input", "need at least two runs");
  const std::size_t cases = score_runs.front().size();
  require(cases >= 1, "empty-input", "runs cover no cases");
  for (const auto& run : score_runs) {
    require(run.size() == cases, "length-mismatch", "runs cover different case counts");
  }

  RunVariance out;
  out.per_case_std.reserve(cases);
  for (std::size_t c = 0; c < cases; ++c) {
    // Identical values must report exactly 0.00, not rounding residue.
    bool all_equal = true;
    for (const auto& run : score_runs) all_equal &= run[c] == score_runs.front()[c];
    if (all_equal) {
      out.per_case_std.push_back(0.0);
      continue;
    }
    double m = 0.0;
    for (const auto& run : score_runs) m += run[c];
    m /= static_cast<double>(score_runs.size());
    double var = 0.0;
    for (const auto& run : score_runs) var += (run[c] - m) * (run[c] - m);
    var /= static_cast<double>(score_runs.size());
    out.per_case_std.push_back(std::sqrt(var));
  }
  out.max_std = *std::max_element(out.per_case_std.begin(), out.per_case_std.end());
  out.mean_std = mean(out.per_case_std);
  return out;
}

DomainGap domain_gap(const std::vector<double>& totals_in, const std::vector<double>& totals_out) {
  require(!totals_in.empty() && !totals_out.empty(), "empty-input",
          "domain gap needs non-empty cohorts");
  DomainGap gap;
  gap.mean_in = mean(totals_in);
  gap.mean_out = mean(totals_out);
  gap.drop = gap.mean_in - gap.mean_out;
  return gap;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

namespace {

Image tile_from_blocks(const double (&blocks)[16], int tile_size) {
  Image tile;
  tile.width = tile_size;
  tile.height = tile_size;
  tile.pixels.resize(static_cast<std::size_t>(tile_size) * tile_size * 3);
  for (int y = 0; y < tile_size; ++y) {
    const int gy = std::min(3, y * 4 / tile_size);
    for (int x = 0; x < tile_size; ++x) {
      const int gx = std::min(3, x * 4 / tile_size);
      const auto v = static_cast<std::uint8_t>(
          std::llround(std::clamp(blocks[4 * gy + gx], 0.0, 1.0) * 255.0));
      std::uint8_t* p = tile.px(x, y);
      p[0] = p[1] = p[2] = v;
    }
  }
  return tile;
}

}  // namespace

Image make_aligned_tile(const EmbeddingVector& target, const BaselineImageEmbedder& embedder,
                        int tile_size) {
  require(tile_size >= 4, "invalid-stride", "aligned tiles need at least 4x4 pixels");

  // Initialize each gray block from the target component its luminance
  // feature hashes into, then coordinate-ascend on the actual cosine.
  double maxabs = 1e-12;
  for (double v : target.values) maxabs = std::max(maxabs, std::fabs(v));
  double blocks[16];
  for (std::size_t i = 0; i < 16; ++i) {
    const auto [slot, sign] = embedder.feature_slot(6 + i);
    blocks[i] = std::clamp(0.5 + 0.5 * sign * target.values[slot] / maxabs, 0.0, 1.0);
  }

  const auto score = [&](const double (&b)[16]) {
    return cosine(embedder.embed_image(tile_from_blocks(b, tile_size)), target);
  };
  double best = score(blocks);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t i = 0; i < 16; ++i) {
      const double saved = blocks[i];
      double best_level = saved;
      for (int level = 0; level <= 8; ++level) {
        blocks[i] = level / 8.0;
        const double s = score(blocks);
        if (s > best) {
          best = s;
          best_level = blocks[i];
        }
      }
      blocks[i] = best_level;
    }
  }
  return tile_from_blocks(blocks, tile_size);
}

SyntheticCorpus make_synthetic_corpus(std::size_t case_count, std::uint64_t seed,
                                      const BaselineTextEmbedder& text_embedder,
                                      const BaselineImageEmbedder& image_embedder,
                                      int tile_size) {
  // Polar adjectives stay out of the lexicon so an antonym flip never
  // changes the extracted entity set.
  const std::vector<std::string> morphologies = {"spindle cells",  "epithelioid cells",
                                                 "plasma cells",   "clear cells",
                                                 "columnar cells", "giant cells"};
  const std::vector<std::string> diagnoses = {"lymphoma", "melanoma",     "adenocarcinoma",
                                              "sarcoma",  "mesothelioma", "seminoma"};

  SyntheticCorpus corpus;
  {
    std::vector<LexiconTerm> terms;
    for (const auto& m : morphologies) terms.push_back({m, EntityCategory::Morphology});
    for (const auto& d : diagnoses) terms.push_back({d, EntityCategory::Diagnosis});
    corpus.lexicon = Lexicon(std::move(terms));
  }
  {
    std::vector<LexiconTerm> pool;
    pool.push_back({"signet ring cells", EntityCategory::Morphology});
    pool.push_back({"basaloid cells", EntityCategory::Morphology});
    pool.push_back({"rhabdoid cells", EntityCategory::Morphology});
    pool.push_back({"thymoma", EntityCategory::Diagnosis});
    pool.push_back({"meningioma", EntityCategory::Diagnosis});
    pool.push_back({"chordoma", EntityCategory::Diagnosis});
    corpus.entity_pool = Lexicon(std::move(pool));
  }
  corpus.antonyms.add("malignant", "benign");

  Rng rng(seed);
  for (std::size_t i = 0; i < case_count; ++i) {
    SyntheticCase c;
    char id[32];
    std::snprintf(id, sizeof(id), "case_%03zu", i);
    c.case_id = id;

    const std::string& morph = morphologies[rng.next_below(morphologies.size())];
    const std::string& diag = diagnoses[rng.next_below(diagnoses.size())];
    c.caption = "Sheets of " + morph + " with malignant features are seen. " +
                "Appearances are consistent with malignant " + diag + ".";

    // One tile per entity, aligned with that entity's text embedding.
    const Image tile_m =
        make_aligned_tile(text_embedder.embed_text(morph), image_embedder, tile_size);
    const Image tile_d =
        make_aligned_tile(text_embedder.embed_text(diag), image_embedder, tile_size);
    c.image.width = tile_size * 2;
    c.image.height = tile_size;
    c.image.pixels.resize(static_cast<std::size_t>(c.image.width) * c.image.height * 3);
    for (int y = 0; y < tile_size; ++y) {
      std::copy(tile_m.px(0, y), tile_m.px(0, y) + 3 * tile_size, c.image.px(0, y));
      std::copy(tile_d.px(0, y), tile_d.px(0, y) + 3 * tile_size, c.image.px(tile_size, y));
    }
    corpus.cases.push_back(std::move(c));
  }
  return corpus;
}

std::vector<PerturbedTriple> make_perturbed_triples(const SyntheticCorpus& corpus,
                                                    std::uint64_t seed) {
  std::vector<PerturbedTriple> triples;
  triples.reserve(corpus.cases.size());
  for (std::size_t i = 0; i < corpus.cases.size(); ++i) {
    const auto& c = corpus.cases[i];
    PerturbedTriple triple;
    triple.case_id = c.case_id;
    triple.control = c.caption;
    EditedCaption visual =
        make_visual_hallucination(c.caption, corpus.lexicon, corpus.entity_pool, seed ^ (2 * i));
    EditedCaption logic = make_logic_error(c.caption, corpus.antonyms, seed ^ (2 * i + 1));
    triple.visual_hallucination = visual.text;
    triple.logic_error = logic.text;
    triple.edits = {visual.edit, logic.edit};
    triples.push_back(std::move(triple));
  }
  return triples;
}

}  // namespace pathgls
