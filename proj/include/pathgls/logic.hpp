#pragma once

#include <string>
#include <vector>

#include "pathgls/lexicon.hpp"
#include "pathgls/providers.hpp"

namespace pathgls {

enum class RelationKind { Supports, LocatedIn, Describes };
const char* to_string(RelationKind kind);

struct GraphNode {
  std::size_t id = 0;
  std::string surface;
  EntityCategory category = EntityCategory::Other;
  std::size_t sentence_index = 0;
};

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  RelationKind relation = RelationKind::Supports;
};

struct KnowledgeGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<std::string> sentences;  // original sentence texts, in order
};

struct PremiseHypothesisPair {
  std::string premise;     // morphology-bearing sentence
  std::string hypothesis;  // diagnosis-bearing sentence
  std::vector<std::size_t> premise_nodes;
  std::vector<std::size_t> hypothesis_nodes;
};

struct ScoredPair {
  PremiseHypothesisPair pair;
  double contradiction = 0.0;
};

struct LogicResult {
  double score = 1.0;   // in [0, 1]
  std::size_t k_used = 0;
  bool vacuous = false;  // no pairs: consistency holds vacuously
  std::vector<ScoredPair> pair_probs;  // in extraction order
};

// Cue phrases marking a diagnosis sentence that should link back to earlier
// morphology statements.
std::vector<std::string> default_cue_words();
std::vector<std::string> load_cue_words(const std::string& path);

// Rule grammar: sentence-split, per-sentence entity nodes, `supports` edges
// for same-sentence morphology->diagnosis or cue-word diagnosis sentences,
// `located_in` edges within a sentence.
KnowledgeGraph parse_knowledge_graph(const std::string& report, const Lexicon& lexicon,
                                     const std::vector<std::string>& cue_words);

// One pair per `supports` edge; diagnoses without incoming support are
// paired with every morphology-bearing sentence. Duplicate (premise,
// hypothesis) strings are emitted once.
std::vector<PremiseHypothesisPair> extract_pairs(const KnowledgeGraph& graph);

// Top-K mean of the highest contradiction probabilities; the score is one
// minus that mean. An empty list scores 1.0 with the vacuous flag.
LogicResult logic_score(const std::vector<double>& probabilities, std::size_t k);

struct LogicOutcome {
  LogicResult result;
  KnowledgeGraph graph;
};

LogicOutcome compute_logic(const std::string& report, const Lexicon& lexicon,
                           const std::vector<std::string>& cue_words, const NliScorer& nli,
                           std::size_t k);

}  // namespace pathgls
