#include "pathgls/logic.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "pathgls/error.hpp"
#include "pathgls/text.hpp"

namespace pathgls {

const char* to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::Supports: return "supports";
    case RelationKind::LocatedIn: return "located_in";
    case RelationKind::Describes: return "describes";
  }
  return "supports";
}

std::vector<std::string> default_cue_words() {
  return {"consistent with", "diagnostic of", "indicating", "suggestive of"};
}

std::vector<std::string> load_cue_words(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "file-missing", "cannot open cue-word file " + path);
  std::vector<std::string> cues;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    cues.push_back(normalize_text(line));
  }
  require(!cues.empty(), "cues-invalid", "cue-word file is empty: " + path);
  return cues;
}

namespace {

bool contains_cue(const std::string& sentence, const std::vector<std::string>& cues) {
  const std::string norm = normalize_text(sentence);
  for (const auto& cue : cues) {
    if (norm.find(cue) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

KnowledgeGraph parse_knowledge_graph(const std::string& report, const Lexicon& lexicon,
                                     const std::vector<std::string>& cue_words) {
  KnowledgeGraph graph;
  const auto sentences = split_sentences(report);
  graph.sentences.reserve(sentences.size());
  for (const auto& s : sentences) graph.sentences.push_back(s.text);

  // One node per entity occurrence, ids in text order.
  std::vector<std::vector<std::size_t>> per_sentence(sentences.size());
  for (const auto& s : sentences) {
    for (const auto& e : extract_entities(s.text, lexicon)) {
      per_sentence[s.index].push_back(graph.nodes.size());
      graph.nodes.push_back({graph.nodes.size(), e.surface, e.category, s.index});
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> support_edges;
  auto add_support = [&](std::size_t from, std::size_t to) {
    if (support_edges.insert({from, to}).second) {
      graph.edges.push_back({from, to, RelationKind::Supports});
    }
  };

  for (std::size_t si = 0; si < sentences.size(); ++si) {
    // Same-sentence morphology -> diagnosis.
    for (std::size_t m : per_sentence[si]) {
      if (graph.nodes[m].category != EntityCategory::Morphology) continue;
      for (std::size_t d : per_sentence[si]) {
        if (graph.nodes[d].category == EntityCategory::Diagnosis) add_support(m, d);
      }
    }
    // Cue-word diagnosis sentence links back to earlier morphology nodes.
    if (contains_cue(sentences[si].text, cue_words)) {
      for (std::size_t d : per_sentence[si]) {
        if (graph.nodes[d].category != EntityCategory::Diagnosis) continue;
        for (std::size_t pi = 0; pi < si; ++pi) {
          for (std::size_t m : per_sentence[pi]) {
            if (graph.nodes[m].category == EntityCategory::Morphology) add_support(m, d);
          }
        }
      }
    }
    // Same-sentence located_in edges.
    for (std::size_t e : per_sentence[si]) {
      if (graph.nodes[e].category == EntityCategory::Location) continue;
      for (std::size_t l : per_sentence[si]) {
        if (graph.nodes[l].category == EntityCategory::Location) {
          graph.edges.push_back({e, l, RelationKind::LocatedIn});
        }
      }
    }
  }
  return graph;
}

std::vector<PremiseHypothesisPair> extract_pairs(const KnowledgeGraph& graph) {
  std::vector<PremiseHypothesisPair> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  auto emit = [&](const std::string& premise, const std::string& hypothesis,
                  std::vector<std::size_t> pn, std::vector<std::size_t> hn) {
    if (premise.empty() || hypothesis.empty()) return;
    if (!seen.insert({premise, hypothesis}).second) return;
    pairs.push_back({premise, hypothesis, std::move(pn), std::move(hn)});
  };

  std::set<std::size_t> supported_diagnoses;
  for (const auto& edge : graph.edges) {
    if (edge.relation != RelationKind::Supports) continue;
    supported_diagnoses.insert(edge.to);
    emit(graph.sentences[graph.nodes[edge.from].sentence_index],
         graph.sentences[graph.nodes[edge.to].sentence_index], {edge.from}, {edge.to});
  }

  // Unsupported diagnoses are still testable: pair them with every
  // morphology-bearing sentence.
  std::vector<std::size_t> morphology_sentences;
  std::vector<std::vector<std::size_t>> morphology_nodes(graph.sentences.size());
  for (const auto& node : graph.nodes) {
    if (node.category == EntityCategory::Morphology) {
      if (morphology_nodes[node.sentence_index].empty()) {
        morphology_sentences.push_back(node.sentence_index);
      }
      morphology_nodes[node.sentence_index].push_back(node.id);
    }
  }
  for (const auto& node : graph.nodes) {
    if (node.category != EntityCategory::Diagnosis) continue;
    if (supported_diagnoses.count(node.id)) continue;
    for (std::size_t si : morphology_sentences) {
      emit(graph.sentences[si], graph.sentences[node.sentence_index], morphology_nodes[si],
           {node.id});
    }
  }
  return pairs;
}

LogicResult logic_score(const std::vector<double>& probabilities, std::size_t k) {
  require(k >= 1, "invalid-K", "K must be a positive integer");
  for (double p : probabilities) {
    require(p >= 0.0 && p <= 1.0, "nli-invalid", "contradiction probability out of [0,1]");
  }

  LogicResult result;
  if (probabilities.empty()) {
    result.score = 1.0;
    result.k_used = 0;
    result.vacuous = true;
    return result;
  }
  std::vector<double> sorted = probabilities;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  result.k_used = std::min(k, sorted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < result.k_used; ++i) sum += sorted[i];
  result.score = 1.0 - sum / static_cast<double>(result.k_used);
  return result;
}

LogicOutcome compute_logic(const std::string& report, const Lexicon& lexicon,
                           const std::vector<std::string>& cue_words, const NliScorer& nli,
                           std::size_t k) {
  LogicOutcome outcome;
  outcome.graph = parse_knowledge_graph(report, lexicon, cue_words);
  const auto pairs = extract_pairs(outcome.graph);

  std::vector<double> probs;
  probs.reserve(pairs.size());
  for (const auto& pair : pairs) {
    probs.push_back(nli.contradiction(pair.premise, pair.hypothesis));
  }
  outcome.result = logic_score(probs, k);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    outcome.result.pair_probs.push_back({pairs[i], probs[i]});
  }
  return outcome;
}

}  // namespace pathgls
