#pragma once

#include <string>
#include <vector>

#include "pathgls/image.hpp"
#include "pathgls/providers.hpp"
#include "pathgls/stain.hpp"

namespace pathgls {

struct AttackPrompt {
  std::string base_prompt;
  std::string false_history;
  std::string rendered;
};

struct StabilityResult {
  double score = 0.0;        // in [0, 1]
  double delta_aug = 0.0;    // semantic distance to the stain-perturbed report
  double delta_attack = 0.0; // semantic distance to the adversarial-prompt report
  std::string report_orig;
  std::string report_aug;
  std::string report_attack;
  std::string false_history;
};

std::vector<std::string> default_attack_histories();
std::vector<std::string> load_attack_histories(const std::string& path);

// Stable per-case template selection: index = hash(case_id) % templates.
const std::string& select_attack_history(const std::vector<std::string>& histories,
                                         const std::string& case_id);

AttackPrompt build_attack_prompt(const std::string& base_prompt, const std::string& false_history);

// Normalized cosine distance over the text-embedding provider:
// (1 - cos) / 2, clamped to [0, 1]. Symmetric and bounded.
double semantic_distance(const std::string& a, const std::string& b,
                         const TextEmbedder& embedder);

double stability_score(double delta_aug, double delta_attack);

StabilityResult evaluate_stability(const Image& image, const std::string& base_prompt,
                                   const std::string& case_id, const SubjectModel& subject,
                                   const TextEmbedder& embedder, const PerturbationSpec& spec,
                                   const std::vector<std::string>& attack_histories);

}  // namespace pathgls
