#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathgls/config.hpp"
#include "pathgls/experiments.hpp"
#include "pathgls/fusion.hpp"

namespace pathgls {

// Full evidence record for one case; every artifact embeds the config hash
// and tool version so equal hashes imply byte-identical reruns.
nlohmann::json bundle_to_json(const ScoreBundle& bundle, const std::string& config_hash,
                              const std::string& transcript_hash = "");

struct CaseError {
  std::string case_id;
  std::string code;
  std::string message;
};

struct ScoreRunResult {
  std::vector<ScoreBundle> bundles;  // sorted by case id
  std::vector<CaseError> errors;
  std::string summary_csv;
};

// Scores every manifest case with a bounded worker pool and, when out_dir is
// non-empty, writes <case_id>.json per case, summary.csv, and errors.jsonl.
ScoreRunResult run_score(const RunConfig& config, const std::vector<ManifestEntry>& manifest,
                         const std::string& out_dir, const TranscriptOptions& transcripts = {},
                         bool dump_perturbed = false);

struct CorpusEntry {
  PerturbedTriple triple;
  std::string image_path;
};

// Perturbed-corpus manifest: JSON Lines, one triple (plus image path) per line.
std::vector<CorpusEntry> load_corpus_manifest(const std::string& path);
void save_corpus_manifest(const std::vector<CorpusEntry>& entries, const std::string& path);

struct GroupStats {
  double mean_s_g = 0.0;
  double mean_s_l = 0.0;
};

struct SensitivityReport {
  GroupStats control, visual_hallucination, logic_error;
  double delta_s_g_visual = 0.0;  // relative drops vs control
  double delta_s_g_logic = 0.0;
  double delta_s_l_visual = 0.0;
  double delta_s_l_logic = 0.0;

  nlohmann::json to_json() const;
};

// Static-text protocol: S_g and S_l per caption variant against the case
// image; stability is structurally excluded.
SensitivityReport run_sensitivity(const RunConfig& config, const std::vector<CorpusEntry>& corpus);

// CSV `case_id,severity_rank`.
std::map<std::string, double> load_severity_ranks(const std::string& path);

struct AblationReport {
  double rho_full = 0.0;
  double rho_without_grounding = 0.0;
  double rho_without_logic = 0.0;
  double rho_without_stability = 0.0;
  double drop_grounding = 0.0;  // (rho_full - rho_ablated) / rho_full
  double drop_logic = 0.0;
  double drop_stability = 0.0;

  nlohmann::json to_json() const;
};

AblationReport run_ablate(const RunConfig& config, const std::vector<ManifestEntry>& manifest,
                          const std::map<std::string, double>& severity);

}  // namespace pathgls
