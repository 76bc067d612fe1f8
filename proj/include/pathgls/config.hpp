#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathgls/fusion.hpp"
#include "pathgls/providers.hpp"

namespace pathgls {

inline constexpr const char* kToolVersion = "pathgls 0.1.0";

enum class ProviderMode { Baseline, Remote, Transcript };

struct ProviderSpec {
  ProviderMode mode = ProviderMode::Baseline;
  std::uint64_t seed = 7;
};

struct EndpointSpec {
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_inflight = 8;
};

// The validated run configuration. JSON is the normative schema; unknown
// keys are rejected on load and a hash of the canonical form is embedded in
// every output record.
struct RunConfig {
  std::size_t dim = 64;
  ProviderSpec text, image, nli, subject;
  std::optional<EndpointSpec> endpoint;      // required when any mode is remote
  std::optional<std::string> transcript;     // required when any mode is transcript

  Weights weights;
  RoutingThresholds thresholds;
  int patch_size = 512;
  int stride = 224;
  std::size_t top_k = 3;
  PerturbationSpec perturbation{0.05, 0.01, 1};
  double saturation_threshold = 0.05;
  double min_tissue_fraction = 0.25;

  std::string lexicon_path;                   // required
  std::optional<std::string> cue_words_path;
  std::optional<std::string> antonyms_path;
  std::optional<std::string> attack_templates_path;
  std::string base_prompt = "Describe the histopathological findings and give a diagnosis.";
  bool stability_enabled = true;
  int workers = 0;  // 0 = hardware concurrency

  std::string config_hash;  // sha256 of the canonical JSON form

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text, const std::string& base_dir);
};

struct BuiltProviders {
  ProviderSet set;
  std::shared_ptr<TranscriptStore> replay;   // non-null when replaying
  std::shared_ptr<TranscriptStore> record;   // non-null when recording
};

struct TranscriptOptions {
  std::optional<std::string> replay_path;  // overrides configured modes
  std::optional<std::string> record_path;  // wrap providers, save on completion
};

BuiltProviders build_providers(const RunConfig& config, const TranscriptOptions& options = {});

// Loads lexicon/cue/antonym/template files and assembles the pipeline context.
PipelineContext make_pipeline_context(const RunConfig& config, ProviderSet providers);

struct ManifestEntry {
  std::string case_id;
  std::string image_path;
  std::optional<std::string> report;
  std::optional<std::string> cohort;
};

// JSON Lines, one entry per case; ids must be unique and images must exist.
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace pathgls
