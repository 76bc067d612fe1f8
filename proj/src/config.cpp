#include "pathgls/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathgls/error.hpp"
#include "pathgls/hash.hpp"

namespace pathgls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    require(known.count(key) > 0, "config-invalid", "unknown key '" + key + "' in " + where);
  }
}

ProviderMode mode_from_string(const std::string& name) {
  if (name == "baseline") return ProviderMode::Baseline;
  if (name == "remote") return ProviderMode::Remote;
  if (name == "transcript") return ProviderMode::Transcript;
  fail("config-invalid", "unknown provider mode '" + name + "'");
}

ProviderSpec parse_provider_spec(const json& object, const ProviderSpec& defaults,
                                 const std::string& where) {
  reject_unknown_keys(object, {"mode", "seed"}, where);
  ProviderSpec spec = defaults;
  if (object.contains("mode")) spec.mode = mode_from_string(object["mode"].get<std::string>());
  if (object.contains("seed")) spec.seed = object["seed"].get<std::uint64_t>();
  return spec;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config-invalid", "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), fs::path(path).parent_path().string());
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& base_dir) {
  json root = json::parse(text, nullptr, false);
  require(!root.is_discarded() && root.is_object(), "config-invalid", "config is not a JSON object");
  reject_unknown_keys(root,
                      {"providers", "weights", "thresholds", "patch_size", "stride", "top_k",
                       "perturbation", "background", "lexicon", "cue_words", "antonyms",
                       "attack_templates", "base_prompt", "stability", "workers"},
                      "config");

  RunConfig config;

  if (root.contains("providers")) {
    const json& p = root["providers"];
    reject_unknown_keys(
        p, {"dim", "default", "text", "image", "nli", "subject", "endpoint", "transcript"},
        "providers");
    if (p.contains("dim")) config.dim = p["dim"].get<std::size_t>();
    ProviderSpec defaults;
    if (p.contains("default")) {
      defaults = parse_provider_spec(p["default"], defaults, "providers.default");
    }
    config.text = config.image = config.nli = config.subject = defaults;
    if (p.contains("text")) config.text = parse_provider_spec(p["text"], defaults, "providers.text");
    if (p.contains("image")) {
      config.image = parse_provider_spec(p["image"], defaults, "providers.image");
    }
    if (p.contains("nli")) config.nli = parse_provider_spec(p["nli"], defaults, "providers.nli");
    if (p.contains("subject")) {
      config.subject = parse_provider_spec(p["subject"], defaults, "providers.subject");
    }
    if (p.contains("endpoint")) {
      const json& e = p["endpoint"];
      reject_unknown_keys(e, {"host", "port", "max_inflight"}, "providers.endpoint");
      EndpointSpec endpoint;
      if (e.contains("host")) endpoint.host = e["host"].get<std::string>();
      if (e.contains("port")) endpoint.port = e["port"].get<int>();
      if (e.contains("max_inflight")) endpoint.max_inflight = e["max_inflight"].get<int>();
      config.endpoint = endpoint;
    }
    if (p.contains("transcript")) {
      config.transcript = resolve(base_dir, p["transcript"].get<std::string>());
    }
  }

  if (root.contains("weights")) {
    const json& w = root["weights"];
    reject_unknown_keys(w, {"grounding", "logic", "stability"}, "weights");
    config.weights.grounding = w.value("grounding", 0.4);
    config.weights.logic = w.value("logic", 0.3);
    config.weights.stability = w.value("stability", 0.3);
  }
  config.weights.validate();

  if (root.contains("thresholds")) {
    const json& t = root["thresholds"];
    reject_unknown_keys(t, {"deploy_min", "reject_max"}, "thresholds");
    config.thresholds.deploy_min = t.value("deploy_min", 0.7);
    config.thresholds.reject_max = t.value("reject_max", 0.4);
  }
  config.thresholds.validate();

  config.patch_size = root.value("patch_size", 512);
  config.stride = root.value("stride", 224);
  require(config.patch_size >= 1 && config.stride >= 1, "config-invalid",
          "patch_size and stride must be positive");
  config.top_k = root.value("top_k", std::size_t{3});
  require(config.top_k >= 1, "config-invalid", "top_k must be >= 1");

  if (root.contains("perturbation")) {
    const json& p = root["perturbation"];
    reject_unknown_keys(p, {"alpha_sigma", "beta_sigma", "seed"}, "perturbation");
    config.perturbation.alpha_sigma = p.value("alpha_sigma", 0.05);
    config.perturbation.beta_sigma = p.value("beta_sigma", 0.01);
    config.perturbation.seed = p.value("seed", std::uint64_t{1});
    require(config.perturbation.alpha_sigma >= 0.0 && config.perturbation.beta_sigma >= 0.0,
            "config-invalid", "perturbation sigmas must be non-negative");
  }

  if (root.contains("background")) {
    const json& b = root["background"];
    reject_unknown_keys(b, {"saturation_threshold", "min_tissue_fraction"}, "background");
    config.saturation_threshold = b.value("saturation_threshold", 0.05);
    config.min_tissue_fraction = b.value("min_tissue_fraction", 0.25);
  }

  require(root.contains("lexicon"), "config-invalid", "config requires a 'lexicon' path");
  config.lexicon_path = resolve(base_dir, root["lexicon"].get<std::string>());
  if (root.contains("cue_words")) {
    config.cue_words_path = resolve(base_dir, root["cue_words"].get<std::string>());
  }
  if (root.contains("antonyms")) {
    config.antonyms_path = resolve(base_dir, root["antonyms"].get<std::string>());
  }
  if (root.contains("attack_templates")) {
    config.attack_templates_path = resolve(base_dir, root["attack_templates"].get<std::string>());
  }
  config.base_prompt = root.value("base_prompt", config.base_prompt);
  require(!config.base_prompt.empty(), "config-invalid", "base_prompt must be non-empty");

  const std::string stability = root.value("stability", "on");
  require(stability == "on" || stability == "skip", "config-invalid",
          "stability must be 'on' or 'skip'");
  config.stability_enabled = stability == "on";
  config.workers = root.value("workers", 0);
  require(config.workers >= 0, "config-invalid", "workers must be >= 0");

  // Canonical hash over the parsed (defaulted, path-resolved) form.
  config.config_hash = sha256_hex(root.dump());
  return config;
}

namespace {

std::shared_ptr<TranscriptStore> load_store(const std::string& path) {
  return std::make_shared<TranscriptStore>(TranscriptStore::load(path));
}

}  // namespace

BuiltProviders build_providers(const RunConfig& config, const TranscriptOptions& options) {
  BuiltProviders built;

  std::shared_ptr<RemoteEndpoint> endpoint;
  auto remote_endpoint = [&]() {
    require(config.endpoint.has_value(), "config-invalid",
            "a provider is in remote mode but providers.endpoint is missing");
    if (!endpoint) {
      endpoint = std::make_shared<RemoteEndpoint>(config.endpoint->host, config.endpoint->port,
                                                  config.endpoint->max_inflight);
    }
    return endpoint;
  };

  std::shared_ptr<TranscriptStore> configured_store;
  auto transcript_store = [&]() {
    require(config.transcript.has_value(), "config-invalid",
            "a provider is in transcript mode but providers.transcript is missing");
    if (!configured_store) configured_store = load_store(*config.transcript);
    return configured_store;
  };

  if (options.replay_path.has_value()) {
    // A replay transcript overrides every configured mode.
    built.replay = load_store(*options.replay_path);
    built.set.text = std::make_shared<TranscriptTextEmbedder>(built.replay, config.dim);
    built.set.image = std::make_shared<TranscriptImageEmbedder>(built.replay, config.dim);
    built.set.nli = std::make_shared<TranscriptNli>(built.replay);
    built.set.subject = std::make_shared<TranscriptSubject>(built.replay);
  } else {
    switch (config.text.mode) {
      case ProviderMode::Baseline:
        built.set.text = std::make_shared<BaselineTextEmbedder>(config.text.seed, config.dim);
        break;
      case ProviderMode::Remote:
        built.set.text = std::make_shared<RemoteTextEmbedder>(remote_endpoint(), config.dim);
        break;
      case ProviderMode::Transcript:
        built.set.text = std::make_shared<TranscriptTextEmbedder>(transcript_store(), config.dim);
        break;
    }
    switch (config.image.mode) {
      case ProviderMode::Baseline:
        built.set.image = std::make_shared<BaselineImageEmbedder>(config.image.seed, config.dim);
        break;
      case ProviderMode::Remote:
        built.set.image = std::make_shared<RemoteImageEmbedder>(remote_endpoint(), config.dim);
        break;
      case ProviderMode::Transcript:
        built.set.image = std::make_shared<TranscriptImageEmbedder>(transcript_store(), config.dim);
        break;
    }
    AntonymTable antonyms = config.antonyms_path.has_value()
                                ? AntonymTable::load(*config.antonyms_path)
                                : AntonymTable::builtin();
    switch (config.nli.mode) {
      case ProviderMode::Baseline:
        built.set.nli = std::make_shared<BaselineNli>(std::move(antonyms));
        break;
      case ProviderMode::Remote:
        built.set.nli = std::make_shared<RemoteNli>(remote_endpoint());
        break;
      case ProviderMode::Transcript:
        built.set.nli = std::make_shared<TranscriptNli>(transcript_store());
        break;
    }
    switch (config.subject.mode) {
      case ProviderMode::Baseline:
        built.set.subject = std::make_shared<BaselineSubject>(config.subject.seed);
        break;
      case ProviderMode::Remote:
        built.set.subject = std::make_shared<RemoteSubject>(remote_endpoint());
        break;
      case ProviderMode::Transcript:
        built.set.subject = std::make_shared<TranscriptSubject>(transcript_store());
        break;
    }
  }

  if (options.record_path.has_value()) {
    built.record = std::make_shared<TranscriptStore>();
    built.set.text = std::make_shared<RecordingTextEmbedder>(built.set.text, built.record);
    built.set.image = std::make_shared<RecordingImageEmbedder>(built.set.image, built.record);
    built.set.nli = std::make_shared<RecordingNli>(built.set.nli, built.record);
    built.set.subject = std::make_shared<RecordingSubject>(built.set.subject, built.record);
  }
  return built;
}

PipelineContext make_pipeline_context(const RunConfig& config, ProviderSet providers) {
  PipelineContext context;
  context.providers = std::move(providers);
  context.lexicon = Lexicon::load(config.lexicon_path);
  context.cue_words = config.cue_words_path.has_value() ? load_cue_words(*config.cue_words_path)
                                                        : default_cue_words();
  context.attack_histories = config.attack_templates_path.has_value()
                                 ? load_attack_histories(*config.attack_templates_path)
                                 : default_attack_histories();
  context.weights = config.weights;
  context.thresholds = config.thresholds;
  context.patch_size = config.patch_size;
  context.stride = config.stride;
  context.saturation_threshold = config.saturation_threshold;
  context.min_tissue_fraction = config.min_tissue_fraction;
  context.top_k = config.top_k;
  context.perturbation = config.perturbation;
  context.base_prompt = config.base_prompt;
  context.stability_enabled = config.stability_enabled;
  return context;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "manifest-invalid", "cannot open manifest " + path);
  const std::string base_dir = fs::path(path).parent_path().string();

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json entry = json::parse(line, nullptr, false);
    require(!entry.is_discarded() && entry.is_object(), "manifest-invalid", where);
    reject_unknown_keys(entry, {"case_id", "image", "report", "cohort"}, where);
    require(entry.contains("case_id") && entry.contains("image"), "manifest-invalid",
            where + ": case_id and image are required");

    ManifestEntry m;
    m.case_id = entry["case_id"].get<std::string>();
    require(seen_ids.insert(m.case_id).second, "manifest-invalid",
            where + ": duplicate case id '" + m.case_id + "'");
    m.image_path = resolve(base_dir, entry["image"].get<std::string>());
    require(fs::exists(m.image_path), "manifest-invalid",
            where + ": image not found: " + m.image_path);
    if (entry.contains("report")) m.report = entry["report"].get<std::string>();
    if (entry.contains("cohort")) m.cohort = entry["cohort"].get<std::string>();
    entries.push_back(std::move(m));
  }
  require(!entries.empty(), "manifest-invalid", "manifest has no entries: " + path);
  return entries;
}

}  // namespace pathgls
