#include "pathgls/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pathgls/error.hpp"
#include "pathgls/stain.hpp"

namespace pathgls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

json grounding_to_json(const GroundingResult& g) {
  json evidence = json::array();
  for (const auto& e : g.evidence) {
    evidence.push_back({{"entity", e.entity_surface},
                        {"category", to_string(e.category)},
                        {"patch_index", e.best_patch_index},
                        {"patch_x", e.best_patch_x},
                        {"patch_y", e.best_patch_y},
                        {"raw_cosine", e.raw_cosine}});
  }
  return {{"score", g.score},
          {"raw_score", g.raw_score},
          {"ungroundable", g.ungroundable},
          {"evidence", evidence}};
}

json graph_to_json(const KnowledgeGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"id", n.id},
                     {"surface", n.surface},
                     {"category", to_string(n.category)},
                     {"sentence_index", n.sentence_index}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"relation", to_string(e.relation)}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

json logic_to_json(const LogicOutcome& outcome) {
  json pairs = json::array();
  for (const auto& sp : outcome.result.pair_probs) {
    pairs.push_back({{"premise", sp.pair.premise},
                     {"hypothesis", sp.pair.hypothesis},
                     {"contradiction", sp.contradiction}});
  }
  return {{"score", outcome.result.score},
          {"k_used", outcome.result.k_used},
          {"vacuous", outcome.result.vacuous},
          {"pairs", pairs},
          {"graph", graph_to_json(outcome.graph)}};
}

}  // namespace

json bundle_to_json(const ScoreBundle& bundle, const std::string& config_hash,
                    const std::string& transcript_hash) {
  json out;
  out["case_id"] = bundle.case_id;
  out["scores"] = {{"s_g", bundle.s_g},
                   {"s_l", bundle.s_l},
                   {"s_s", bundle.s_s},
                   {"s_total", bundle.s_total}};
  out["weights"] = {{"grounding", bundle.effective_weights.grounding},
                    {"logic", bundle.effective_weights.logic},
                    {"stability", bundle.effective_weights.stability}};
  out["flags"] = bundle.flags;
  out["routing"] = to_string(bundle.routing);
  out["grounding"] = grounding_to_json(bundle.grounding);
  out["logic"] = logic_to_json(bundle.logic);
  if (bundle.stability.has_value()) {
    const auto& s = *bundle.stability;
    out["stability"] = {{"score", s.score},
                        {"delta_aug", s.delta_aug},
                        {"delta_attack", s.delta_attack},
                        {"report_orig", s.report_orig},
                        {"report_aug", s.report_aug},
                        {"report_attack", s.report_attack},
                        {"false_history", s.false_history}};
  } else {
    out["stability"] = nullptr;
  }
  out["stability_skipped"] = bundle.stability_skipped;
  out["config_hash"] = config_hash;
  out["transcript_hash"] = transcript_hash;
  out["tool_version"] = kToolVersion;
  return out;
}

ScoreRunResult run_score(const RunConfig& config, const std::vector<ManifestEntry>& manifest,
                         const std::string& out_dir, const TranscriptOptions& transcripts,
                         bool dump_perturbed) {
  require(!manifest.empty(), "manifest-invalid", "manifest has no entries");
  BuiltProviders providers = build_providers(config, transcripts);
  const PipelineContext context = make_pipeline_context(config, providers.set);

  struct Slot {
    std::optional<ScoreBundle> bundle;
    std::optional<CaseError> error;
  };
  std::vector<Slot> slots(manifest.size());

  const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<std::size_t>(
      manifest.size(), config.workers > 0 ? static_cast<unsigned>(config.workers) : hardware);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= manifest.size()) return;
      const ManifestEntry& entry = manifest[i];
      try {
        CaseInput input;
        input.case_id = entry.case_id;
        input.image = load_image(entry.image_path);
        input.report = entry.report;
        slots[i].bundle = evaluate_case(input, context);
        if (dump_perturbed && context.stability_enabled && !out_dir.empty()) {
          save_png(perturb_stains(input.image, context.perturbation),
                   (fs::path(out_dir) / (entry.case_id + ".perturbed.png")).string());
        }
      } catch (const Error& e) {
        slots[i].error = CaseError{entry.case_id, e.code(), e.what()};
      } catch (const std::exception& e) {
        slots[i].error = CaseError{entry.case_id, "internal-error", e.what()};
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ScoreRunResult result;
  for (auto& slot : slots) {
    if (slot.bundle.has_value()) result.bundles.push_back(std::move(*slot.bundle));
    if (slot.error.has_value()) result.errors.push_back(std::move(*slot.error));
  }
  std::sort(result.bundles.begin(), result.bundles.end(),
            [](const ScoreBundle& a, const ScoreBundle& b) { return a.case_id < b.case_id; });
  std::sort(result.errors.begin(), result.errors.end(),
            [](const CaseError& a, const CaseError& b) { return a.case_id < b.case_id; });

  std::ostringstream csv;
  csv << "case_id,s_g,s_l,s_s,s_total,routing\n";
  for (const auto& b : result.bundles) {
    csv << b.case_id << "," << format_score(b.s_g) << "," << format_score(b.s_l) << ","
        << format_score(b.s_s) << "," << format_score(b.s_total) << "," << to_string(b.routing)
        << "\n";
  }
  result.summary_csv = csv.str();

  if (providers.record && transcripts.record_path.has_value()) {
    providers.record->save(*transcripts.record_path);
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string transcript_hash = providers.replay   ? providers.replay->content_hash()
                                        : providers.record ? providers.record->content_hash()
                                                           : "";
    for (const auto& b : result.bundles) {
      std::ofstream out((fs::path(out_dir) / (b.case_id + ".json")).string());
      out << bundle_to_json(b, config.config_hash, transcript_hash).dump(2) << "\n";
    }
    std::ofstream csv_out((fs::path(out_dir) / "summary.csv").string());
    csv_out << result.summary_csv;
    std::ofstream err_out((fs::path(out_dir) / "errors.jsonl").string());
    for (const auto& e : result.errors) {
      err_out << json{{"case_id", e.case_id}, {"code", e.code}, {"message", e.message}}.dump()
              << "\n";
    }
  }
  return result;
}

std::vector<CorpusEntry> load_corpus_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "corpus-invalid", "cannot open corpus manifest " + path);
  const std::string base_dir = fs::path(path).parent_path().string();

  std::vector<CorpusEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    require(!j.is_discarded() && j.is_object(), "corpus-invalid", where);
    CorpusEntry entry;
    try {
      entry.triple.case_id = j.at("case_id").get<std::string>();
      entry.triple.control = j.at("control").get<std::string>();
      entry.triple.visual_hallucination = j.at("visual_hallucination").get<std::string>();
      entry.triple.logic_error = j.at("logic_error").get<std::string>();
      entry.image_path = j.at("image").get<std::string>();
      if (j.contains("edits")) {
        for (const auto& e : j["edits"]) {
          entry.triple.edits.push_back({e.at("operation").get<std::string>(),
                                        e.at("begin").get<std::size_t>(),
                                        e.at("end").get<std::size_t>(),
                                        e.at("original").get<std::string>(),
                                        e.at("replacement").get<std::string>()});
        }
      }
    } catch (const json::exception& e) {
      fail("corpus-invalid", where + ": " + e.what());
    }
    if (!fs::path(entry.image_path).is_absolute() && !base_dir.empty()) {
      entry.image_path = (fs::path(base_dir) / entry.image_path).string();
    }
    require(entry.triple.control != entry.triple.visual_hallucination &&
                entry.triple.control != entry.triple.logic_error,
            "corpus-invalid", where + ": perturbed variants must differ from control");
    entries.push_back(std::move(entry));
  }
  require(!entries.empty(), "corpus-invalid", "corpus manifest has no entries: " + path);
  return entries;
}

void save_corpus_manifest(const std::vector<CorpusEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "file-write", "cannot write corpus manifest " + path);
  for (const auto& entry : entries) {
    json edits = json::array();
    for (const auto& e : entry.triple.edits) {
      edits.push_back({{"operation", e.operation},
                       {"begin", e.begin},
                       {"end", e.end},
                       {"original", e.original},
                       {"replacement", e.replacement}});
    }
    out << json{{"case_id", entry.triple.case_id},
                {"control", entry.triple.control},
                {"visual_hallucination", entry.triple.visual_hallucination},
                {"logic_error", entry.triple.logic_error},
                {"image", entry.image_path},
                {"edits", edits}}
               .dump()
        << "\n";
  }
}

json SensitivityReport::to_json() const {
  auto group = [](const GroupStats& g) {
    return json{{"mean_s_g", g.mean_s_g}, {"mean_s_l", g.mean_s_l}};
  };
  return {{"control", group(control)},
          {"visual_hallucination", group(visual_hallucination)},
          {"logic_error", group(logic_error)},
          {"delta_percent",
           {{"s_g",
             {{"visual_hallucination", delta_s_g_visual * 100.0},
              {"logic_error", delta_s_g_logic * 100.0}}},
            {"s_l",
             {{"visual_hallucination", delta_s_l_visual * 100.0},
              {"logic_error", delta_s_l_logic * 100.0}}}}}};
}

SensitivityReport run_sensitivity(const RunConfig& config,
                                  const std::vector<CorpusEntry>& corpus) {
  require(!corpus.empty(), "corpus-invalid", "empty corpus");
  BuiltProviders providers = build_providers(config, {});
  const PipelineContext context = make_pipeline_context(config, providers.set);

  std::vector<double> g_control, g_visual, g_logic;
  std::vector<double> l_control, l_visual, l_logic;

  for (const auto& entry : corpus) {
    const Image image = load_image(entry.image_path);
    const PatchBag bag =
        filter_background(tessellate(image, context.patch_size, context.stride),
                          context.saturation_threshold, context.min_tissue_fraction);
    auto score_variant = [&](const std::string& caption, std::vector<double>& g_out,
                             std::vector<double>& l_out) {
      g_out.push_back(compute_grounding(caption, context.lexicon, *context.providers.text,
                                        *context.providers.image, bag)
                          .score);
      l_out.push_back(compute_logic(caption, context.lexicon, context.cue_words,
                                    *context.providers.nli, context.top_k)
                          .result.score);
    };
    score_variant(entry.triple.control, g_control, l_control);
    score_variant(entry.triple.visual_hallucination, g_visual, l_visual);
    score_variant(entry.triple.logic_error, g_logic, l_logic);
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  SensitivityReport report;
  report.control = {mean_of(g_control), mean_of(l_control)};
  report.visual_hallucination = {mean_of(g_visual), mean_of(l_visual)};
  report.logic_error = {mean_of(g_logic), mean_of(l_logic)};
  report.delta_s_g_visual = sensitivity_delta(g_control, g_visual);
  report.delta_s_g_logic = sensitivity_delta(g_control, g_logic);
  report.delta_s_l_visual = sensitivity_delta(l_control, l_visual);
  report.delta_s_l_logic = sensitivity_delta(l_control, l_logic);
  return report;
}

std::map<std::string, double> load_severity_ranks(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "missing-severity-rank", "cannot open severity file " + path);
  std::map<std::string, double> ranks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("case_id", 0) == 0) continue;  // header
    const auto comma = line.find(',');
    require(comma != std::string::npos, "missing-severity-rank",
            path + ":" + std::to_string(lineno) + ": expected case_id,severity_rank");
    ranks[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  require(!ranks.empty(), "missing-severity-rank", "severity file is empty: " + path);
  return ranks;
}

json AblationReport::to_json() const {
  return {{"rho_full", rho_full},
          {"rho_without_grounding", rho_without_grounding},
          {"rho_without_logic", rho_without_logic},
          {"rho_without_stability", rho_without_stability},
          {"drop_percent",
           {{"grounding", drop_grounding * 100.0},
            {"logic", drop_logic * 100.0},
            {"stability", drop_stability * 100.0}}}};
}

AblationReport run_ablate(const RunConfig& config, const std::vector<ManifestEntry>& manifest,
                          const std::map<std::string, double>& severity) {
  const ScoreRunResult scored = run_score(config, manifest, "");
  if (!scored.errors.empty()) {
    fail(scored.errors.front().code, "case '" + scored.errors.front().case_id +
                                         "' failed: " + scored.errors.front().message);
  }

  std::vector<double> severity_ranks;
  for (const auto& b : scored.bundles) {
    const auto it = severity.find(b.case_id);
    require(it != severity.end(), "missing-severity-rank",
            "severity file does not cover case '" + b.case_id + "'");
    severity_ranks.push_back(it->second);
  }

  auto totals_with = [&](double wg, double wl, double ws) {
    const double sum = wg + wl + ws;
    std::vector<double> totals;
    totals.reserve(scored.bundles.size());
    for (const auto& b : scored.bundles) {
      totals.push_back((b.s_g * wg + b.s_l * wl + b.s_s * ws) / sum);
    }
    return totals;
  };

  const Weights& w = config.weights;
  AblationReport report;
  report.rho_full =
      spearman_rho(totals_with(w.grounding, w.logic, w.stability), severity_ranks);
  report.rho_without_grounding = spearman_rho(totals_with(0.0, w.logic, w.stability), severity_ranks);
  report.rho_without_logic = spearman_rho(totals_with(w.grounding, 0.0, w.stability), severity_ranks);
  report.rho_without_stability = spearman_rho(totals_with(w.grounding, w.logic, 0.0), severity_ranks);
  require(report.rho_full != 0.0, "constant-input",
          "rho(full) is 0; drop percentages are undefined");
  report.drop_grounding = (report.rho_full - report.rho_without_grounding) / report.rho_full;
  report.drop_logic = (report.rho_full - report.rho_without_logic) / report.rho_full;
  report.drop_stability = (report.rho_full - report.rho_without_stability) / report.rho_full;
  return report;
}

}  // namespace pathgls
