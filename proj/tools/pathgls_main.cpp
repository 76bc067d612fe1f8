#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pathgls/error.hpp"
#include "pathgls/hash.hpp"
#include "pathgls/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

pathgls::TranscriptOptions transcript_options(const std::string& path, bool record) {
  pathgls::TranscriptOptions options;
  if (path.empty()) return options;
  if (record) {
    options.record_path = path;
  } else {
    options.replay_path = path;
  }
  return options;
}

int cmd_score(const std::string& config_path, const std::string& manifest_path,
              const std::string& out_dir, int workers, const std::string& stability,
              const std::string& transcript, bool record, bool dump_perturbed) {
  pathgls::RunConfig config = pathgls::RunConfig::from_json_file(config_path);
  if (workers > 0) config.workers = workers;
  if (stability == "skip") config.stability_enabled = false;
  if (stability == "on") config.stability_enabled = true;

  const auto manifest = pathgls::load_manifest(manifest_path);
  const auto result = pathgls::run_score(config, manifest, out_dir,
                                         transcript_options(transcript, record), dump_perturbed);
  std::cout << result.summary_csv;
  for (const auto& e : result.errors) {
    std::cerr << "error: case '" << e.case_id << "': " << e.message << "\n";
  }
  return result.errors.empty() ? kExitOk : kExitPartial;
}

int cmd_sensitivity(const std::string& config_path, const std::string& corpus_path,
                    const std::string& out_path) {
  const pathgls::RunConfig config = pathgls::RunConfig::from_json_file(config_path);
  const auto corpus = pathgls::load_corpus_manifest(corpus_path);
  const auto report = pathgls::run_sensitivity(config, corpus);
  const std::string text = report.to_json().dump(2);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << text << "\n";
  }
  std::cout << text << "\n";
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& manifest_path,
               const std::string& severity_path, const std::string& out_path) {
  const pathgls::RunConfig config = pathgls::RunConfig::from_json_file(config_path);
  const auto manifest = pathgls::load_manifest(manifest_path);
  const auto severity = pathgls::load_severity_ranks(severity_path);
  const auto report = pathgls::run_ablate(config, manifest, severity);
  const std::string text = report.to_json().dump(2);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << text << "\n";
  }
  std::cout << text << "\n";
  return kExitOk;
}

// Re-routes an existing summary CSV under different thresholds.
int cmd_gate(const std::string& summary_path, double deploy_min, double reject_max) {
  pathgls::RoutingThresholds thresholds{deploy_min, reject_max};
  thresholds.validate();
  std::ifstream in(summary_path);
  pathgls::require(in.good(), "file-missing", "cannot open summary " + summary_path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      std::cout << line << "\n";
      continue;
    }
    const auto last_comma = line.rfind(',');
    const auto prev_comma = line.rfind(',', last_comma - 1);
    const double total = std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
    std::cout << line.substr(0, last_comma + 1)
              << pathgls::to_string(pathgls::route(total, thresholds)) << "\n";
  }
  return kExitOk;
}

int cmd_serve(const std::string& config_path, int port, const std::string& token) {
  const pathgls::RunConfig config = pathgls::RunConfig::from_json_file(config_path);
  pathgls::BuiltProviders providers = pathgls::build_providers(config, {});
  const pathgls::PipelineContext context = pathgls::make_pipeline_context(config, providers.set);

  httplib::Server server;
  auto authorized = [&](const httplib::Request& req, httplib::Response& res) {
    if (token.empty()) return true;
    if (req.get_header_value("X-Auth-Token") == token) return true;
    res.status = 401;
    res.set_content(json{{"error", "unauthorized"}}.dump(), "application/json");
    return false;
  };
  auto handle = [&](const httplib::Request& req, httplib::Response& res,
                    const std::function<json(const json&)>& fn) {
    if (!authorized(req, res)) return;
    try {
      res.set_content(fn(json::parse(req.body)).dump(), "application/json");
    } catch (const pathgls::Error& e) {
      res.status = 400;
      res.set_content(json{{"error", e.code()}, {"message", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", "bad-request"}, {"message", e.what()}}.dump(),
                      "application/json");
    }
  };

  // Scoring reuses the exact evaluate_case path the batch runner uses.
  server.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      pathgls::CaseInput input;
      input.case_id = body.value("case_id", "http-case");
      input.image = pathgls::decode_png(
          pathgls::base64_decode(body.at("image_png_b64").get<std::string>()));
      if (body.contains("report")) input.report = body["report"].get<std::string>();
      return pathgls::bundle_to_json(pathgls::evaluate_case(input, context), config.config_hash);
    });
  });
  server.Post("/v1/embed_text", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      json vectors = json::array();
      for (const auto& text : body.at("texts")) {
        vectors.push_back(context.providers.text->embed_text(text.get<std::string>()).values);
      }
      return json{{"vectors", vectors}, {"dim", context.providers.text->dim()}};
    });
  });
  server.Post("/v1/embed_image", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      json vectors = json::array();
      for (const auto& b64 : body.at("images_png_b64")) {
        const pathgls::Image img =
            pathgls::decode_png(pathgls::base64_decode(b64.get<std::string>()));
        vectors.push_back(context.providers.image->embed_image(img).values);
      }
      return json{{"vectors", vectors}, {"dim", context.providers.image->dim()}};
    });
  });
  server.Post("/v1/nli", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      json probs = json::array();
      for (const auto& pair : body.at("pairs")) {
        probs.push_back(context.providers.nli->contradiction(
            pair.at("premise").get<std::string>(), pair.at("hypothesis").get<std::string>()));
      }
      return json{{"contradiction", probs}};
    });
  });
  server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      const pathgls::Image img = pathgls::decode_png(
          pathgls::base64_decode(body.at("image_png_b64").get<std::string>()));
      return json{
          {"text", context.providers.subject->generate(img, body.at("prompt").get<std::string>())}};
    });
  });

  std::cout << "listening on port " << port << "\n";
  server.listen("0.0.0.0", port);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PathGLS: reference-free consistency scoring for pathology reports"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_dir, corpus_path, severity_path, summary_path;
  std::string stability, transcript, token;
  int workers = 0;
  int port = 8080;
  bool record = false, dump_perturbed = false;
  double deploy_min = 0.7, reject_max = 0.4;
  std::uint64_t seed = 0;

  auto* score = app.add_subcommand("score", "Score a case manifest");
  score->add_option("--config", config_path)->required();
  score->add_option("--manifest", manifest_path)->required();
  score->add_option("--out", out_dir)->required();
  score->add_option("--workers", workers);
  score->add_option("--seed", seed);
  score->add_option("--stability", stability)->check(CLI::IsMember({"skip", "on"}));
  score->add_option("--transcript", transcript);
  score->add_flag("--record", record, "record a transcript instead of replaying");
  score->add_flag("--dump-perturbed", dump_perturbed, "write perturbed PNGs for debugging");

  auto* sensitivity = app.add_subcommand("sensitivity", "Run the perturbed-corpus protocol");
  sensitivity->add_option("--config", config_path)->required();
  sensitivity->add_option("--corpus", corpus_path)->required();
  sensitivity->add_option("--out", out_dir);

  auto* ablate = app.add_subcommand("ablate", "Axis-ablation correlation against severity ranks");
  ablate->add_option("--config", config_path)->required();
  ablate->add_option("--manifest", manifest_path)->required();
  ablate->add_option("--severity", severity_path)->required();
  ablate->add_option("--out", out_dir);

  auto* gate = app.add_subcommand("gate", "Re-route a summary CSV under new thresholds");
  gate->add_option("--summary", summary_path)->required();
  gate->add_option("--deploy-min", deploy_min);
  gate->add_option("--reject-max", reject_max);

  auto* serve = app.add_subcommand("serve", "Expose scoring and providers over HTTP");
  serve->add_option("--config", config_path)->required();
  serve->add_option("--port", port);
  serve->add_option("--token", token, "shared token required in X-Auth-Token");

  CLI11_PARSE(app, argc, argv);

  try {
    if (score->parsed()) {
      return cmd_score(config_path, manifest_path, out_dir, workers, stability, transcript, record,
                       dump_perturbed);
    }
    if (sensitivity->parsed()) return cmd_sensitivity(config_path, corpus_path, out_dir);
    if (ablate->parsed()) return cmd_ablate(config_path, manifest_path, severity_path, out_dir);
    if (gate->parsed()) return cmd_gate(summary_path, deploy_min, reject_max);
    if (serve->parsed()) return cmd_serve(config_path, port, token);
  } catch (const pathgls::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string& code = e.code();
    if (code == "config-invalid" || code == "manifest-invalid" || code == "corpus-invalid") {
      return kExitConfig;
    }
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
