#include "pathgls/providers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <semaphore>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pathgls/error.hpp"
#include "pathgls/hash.hpp"
#include "pathgls/text.hpp"

namespace pathgls {

using nlohmann::json;

void EmbeddingVector::validate() const {
  require(!values.empty(), "dimension-mismatch", "empty embedding");
  double sq = 0.0;
  for (double v : values) {
    require(std::isfinite(v), "embedding-invalid", "non-finite embedding component");
    sq += v * v;
  }
  require(std::fabs(std::sqrt(sq) - 1.0) < 1e-6, "embedding-invalid",
          "embedding is not unit-norm");
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  require(a.dim() == b.dim(), "dimension-mismatch", "embedding dimensions differ");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

namespace {

void l2_normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) {
    v[0] = 1.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

std::uint64_t mix_seed(std::string_view tag, std::uint64_t seed) {
  return fnv1a64(seed, fnv1a64(tag));
}

}  // namespace

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

EmbeddingVector BaselineTextEmbedder::embed_text(const std::string& text) const {
  const std::string norm = normalize_text(text);
  require(!norm.empty(), "empty-text", "cannot embed empty text");

  const std::uint64_t base = mix_seed("pathgls-text-embedder", seed_);
  std::vector<double> acc(dim_, 0.0);
  // Sentinel padding so boundary trigrams are represented.
  std::string padded;
  padded.reserve(norm.size() + 2);
  padded.push_back('\x02');
  padded += norm;
  padded.push_back('\x03');
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3), base);
    const std::size_t slot = h % dim_;
    const double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
    acc[slot] += sign;
  }
  l2_normalize(acc);
  return EmbeddingVector{std::move(acc)};
}

std::pair<std::size_t, double> BaselineImageEmbedder::feature_slot(
    std::size_t feature_index) const {
  const std::uint64_t base = mix_seed("pathgls-image-embedder", seed_);
  const std::uint64_t h = fnv1a64(static_cast<std::uint64_t>(feature_index), base);
  return {h % dim_, ((h >> 32) & 1) ? 1.0 : -1.0};
}

EmbeddingVector BaselineImageEmbedder::embed_image(const Image& patch) const {
  require(!patch.empty(), "image-empty", "cannot embed empty patch");

  double features[kFeatureCount] = {};
  // Per-channel mean and std, scaled to [0, 1].
  double sum[3] = {}, sumsq[3] = {};
  const std::size_t npx = static_cast<std::size_t>(patch.width) * patch.height;
  for (std::size_t i = 0; i < npx; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = patch.pixels[3 * i + c] / 255.0;
      sum[c] += v;
      sumsq[c] += v * v;
    }
  }
  for (int c = 0; c < 3; ++c) {
    const double mean = sum[c] / static_cast<double>(npx);
    const double var = std::max(0.0, sumsq[c] / static_cast<double>(npx) - mean * mean);
    features[2 * c] = mean;
    features[2 * c + 1] = std::sqrt(var);
  }
  // 4x4 downsampled luminance grid.
  for (int gy = 0; gy < 4; ++gy) {
    for (int gx = 0; gx < 4; ++gx) {
      const int x0 = patch.width * gx / 4, x1 = std::max(x0 + 1, patch.width * (gx + 1) / 4);
      const int y0 = patch.height * gy / 4, y1 = std::max(y0 + 1, patch.height * (gy + 1) / 4);
      double lum = 0.0;
      for (int y = y0; y < y1 && y < patch.height; ++y) {
        for (int x = x0; x < x1 && x < patch.width; ++x) {
          const std::uint8_t* p = patch.px(x, y);
          lum += (p[0] + p[1] + p[2]) / (3.0 * 255.0);
        }
      }
      const int cells = (std::min(x1, patch.width) - x0) * (std::min(y1, patch.height) - y0);
      features[6 + 4 * gy + gx] = cells > 0 ? lum / cells : 0.0;
    }
  }
  features[22] = 1.0;  // bias, keeps all-black tiles away from the zero vector

  std::vector<double> acc(dim_, 0.0);
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    const auto [slot, sign] = feature_slot(k);
    acc[slot] += sign * features[k];
  }
  l2_normalize(acc);
  return EmbeddingVector{std::move(acc)};
}

AntonymTable AntonymTable::builtin() {
  AntonymTable t;
  t.add("malignant", "benign");
  t.add("present", "absent");
  t.add("positive", "negative");
  t.add("high", "low");
  t.add("large", "small");
  t.add("increased", "decreased");
  t.add("frequent", "rare");
  t.add("diffuse", "focal");
  t.add("preserved", "effaced");
  t.add("atypical", "typical");
  return t;
}

AntonymTable AntonymTable::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "file-missing", "cannot open antonym table " + path);
  AntonymTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, "antonyms-invalid", "expected term<TAB>term: " + line);
    t.add(normalize_text(line.substr(0, tab)), normalize_text(line.substr(tab + 1)));
  }
  require(t.size() > 0, "antonyms-invalid", "antonym table is empty: " + path);
  return t;
}

void AntonymTable::add(const std::string& a, const std::string& b) {
  pairs_.emplace_back(a, b);
  index_.emplace(a, b);
  index_.emplace(b, a);
}

bool AntonymTable::contradicts(const std::string& a, const std::string& b) const {
  const auto it = index_.find(a);
  return it != index_.end() && it->second == b;
}

std::optional<std::string> AntonymTable::antonym_of(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double BaselineNli::contradiction(const std::string& premise, const std::string& hypothesis) const {
  require(!premise.empty() && !hypothesis.empty(), "empty-text", "NLI inputs must be non-empty");
  const std::string np = normalize_text(premise);
  const std::string nh = normalize_text(hypothesis);
  if (np == nh) return 0.0;

  const auto pt = tokenize_words(np);
  const auto ht = tokenize_words(nh);
  for (const auto& a : pt) {
    for (const auto& b : ht) {
      if (table_.contradicts(a, b)) return 1.0;
    }
  }
  // Lexical entailment: shared head noun with no conflicting token.
  if (!pt.empty() && !ht.empty() && pt.back() == ht.back()) return 0.0;
  return 0.5;
}

BaselineSubject::BaselineSubject(std::uint64_t seed) : seed_(seed) {
  templates_ = {
      "Sheets of atypical cells are present. Findings consistent with lymphoma.",
      "Nests of epithelioid cells with prominent nucleoli. Suggestive of melanoma.",
      "Glandular structures with nuclear atypia are seen. Consistent with adenocarcinoma.",
      "Spindle cells arranged in fascicles. Indicating a low grade sarcoma.",
      "Dense lymphoid infiltrate within the lymph node. Diagnostic of follicular hyperplasia.",
  };
}

BaselineSubject::BaselineSubject(std::uint64_t seed, std::vector<std::string> templates)
    : seed_(seed), templates_(std::move(templates)) {
  require(!templates_.empty(), "empty-generation", "subject template pool is empty");
}

std::string BaselineSubject::generate(const Image& image, const std::string& prompt) const {
  require(!image.empty(), "image-empty", "subject needs a non-empty image");
  require(!prompt.empty(), "empty-text", "subject needs a non-empty prompt");
  std::uint64_t h = fnv1a64(image_content_hash(image), mix_seed("pathgls-subject", seed_));
  h = fnv1a64(prompt, h);
  return templates_[h % templates_.size()];
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

namespace {
std::string keyed(std::string_view tag, std::initializer_list<std::string_view> parts) {
  std::string buf(tag);
  for (auto p : parts) {
    buf.push_back('\0');
    buf.append(p);
  }
  return sha256_hex(buf);
}
}  // namespace

std::string transcript_key_text(const std::string& text) {
  return keyed("embed_text", {normalize_text(text)});
}
std::string transcript_key_image(const Image& patch) {
  return keyed("embed_image", {image_content_hash(patch)});
}
std::string transcript_key_nli(const std::string& premise, const std::string& hypothesis) {
  return keyed("nli", {normalize_text(premise), normalize_text(hypothesis)});
}
std::string transcript_key_generate(const Image& image, const std::string& prompt) {
  return keyed("generate", {image_content_hash(image), prompt});
}

TranscriptStore TranscriptStore::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "file-missing", "cannot open transcript " + path);
  TranscriptStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json entry = json::parse(line, nullptr, false);
    require(!entry.is_discarded() && entry.contains("provider") && entry.contains("key") &&
                entry.contains("response"),
            "transcript-invalid", path + ":" + std::to_string(lineno));
    store.entries_[{entry["provider"].get<std::string>(), entry["key"].get<std::string>()}] =
        entry["response"].dump();
  }
  return store;
}

void TranscriptStore::save(const std::string& path) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path);
  require(out.good(), "file-write", "cannot write transcript " + path);
  for (const auto& [pk, response] : entries_) {
    json entry;
    entry["provider"] = pk.first;
    entry["key"] = pk.second;
    entry["response"] = json::parse(response);
    out << entry.dump() << "\n";
  }
}

void TranscriptStore::put(const std::string& provider, const std::string& key,
                          const std::string& response_json) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[{provider, key}] = response_json;
}

std::optional<std::string> TranscriptStore::get(const std::string& provider,
                                                const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find({provider, key});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t TranscriptStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

std::string TranscriptStore::content_hash() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::string buf;
  for (const auto& [pk, response] : entries_) {
    buf += pk.first;
    buf.push_back('\0');
    buf += pk.second;
    buf.push_back('\0');
    buf += response;
    buf.push_back('\n');
  }
  return sha256_hex(buf);
}

namespace {

EmbeddingVector parse_vector_response(const std::string& payload, std::size_t dim) {
  const json j = json::parse(payload);
  EmbeddingVector v{j.at("vector").get<std::vector<double>>()};
  require(v.dim() == dim, "dimension-mismatch",
          "transcript vector has dimension " + std::to_string(v.dim()));
  v.validate();
  return v;
}

}  // namespace

EmbeddingVector TranscriptTextEmbedder::embed_text(const std::string& text) const {
  require(!normalize_text(text).empty(), "empty-text", "cannot embed empty text");
  const auto payload = store_->get("embed_text", transcript_key_text(text));
  require(payload.has_value(), "transcript-miss", "no recorded embedding for text");
  return parse_vector_response(*payload, dim_);
}

EmbeddingVector TranscriptImageEmbedder::embed_image(const Image& patch) const {
  const auto payload = store_->get("embed_image", transcript_key_image(patch));
  require(payload.has_value(), "transcript-miss", "no recorded embedding for patch");
  return parse_vector_response(*payload, dim_);
}

double TranscriptNli::contradiction(const std::string& premise,
                                    const std::string& hypothesis) const {
  const auto payload = store_->get("nli", transcript_key_nli(premise, hypothesis));
  require(payload.has_value(), "transcript-miss", "no recorded NLI score for pair");
  const double p = json::parse(*payload).at("contradiction").get<double>();
  require(p >= 0.0 && p <= 1.0, "nli-invalid", "contradiction probability out of range");
  return p;
}

std::string TranscriptSubject::generate(const Image& image, const std::string& prompt) const {
  const auto payload = store_->get("generate", transcript_key_generate(image, prompt));
  // Fail closed: a missing entry must never become a fabricated report.
  require(payload.has_value(), "empty-generation", "no recorded generation for (image, prompt)");
  const std::string text = json::parse(*payload).at("text").get<std::string>();
  require(!text.empty(), "empty-generation", "recorded generation is empty");
  return text;
}

EmbeddingVector RecordingTextEmbedder::embed_text(const std::string& text) const {
  EmbeddingVector v = inner_->embed_text(text);
  store_->put("embed_text", transcript_key_text(text), json{{"vector", v.values}}.dump());
  return v;
}

EmbeddingVector RecordingImageEmbedder::embed_image(const Image& patch) const {
  EmbeddingVector v = inner_->embed_image(patch);
  store_->put("embed_image", transcript_key_image(patch), json{{"vector", v.values}}.dump());
  return v;
}

double RecordingNli::contradiction(const std::string& premise,
                                   const std::string& hypothesis) const {
  const double p = inner_->contradiction(premise, hypothesis);
  store_->put("nli", transcript_key_nli(premise, hypothesis),
              json{{"contradiction", p}}.dump());
  return p;
}

std::string RecordingSubject::generate(const Image& image, const std::string& prompt) const {
  const std::string text = inner_->generate(image, prompt);
  store_->put("generate", transcript_key_generate(image, prompt), json{{"text", text}}.dump());
  return text;
}

// ---------------------------------------------------------------------------
// Remote clients
// ---------------------------------------------------------------------------

struct RemoteEndpoint::Impl {
  std::string host;
  int port;
  mutable std::counting_semaphore<256> inflight;

  Impl(std::string h, int p, int max_inflight)
      : host(std::move(h)), port(p), inflight(max_inflight) {}
};

RemoteEndpoint::RemoteEndpoint(std::string host, int port, int max_inflight)
    : impl_(std::make_unique<Impl>(std::move(host), port, std::max(1, max_inflight))) {}

RemoteEndpoint::~RemoteEndpoint() = default;

std::string RemoteEndpoint::post_json(const std::string& path, const std::string& body) const {
  impl_->inflight.acquire();
  struct Release {
    std::counting_semaphore<256>& sem;
    ~Release() { sem.release(); }
  } release{impl_->inflight};

  httplib::Client client(impl_->host, impl_->port);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    fail("provider-unreachable", "no response from " + impl_->host + path);
  }
  require(res->status == 200, "provider-unreachable",
          impl_->host + path + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

EmbeddingVector RemoteTextEmbedder::embed_text(const std::string& text) const {
  return embed_texts({text}).front();
}

std::vector<EmbeddingVector> RemoteTextEmbedder::embed_texts(
    const std::vector<std::string>& texts) const {
  for (const auto& t : texts) {
    require(!normalize_text(t).empty(), "empty-text", "cannot embed empty text");
  }
  json body;
  body["texts"] = texts;
  const json resp = json::parse(endpoint_->post_json("/v1/embed_text", body.dump()));
  require(resp.at("dim").get<std::size_t>() == dim_, "dimension-mismatch",
          "remote text embedder dimension differs from configured D");
  std::vector<EmbeddingVector> out;
  for (const auto& vec : resp.at("vectors")) {
    EmbeddingVector v{vec.get<std::vector<double>>()};
    require(v.dim() == dim_, "dimension-mismatch", "remote vector dimension mismatch");
    v.validate();
    out.push_back(std::move(v));
  }
  require(out.size() == texts.size(), "provider-unreachable", "batch size mismatch in response");
  return out;
}

EmbeddingVector RemoteImageEmbedder::embed_image(const Image& patch) const {
  json body;
  body["images_png_b64"] = json::array({base64_encode(encode_png(patch))});
  const json resp = json::parse(endpoint_->post_json("/v1/embed_image", body.dump()));
  require(resp.at("dim").get<std::size_t>() == dim_, "dimension-mismatch",
          "remote image embedder dimension differs from configured D");
  EmbeddingVector v{resp.at("vectors").at(0).get<std::vector<double>>()};
  require(v.dim() == dim_, "dimension-mismatch", "remote vector dimension mismatch");
  v.validate();
  return v;
}

double RemoteNli::contradiction(const std::string& premise, const std::string& hypothesis) const {
  require(!premise.empty() && !hypothesis.empty(), "empty-text", "NLI inputs must be non-empty");
  json body;
  body["pairs"] = json::array({{{"premise", premise}, {"hypothesis", hypothesis}}});
  const json resp = json::parse(endpoint_->post_json("/v1/nli", body.dump()));
  const double p = resp.at("contradiction").at(0).get<double>();
  require(p >= 0.0 && p <= 1.0, "nli-invalid", "remote contradiction probability out of range");
  return p;
}

std::string RemoteSubject::generate(const Image& image, const std::string& prompt) const {
  require(!prompt.empty(), "empty-text", "subject needs a non-empty prompt");
  json body;
  body["image_png_b64"] = base64_encode(encode_png(image));
  body["prompt"] = prompt;
  const json resp = json::parse(endpoint_->post_json("/v1/generate", body.dump()));
  const std::string text = resp.at("text").get<std::string>();
  require(!text.empty(), "empty-generation", "remote subject returned empty text");
  return text;
}

}  // namespace pathgls
