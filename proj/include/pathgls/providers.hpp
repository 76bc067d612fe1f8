#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathgls/image.hpp"

namespace pathgls {

// Unit-norm embedding of configured dimension D.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  // Enforces the provider contract: finite components, Euclidean norm 1 within 1e-6.
  void validate() const;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual EmbeddingVector embed_text(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual EmbeddingVector embed_image(const Image& patch) const = 0;
  virtual std::size_t dim() const = 0;
};

class NliScorer {
 public:
  virtual ~NliScorer() = default;
  // Continuous contradiction probability in [0, 1].
  virtual double contradiction(const std::string& premise, const std::string& hypothesis) const = 0;
};

class SubjectModel {
 public:
  virtual ~SubjectModel() = default;
  virtual std::string generate(const Image& image, const std::string& prompt) const = 0;
};

// ---------------------------------------------------------------------------
// Deterministic baselines. Pure functions of (input, seed); stateless after
// construction, safe to call concurrently.
// ---------------------------------------------------------------------------

// Feature hashing of character trigrams of the normalized text into D buckets.
class BaselineTextEmbedder : public TextEmbedder {
 public:
  explicit BaselineTextEmbedder(std::uint64_t seed = 7, std::size_t dim = 64)
      : seed_(seed), dim_(dim) {}
  EmbeddingVector embed_text(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

// Per-channel mean/std plus 4x4 downsampled luminance (and a constant bias
// term), hashed into D buckets and L2-normalized. Identical tiles collide
// exactly; stain jitter measurably moves the vector.
class BaselineImageEmbedder : public ImageEmbedder {
 public:
  explicit BaselineImageEmbedder(std::uint64_t seed = 7, std::size_t dim = 64)
      : seed_(seed), dim_(dim) {}
  EmbeddingVector embed_image(const Image& patch) const override;
  std::size_t dim() const override { return dim_; }

  // The fixed hashed projection of the raw feature vector; exposed so
  // synthetic-corpus construction can build tiles aligned with a target
  // embedding. Feature layout: [meanR, stdR, meanG, stdG, meanB, stdB,
  // lum00..lum33, bias], all in [0, 1].
  static constexpr std::size_t kFeatureCount = 23;
  std::pair<std::size_t, double> feature_slot(std::size_t feature_index) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

// Word pairs that contradict each other (order-insensitive lookup).
class AntonymTable {
 public:
  AntonymTable() = default;
  static AntonymTable load(const std::string& path);
  static AntonymTable builtin();

  void add(const std::string& a, const std::string& b);
  bool contradicts(const std::string& a, const std::string& b) const;
  std::optional<std::string> antonym_of(const std::string& word) const;
  std::size_t size() const { return pairs_.size(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::map<std::string, std::string> index_;
};

// Rule-based NLI baseline:
//   identical normalized text            -> 0.0
//   any antonym conflict across tokens   -> 1.0
//   same head noun, no conflict          -> 0.0
//   otherwise                            -> 0.5 (neutral)
class BaselineNli : public NliScorer {
 public:
  explicit BaselineNli(AntonymTable table = AntonymTable::builtin()) : table_(std::move(table)) {}
  double contradiction(const std::string& premise, const std::string& hypothesis) const override;

 private:
  AntonymTable table_;
};

// Deterministic canned-report subject: selects a report template by hash of
// (image content, prompt, seed). Useful for fuzzing the full pipeline.
class BaselineSubject : public SubjectModel {
 public:
  explicit BaselineSubject(std::uint64_t seed = 7);
  BaselineSubject(std::uint64_t seed, std::vector<std::string> templates);
  std::string generate(const Image& image, const std::string& prompt) const override;

 private:
  std::uint64_t seed_;
  std::vector<std::string> templates_;
};

// ---------------------------------------------------------------------------
// Transcripts: recorded request/response pairs keyed by request hash.
// Replaying a transcript yields byte-identical responses.
// ---------------------------------------------------------------------------

std::string transcript_key_text(const std::string& text);
std::string transcript_key_image(const Image& patch);
std::string transcript_key_nli(const std::string& premise, const std::string& hypothesis);
std::string transcript_key_generate(const Image& image, const std::string& prompt);

class TranscriptStore {
 public:
  TranscriptStore() = default;
  TranscriptStore(TranscriptStore&& other) noexcept : entries_(std::move(other.entries_)) {}

  static TranscriptStore load(const std::string& path);
  void save(const std::string& path) const;

  // response_json is the serialized JSON payload of the response.
  void put(const std::string& provider, const std::string& key, const std::string& response_json);
  std::optional<std::string> get(const std::string& provider, const std::string& key) const;
  std::size_t size() const;
  std::string content_hash() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

// Replay-only providers; a missing entry is an error, never a fabricated value.
class TranscriptTextEmbedder : public TextEmbedder {
 public:
  TranscriptTextEmbedder(std::shared_ptr<TranscriptStore> store, std::size_t dim)
      : store_(std::move(store)), dim_(dim) {}
  EmbeddingVector embed_text(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::shared_ptr<TranscriptStore> store_;
  std::size_t dim_;
};

class TranscriptImageEmbedder : public ImageEmbedder {
 public:
  TranscriptImageEmbedder(std::shared_ptr<TranscriptStore> store, std::size_t dim)
      : store_(std::move(store)), dim_(dim) {}
  EmbeddingVector embed_image(const Image& patch) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::shared_ptr<TranscriptStore> store_;
  std::size_t dim_;
};

class TranscriptNli : public NliScorer {
 public:
  explicit TranscriptNli(std::shared_ptr<TranscriptStore> store) : store_(std::move(store)) {}
  double contradiction(const std::string& premise, const std::string& hypothesis) const override;

 private:
  std::shared_ptr<TranscriptStore> store_;
};

class TranscriptSubject : public SubjectModel {
 public:
  explicit TranscriptSubject(std::shared_ptr<TranscriptStore> store) : store_(std::move(store)) {}
  std::string generate(const Image& image, const std::string& prompt) const override;

 private:
  std::shared_ptr<TranscriptStore> store_;
};

// Recording decorators: forward to an inner provider and append the
// response to the transcript.
class RecordingTextEmbedder : public TextEmbedder {
 public:
  RecordingTextEmbedder(std::shared_ptr<TextEmbedder> inner, std::shared_ptr<TranscriptStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  EmbeddingVector embed_text(const std::string& text) const override;
  std::size_t dim() const override { return inner_->dim(); }

 private:
  std::shared_ptr<TextEmbedder> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

class RecordingImageEmbedder : public ImageEmbedder {
 public:
  RecordingImageEmbedder(std::shared_ptr<ImageEmbedder> inner,
                         std::shared_ptr<TranscriptStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  EmbeddingVector embed_image(const Image& patch) const override;
  std::size_t dim() const override { return inner_->dim(); }

 private:
  std::shared_ptr<ImageEmbedder> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

class RecordingNli : public NliScorer {
 public:
  RecordingNli(std::shared_ptr<NliScorer> inner, std::shared_ptr<TranscriptStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  double contradiction(const std::string& premise, const std::string& hypothesis) const override;

 private:
  std::shared_ptr<NliScorer> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

class RecordingSubject : public SubjectModel {
 public:
  RecordingSubject(std::shared_ptr<SubjectModel> inner, std::shared_ptr<TranscriptStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  std::string generate(const Image& image, const std::string& prompt) const override;

 private:
  std::shared_ptr<SubjectModel> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

// ---------------------------------------------------------------------------
// Remote clients speaking the wire protocol (HTTP + JSON, UTF-8):
//   POST /v1/embed_text  {"texts":[s...]}            -> {"vectors":[[f...]...],"dim":D}
//   POST /v1/embed_image {"images_png_b64":[s...]}   -> {"vectors":[[f...]...],"dim":D}
//   POST /v1/nli         {"pairs":[{premise,hypothesis}...]} -> {"contradiction":[f...]}
//   POST /v1/generate    {"image_png_b64":s,"prompt":s}      -> {"text":s}
// Failures surface as provider-unreachable errors, never as defaults.
// ---------------------------------------------------------------------------

class RemoteEndpoint {
 public:
  RemoteEndpoint(std::string host, int port, int max_inflight = 8);
  ~RemoteEndpoint();

  // Returns the response body; throws provider-unreachable on transport or
  // HTTP errors. Concurrency is bounded by max_inflight.
  std::string post_json(const std::string& path, const std::string& body) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class RemoteTextEmbedder : public TextEmbedder {
 public:
  RemoteTextEmbedder(std::shared_ptr<RemoteEndpoint> endpoint, std::size_t dim)
      : endpoint_(std::move(endpoint)), dim_(dim) {}
  EmbeddingVector embed_text(const std::string& text) const override;
  std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) const;
  std::size_t dim() const override { return dim_; }

 private:
  std::shared_ptr<RemoteEndpoint> endpoint_;
  std::size_t dim_;
};

class RemoteImageEmbedder : public ImageEmbedder {
 public:
  RemoteImageEmbedder(std::shared_ptr<RemoteEndpoint> endpoint, std::size_t dim)
      : endpoint_(std::move(endpoint)), dim_(dim) {}
  EmbeddingVector embed_image(const Image& patch) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::shared_ptr<RemoteEndpoint> endpoint_;
  std::size_t dim_;
};

class RemoteNli : public NliScorer {
 public:
  explicit RemoteNli(std::shared_ptr<RemoteEndpoint> endpoint) : endpoint_(std::move(endpoint)) {}
  double contradiction(const std::string& premise, const std::string& hypothesis) const override;

 private:
  std::shared_ptr<RemoteEndpoint> endpoint_;
};

class RemoteSubject : public SubjectModel {
 public:
  explicit RemoteSubject(std::shared_ptr<RemoteEndpoint> endpoint)
      : endpoint_(std::move(endpoint)) {}
  std::string generate(const Image& image, const std::string& prompt) const override;

 private:
  std::shared_ptr<RemoteEndpoint> endpoint_;
};

// The full provider set a pipeline run needs.
struct ProviderSet {
  std::shared_ptr<TextEmbedder> text;
  std::shared_ptr<ImageEmbedder> image;
  std::shared_ptr<NliScorer> nli;
  std::shared_ptr<SubjectModel> subject;  // may be null in report-supplied mode
};

}  // namespace pathgls
