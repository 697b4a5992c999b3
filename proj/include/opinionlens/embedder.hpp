#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace opinionlens {

using EmbeddingVector = std::vector<double>;

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double l2_norm(const EmbeddingVector& v);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Text → fixed-dimension vector. Implementations are immutable after
// construction and safe to call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  // Identifies the backend and every setting that changes its output. Models
  // record it so a pipeline refuses heads trained on a different embedder.
  virtual std::string id() const = 0;
  // Throws Error(kEmptyText) for whitespace-only input.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual nlohmann::ordered_json config_json() const = 0;

  // Errors carry the index of the first failing text.
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
};

struct HashedNgramConfig {
  std::size_t dim = 512;
  std::set<int> word_ngrams{1, 2};
  std::set<int> char_ngrams{3, 4, 5};
  std::uint64_t hash_seed = 0;
  bool signed_hash = true;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static HashedNgramConfig from_json(const nlohmann::json& j);
};

// Signed feature hashing over lowercased word n-grams and per-word character
// n-grams (with "<" ">" boundary marks), accumulated ±1 then L2-normalized.
// Tokens are split on whitespace, so the output ignores spacing differences.
class HashedNgramEmbedder final : public Embedder {
 public:
  explicit HashedNgramEmbedder(HashedNgramConfig config = {});

  std::size_t dim() const override { return config_.dim; }
  std::string id() const override;
  EmbeddingVector embed(std::string_view text) const override;
  nlohmann::ordered_json config_json() const override;

  const HashedNgramConfig& config() const { return config_; }

  // Feature strings that embed() hashes for `text`, in order (with repeats).
  std::vector<std::string> features(std::string_view text) const;
  // Bucket and sign for one feature string.
  std::pair<std::size_t, double> bucket(std::string_view feature) const;

 private:
  HashedNgramConfig config_;
};

// Key used by the precomputed store: sha256 of the text with whitespace runs
// collapsed and ends trimmed.
std::string text_digest(std::string_view text);

// Vectors exported offline from an external sentence encoder, looked up by
// text digest. Returned verbatim as stored.
class PrecomputedStore final : public Embedder {
 public:
  PrecomputedStore(std::size_t dim, std::string digest_algo = "sha256");

  // Header "dim=<D> digest=<algo>", then "<hex-digest>\t<v1> … <vD>" rows.
  static PrecomputedStore parse(std::string_view content);
  static PrecomputedStore load(const std::string& path);
  std::string serialize() const;

  void insert(const std::string& digest, EmbeddingVector v);
  std::size_t size() const { return vectors_.size(); }
  const std::string& path_hint() const { return path_hint_; }
  void set_path_hint(std::string p) { path_hint_ = std::move(p); }

  std::size_t dim() const override { return dim_; }
  std::string id() const override;
  // Throws kMissingVector when the digest is absent.
  EmbeddingVector embed(std::string_view text) const override;
  nlohmann::ordered_json config_json() const override;

  const std::map<std::string, EmbeddingVector>& vectors() const { return vectors_; }

 private:
  std::size_t dim_;
  std::string digest_algo_;
  std::map<std::string, EmbeddingVector> vectors_;
  std::string path_hint_;
};

// Builds an embedder from config_json() output. Precomputed stores resolve
// their "store" path relative to `base_dir`.
std::shared_ptr<const Embedder> make_embedder(const nlohmann::json& config,
                                              const std::string& base_dir = ".");

}  // namespace opinionlens
