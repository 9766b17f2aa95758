#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "topouq/error.hpp"
#include "topouq/http.hpp"
#include "topouq/topology.hpp"

namespace topouq {

using Vector = Eigen::VectorXd;

// dot(a, b) / (|a| |b|), defined as 0 when either side is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar Cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()));
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

// Maps texts to vectors. Implementations must be deterministic per
// (Id(), text), keep batch order, and tolerate concurrent Embed calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string Id() const = 0;
  virtual std::vector<Vector> Embed(std::span<const std::string> texts) = 0;
  // 0 when the dimension is only known after the first call.
  virtual Eigen::Index Dimension() const { return 0; }
};

// Offline provider: signed feature hashing of a lowercase bag of tokens.
// Identical across runs and platforms for a given seed.
class HashingProvider final : public EmbeddingProvider {
 public:
  explicit HashingProvider(std::uint64_t seed, Eigen::Index dimension = 256);

  std::string Id() const override;
  std::vector<Vector> Embed(std::span<const std::string> texts) override;
  Eigen::Index Dimension() const override { return dimension_; }

  Vector EmbedOne(std::string_view text) const;

 private:
  std::uint64_t seed_;
  Eigen::Index dimension_;
};

std::unique_ptr<EmbeddingProvider> MakeTestProvider(std::uint64_t seed);

// OpenAI-compatible POST {base_url}/v1/embeddings.
class OpenAIEmbeddingProvider final : public EmbeddingProvider {
 public:
  OpenAIEmbeddingProvider(std::string base_url, std::string model,
                          std::string api_key, HttpOptions options = {});

  std::string Id() const override;
  std::vector<Vector> Embed(std::span<const std::string> texts) override;

 private:
  std::string model_;
  JsonHttpClient http_;
};

// Persistent content-addressed vector cache. Keys are SHA-256 over
// provider-id, a 0x00 byte, and the UTF-8 text. The backing file is
// append-only JSONL; lines that fail to parse are skipped on load.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  explicit EmbeddingCache(std::filesystem::path file);

  static std::string Key(std::string_view provider_id, std::string_view text);

  std::optional<Vector> Get(std::string_view provider_id, std::string_view text) const;
  void Put(std::string_view provider_id, std::string_view text, const Vector& v);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Vector> entries_;
  std::optional<std::ofstream> out_;
};

struct EmbedOptions {
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 8;
};

// Unit-normalized vectors for `texts`, one provider request per uncached
// unique text. Empty texts map to the zero vector.
std::vector<Vector> EmbedTexts(std::span<const std::string> texts,
                               EmbeddingProvider& provider, EmbeddingCache& cache,
                               const EmbedOptions& options = {});

struct EmbeddedTopology {
  ReasoningTopology topology;
  std::vector<Vector> node_vectors;  // aligned with topology.nodes
  std::vector<Vector> edge_vectors;  // aligned with topology.edges
  std::string provider_id;
  std::set<std::string> zero_vector_ids;  // ids whose text was empty

  const Vector& NodeVector(const NodeId& id) const;
  const Vector& EdgeVector(const EdgeId& id) const;
  Eigen::Index dimension() const;

  bool operator==(const EmbeddedTopology& other) const;
};

EmbeddedTopology EmbedTopology(const ReasoningTopology& t, EmbeddingProvider& provider,
                               EmbeddingCache& cache, const EmbedOptions& options = {});

}  // namespace topouq
