#include "topouq/embedding.hpp"

#include <cmath>
#include <mutex>

#include "topouq/parallel.hpp"
#include "topouq/text.hpp"

namespace topouq {

HashingProvider::HashingProvider(std::uint64_t seed, Eigen::Index dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension_ <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "hashing dimension must be positive");
  }
}

std::string HashingProvider::Id() const {
  return "hashing-bow-d" + std::to_string(dimension_) + "-s" + std::to_string(seed_);
}

Vector HashingProvider::EmbedOne(std::string_view text) const {
  Vector v = Vector::Zero(dimension_);
  if (text.empty()) return v;
  std::vector<std::string> tokens = Tokenize(text);
  if (tokens.empty()) tokens.emplace_back(text);  // punctuation-only text
  const std::uint64_t salt = Mix64(seed_);
  for (const std::string& token : tokens) {
    const std::uint64_t h = Mix64(Fnv1a64(token) ^ salt);
    const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension_));
    v[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

std::vector<Vector> HashingProvider::Embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(EmbedOne(t));
  return out;
}

std::unique_ptr<EmbeddingProvider> MakeTestProvider(std::uint64_t seed) {
  return std::make_unique<HashingProvider>(seed);
}

OpenAIEmbeddingProvider::OpenAIEmbeddingProvider(std::string base_url, std::string model,
                                                 std::string api_key, HttpOptions options)
    : model_(std::move(model)), http_(std::move(base_url), std::move(api_key), options) {}

std::string OpenAIEmbeddingProvider::Id() const {
  return "openai:" + http_.base_url() + ":" + model_;
}

std::vector<Vector> OpenAIEmbeddingProvider::Embed(std::span<const std::string> texts) {
  nlohmann::json body = {{"model", model_},
                         {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const nlohmann::json response = http_.Post("/v1/embeddings", body);
  const auto data = response.find("data");
  if (data == response.end() || !data->is_array() || data->size() != texts.size()) {
    throw Error(ErrorKind::kProviderUnavailable,
                "embeddings response does not hold one entry per input");
  }
  std::vector<Vector> out(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const nlohmann::json& item = (*data)[i];
    // Entries carry an index; fall back to array position when absent.
    const std::size_t slot = item.value("index", i);
    const auto embedding = item.find("embedding");
    if (slot >= out.size() || embedding == item.end() || !embedding->is_array()) {
      throw Error(ErrorKind::kProviderUnavailable, "malformed embeddings entry");
    }
    Vector v(static_cast<Eigen::Index>(embedding->size()));
    for (std::size_t k = 0; k < embedding->size(); ++k) {
      v[static_cast<Eigen::Index>(k)] = (*embedding)[k].get<double>();
    }
    out[slot] = std::move(v);
  }
  return out;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path file) {
  if (std::filesystem::exists(file)) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
      if (Trim(line).empty()) continue;
      try {
        const nlohmann::json j = nlohmann::json::parse(line);
        const auto& values = j.at("vector");
        Vector v(static_cast<Eigen::Index>(values.size()));
        for (std::size_t k = 0; k < values.size(); ++k) {
          v[static_cast<Eigen::Index>(k)] = values[k].get<double>();
        }
        entries_.insert_or_assign(j.at("key").get<std::string>(), std::move(v));
      } catch (const nlohmann::json::exception&) {
        // A torn final line from an interrupted run.
      }
    }
  } else if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  out_.emplace(file, std::ios::app);
  if (!*out_) {
    throw Error(ErrorKind::kIo, "cannot open embedding cache " + file.string());
  }
}

std::string EmbeddingCache::Key(std::string_view provider_id, std::string_view text) {
  std::string buf;
  buf.reserve(provider_id.size() + 1 + text.size());
  buf.append(provider_id);
  buf.push_back('\0');
  buf.append(text);
  return Sha256Hex(buf);
}

std::optional<Vector> EmbeddingCache::Get(std::string_view provider_id,
                                          std::string_view text) const {
  const std::string key = Key(provider_id, text);
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::Put(std::string_view provider_id, std::string_view text,
                         const Vector& v) {
  const std::string key = Key(provider_id, text);
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, v).second) return;
  if (out_) {
    nlohmann::json line = {{"key", key},
                           {"provider", provider_id},
                           {"vector", std::vector<double>(v.data(), v.data() + v.size())}};
    *out_ << line.dump() << '\n';
    out_->flush();
  }
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<Vector> EmbedTexts(std::span<const std::string> texts,
                               EmbeddingProvider& provider, EmbeddingCache& cache,
                               const EmbedOptions& options) {
  const std::string provider_id = provider.Id();

  // Unique nonempty texts in first-occurrence order.
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot_of;
  for (const std::string& t : texts) {
    if (t.empty()) continue;
    if (slot_of.emplace(t, unique.size()).second) unique.push_back(t);
  }

  std::vector<std::optional<Vector>> raw(unique.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    raw[i] = cache.Get(provider_id, unique[i]);
    if (!raw[i]) missing.push_back(i);
  }

  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n_batches = (missing.size() + batch - 1) / batch;
  ParallelFor(n_batches, options.max_in_flight, [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t end = std::min(missing.size(), begin + batch);
    std::vector<std::string> chunk;
    for (std::size_t k = begin; k < end; ++k) chunk.push_back(unique[missing[k]]);
    std::vector<Vector> vectors = provider.Embed(chunk);
    if (vectors.size() != chunk.size()) {
      throw Error(ErrorKind::kProviderUnavailable,
                  "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                      std::to_string(chunk.size()) + " texts");
    }
    for (std::size_t k = begin; k < end; ++k) {
      const Vector& v = vectors[k - begin];
      if (!v.allFinite()) {
        throw Error(ErrorKind::kProviderUnavailable, "provider returned non-finite values");
      }
      cache.Put(provider_id, unique[missing[k]], v);
      raw[missing[k]] = v;
    }
  });

  Eigen::Index dim = provider.Dimension();
  for (const auto& v : raw) {
    if (dim == 0) dim = v->size();
    if (v->size() != dim) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "embedding dimensions " + std::to_string(dim) + " and " +
                      std::to_string(v->size()) + " for provider " + provider_id);
    }
  }

  std::vector<Vector> normalized(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const double norm = raw[i]->norm();
    normalized[i] = norm > 0.0 ? Vector(*raw[i] / norm) : Vector::Zero(dim);
  }

  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) {
    out.push_back(t.empty() ? Vector::Zero(dim) : normalized[slot_of.at(t)]);
  }
  return out;
}

const Vector& EmbeddedTopology::NodeVector(const NodeId& id) const {
  const auto idx = topology.NodeIndex(id);
  if (!idx) throw Error(ErrorKind::kUnknownId, "node " + id.value);
  return node_vectors[*idx];
}

const Vector& EmbeddedTopology::EdgeVector(const EdgeId& id) const {
  const auto idx = topology.EdgeIndex(id);
  if (!idx) throw Error(ErrorKind::kUnknownId, "edge " + id.value);
  return edge_vectors[*idx];
}

Eigen::Index EmbeddedTopology::dimension() const {
  if (!node_vectors.empty()) return node_vectors.front().size();
  if (!edge_vectors.empty()) return edge_vectors.front().size();
  return 0;
}

bool EmbeddedTopology::operator==(const EmbeddedTopology& other) const {
  auto same = [](const std::vector<Vector>& a, const std::vector<Vector>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].size() != b[i].size() || a[i] != b[i]) return false;
    }
    return true;
  };
  return topology == other.topology && provider_id == other.provider_id &&
         zero_vector_ids == other.zero_vector_ids &&
         same(node_vectors, other.node_vectors) && same(edge_vectors, other.edge_vectors);
}

EmbeddedTopology EmbedTopology(const ReasoningTopology& t, EmbeddingProvider& provider,
                               EmbeddingCache& cache, const EmbedOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(t.nodes.size() + t.edges.size());
  for (const Node& n : t.nodes) texts.push_back(n.text);
  for (const Edge& e : t.edges) texts.push_back(e.text);

  std::vector<Vector> vectors = EmbedTexts(texts, provider, cache, options);

  EmbeddedTopology out;
  out.topology = t;
  out.provider_id = provider.Id();
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].text.empty()) out.zero_vector_ids.insert(t.nodes[i].id.value);
    out.node_vectors.push_back(std::move(vectors[i]));
  }
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    if (t.edges[i].text.empty()) out.zero_vector_ids.insert(t.edges[i].id.value);
    out.edge_vectors.push_back(std::move(vectors[t.nodes.size() + i]));
  }
  return out;
}

}  // namespace topouq
