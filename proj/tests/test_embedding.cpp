#include <doctest.h>

#include <cmath>
#include <random>

#include "testing.hpp"
#include "topouq/embedding.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

// Wraps a provider and counts Embed calls and texts.
class CountingProvider final : public EmbeddingProvider {
 public:
  explicit CountingProvider(EmbeddingProvider& inner) : inner_(inner) {}
  std::string Id() const override { return inner_.Id(); }
  std::vector<Vector> Embed(std::span<const std::string> texts) override {
    ++calls;
    texts_seen += texts.size();
    return inner_.Embed(texts);
  }
  Eigen::Index Dimension() const override { return inner_.Dimension(); }

  std::size_t calls = 0;
  std::size_t texts_seen = 0;

 private:
  EmbeddingProvider& inner_;
};

std::string Words(std::mt19937_64& rng, char prefix, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i > 0) s += ' ';
    s += prefix;
    s += std::to_string(rng() % 100000);
  }
  return s;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("cosine fixtures") {
  Vector a(2), b(2), c(2), z = Vector::Zero(2);
  a << 1, 0;
  b << 0, 1;
  c << 1, 1;
  CHECK(Cosine(a, a) == doctest::Approx(1.0));
  CHECK(Cosine(a, b) == doctest::Approx(0.0));
  CHECK(Cosine(a, c) == doctest::Approx(std::sqrt(0.5)));
  CHECK(Cosine(a, -a) == doctest::Approx(-1.0));
  CHECK(Cosine(a, z) == 0.0);
  CHECK_THROWS_AS(Cosine(a, Vector::Zero(3)), Error);
}

TEST_CASE("hashing vectors are unit length and deterministic") {
  HashingProvider p(0);
  const Vector v = p.EmbedOne("summer in the southern hemisphere");
  CHECK(v.size() == 256);
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK(HashingProvider(0).EmbedOne("summer in the southern hemisphere") == v);
  CHECK(HashingProvider(1).EmbedOne("summer in the southern hemisphere") != v);
}

TEST_CASE("token-disjoint texts are near orthogonal") {
  // Three same-sign bucket collisions out of ten tokens already give 0.3, so
  // the bound is a tail rate rather than a maximum (about 0.1% of pairs).
  HashingProvider p(0);
  std::mt19937_64 rng(12345);
  const int n = 20000;
  int over = 0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector a = p.EmbedOne(Words(rng, 'a', 10));
    const Vector b = p.EmbedOne(Words(rng, 'b', 10));
    const double c = std::abs(Cosine(a, b));
    total += c;
    over += c >= 0.3 - 1e-12 ? 1 : 0;
  }
  CHECK(total / n < 0.05);
  CHECK(over < n / 200);
}

TEST_CASE("bag of tokens ignores order and case") {
  HashingProvider p(3);
  const Vector a = p.EmbedOne("Canada is north");
  const Vector b = p.EmbedOne("north is canada");
  CHECK(Cosine(a, b) == doctest::Approx(1.0));
}

TEST_CASE("cache makes warm runs bitwise equal to cold runs") {
  const auto dir = ScratchDir("embed-cache");
  HashingProvider base(0);
  const std::vector<std::string> texts = {"earth tilt", "ocean current", "", "earth tilt"};

  CountingProvider cold_provider(base);
  std::vector<Vector> cold;
  {
    EmbeddingCache cache(dir / "cache.jsonl");
    cold = EmbedTexts(texts, cold_provider, cache);
  }
  CHECK(cold_provider.texts_seen == 2);

  CountingProvider warm_provider(base);
  EmbeddingCache reloaded(dir / "cache.jsonl");
  CHECK(reloaded.size() == 2);
  const std::vector<Vector> warm = EmbedTexts(texts, warm_provider, reloaded);
  CHECK(warm_provider.calls == 0);
  REQUIRE(warm.size() == cold.size());
  for (std::size_t i = 0; i < warm.size(); ++i) CHECK(warm[i] == cold[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical texts are embedded once") {
  HashingProvider base(0);
  CountingProvider p(base);
  EmbeddingCache cache;
  const std::vector<std::string> texts = {"same words", "same words"};
  const auto v = EmbedTexts(texts, p, cache);
  CHECK(p.calls == 1);
  CHECK(p.texts_seen == 1);
  CHECK(v[0] == v[1]);
}

TEST_CASE("empty text maps to the zero vector") {
  HashingProvider p(0);
  EmbeddingCache cache;
  ReasoningTopology t = CanadaTopology();
  t.answer.clear();
  for (auto& n : t.nodes) {
    if (n.id.value == kNodeResult) n.text.clear();
  }
  const EmbeddedTopology g = EmbedTopology(t, p, cache);
  const Vector& r = g.NodeVector(NodeId(std::string(kNodeResult)));
  CHECK(r.size() == 256);
  CHECK(r.isZero(0.0));
  CHECK(g.zero_vector_ids.count(std::string(kNodeResult)) == 1);
  CHECK(g.NodeVector(NodeId("Node0")).norm() == doctest::Approx(1.0));
}

TEST_CASE("cache keys separate providers") {
  CHECK(EmbeddingCache::Key("p1", "text") != EmbeddingCache::Key("p2", "text"));
  CHECK(EmbeddingCache::Key("p1", "text") == EmbeddingCache::Key("p1", "text"));
  CHECK(EmbeddingCache::Key("p1", "text").size() == 64);
}

}
