// Randomized property checks. Every generator is seeded so failures replay.
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "factgauntlet/allocation.hpp"
#include "factgauntlet/attacks.hpp"
#include "factgauntlet/bootstrap.hpp"
#include "factgauntlet/defense.hpp"
#include "factgauntlet/domain.hpp"
#include "factgauntlet/knowledge_base.hpp"
#include "factgauntlet/metrics.hpp"
#include "test_support.hpp"

using namespace factgauntlet;

namespace {

constexpr int kCases = 300;

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("allocation: integer weights against an exact integer ceiling") {
  std::mt19937_64 rng(11);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 10;
    const std::size_t m = rng() % 200;
    std::vector<double> w(n);
    std::uint64_t total = 0;
    for (auto& x : w) {
      x = static_cast<double>(rng() % 11);
      total += static_cast<std::uint64_t>(x);
    }
    const auto got = f2f_allocate(m, w);
    REQUIRE(got.size() == n);
    if (total == 0) {
      for (auto g : got) CHECK(g == (m + n - 1) / n);
      continue;
    }
    std::size_t sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto num = m * static_cast<std::uint64_t>(w[k]);
      CHECK(got[k] == (num + total - 1) / total);
      sum += got[k];
    }
    CHECK(sum >= m);
    CHECK(sum < m + n + 1);
  }
}

TEST_CASE("allocation: scaling weights by a power of two changes nothing") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> w(n), scaled(n);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = unif(rng);
      scaled[k] = w[k] * 1024.0;
    }
    const std::size_t m = rng() % 100;
    CHECK(f2f_allocate(m, w) == f2f_allocate(m, scaled));
  }
}

TEST_CASE("allocation: more budget never shrinks any share") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> w(n);
    for (auto& x : w) x = unif(rng);
    const std::size_t m = rng() % 100;
    const auto lo = f2f_allocate(m, w);
    const auto hi = f2f_allocate(m + 1, w);
    for (std::size_t k = 0; k < n; ++k) CHECK(lo[k] <= hi[k]);
  }
}

TEST_CASE("poison count stays within [1, max(1, round(rate * n))]") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> rate(1e-4, 1.0);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 2000;
    const double r = rate(rng);
    const auto count = compute_poison_count(r, n);
    CHECK(count >= 1);
    CHECK(count <= std::max<std::size_t>(1, n));
    CHECK(count == std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r * n))));
  }
}

TEST_CASE("retrieval agrees with a brute-force sort") {
  std::mt19937_64 rng(15);
  for (int c = 0; c < 100; ++c) {
    const std::size_t dim = 1 + rng() % 16;
    const std::size_t n = 1 + rng() % 60;
    std::vector<KbEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse integer coordinates produce plenty of exact ties.
      std::vector<double> v(dim);
      for (auto& x : v) x = static_cast<double>(static_cast<int>(rng() % 5) - 2);
      entries.push_back(fgtest::entry("id" + std::to_string(rng() % 100000) + "-" + std::to_string(i),
                                      std::move(v)));
    }
    const KnowledgeBase kb("c", dim, entries);
    std::vector<double> q(dim);
    for (auto& x : q) x = static_cast<double>(static_cast<int>(rng() % 5) - 2);
    const std::size_t k = 1 + rng() % 12;

    std::vector<std::pair<double, std::string>> oracle;
    for (const auto& e : entries) {
      double d = 0;
      for (std::size_t i = 0; i < dim; ++i) d += (e.embedding[i] - q[i]) * (e.embedding[i] - q[i]);
      oracle.emplace_back(d, e.evidence.id());
    }
    std::sort(oracle.begin(), oracle.end());
    const auto got = retrieve(kb, EmbeddingVector(q), k);
    REQUIRE(got.size() == std::min(k, n));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].id() == oracle[i].second);
  }
}

TEST_CASE("metrics: bounded, asr <= sfr, order independent") {
  std::mt19937_64 rng(16);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<ClaimResult> rs(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = rs[i];
      r.claim_id = "c" + std::to_string(i);
      r.gold = rng() % 2 ? VeracityLabel::Supported : VeracityLabel::Refuted;
      r.post_verdict = static_cast<VeracityLabel>(rng() % 4);
      r.outcome = classify_outcome(r.gold, r.post_verdict);
      r.retrieved_total = rng() % 6;
      r.retrieved_malicious = r.retrieved_total ? rng() % (r.retrieved_total + 1) : 0;
      CHECK_NOTHROW(r.validate());
    }
    const auto m = compute_core_metrics(rs);
    CHECK(m.asr >= 0.0);
    CHECK(m.asr <= m.sfr);
    CHECK(m.sfr <= 1.0);
    CHECK(m.sir >= 0.0);
    CHECK(m.sir <= 1.0);
    std::shuffle(rs.begin(), rs.end(), rng);
    CHECK(compute_core_metrics(rs) == m);
  }
}

TEST_CASE("outcome classes partition every (gold, verdict) pair") {
  for (auto gold : {VeracityLabel::Supported, VeracityLabel::Refuted}) {
    for (int v = 0; v < 4; ++v) {
      const auto post = static_cast<VeracityLabel>(v);
      const auto o = classify_outcome(gold, post);
      if (post == gold)
        CHECK(o == OutcomeClass::Unchanged);
      else if (post == invert_label(gold))
        CHECK(o == OutcomeClass::Inverted);
      else
        CHECK(o == OutcomeClass::Degraded);
      CHECK(is_failure(o) == (post != gold));
    }
  }
}

TEST_CASE("bootstrap: p in [0, 1] and p(a,b) + p(b,a) >= 1 under a shared seed") {
  std::mt19937_64 rng(17);
  for (int c = 0; c < 40; ++c) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % 2);
      b[i] = static_cast<int>(rng() % 2);
    }
    const auto seed = rng();
    const double ab = paired_bootstrap(a, b, 1000, seed);
    const double ba = paired_bootstrap(b, a, 1000, seed);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ab + ba >= 1.0);
  }
}

TEST_CASE("kmeans2: objective never increases and assignments are nearest-centroid") {
  std::mt19937_64 rng(18);
  for (int c = 0; c < 60; ++c) {
    const std::size_t n = 2 + rng() % 40;
    const std::size_t dim = 1 + rng() % 8;
    std::vector<EmbeddingVector> vs;
    for (std::size_t i = 0; i < n; ++i) vs.emplace_back(gaussian(rng, dim));
    ClusterFilterConfig cfg;
    cfg.seed = rng();
    const auto r = kmeans2(vs, cfg);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-9);
    if (r.converged) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d0 = squared_distance(vs[i].values(), r.centroids[0].values());
        const double d1 = squared_distance(vs[i].values(), r.centroids[1].values());
        CHECK(std::min(d0, d1) == doctest::Approx(r.assignments[i] == 0 ? d0 : d1));
      }
    }
  }
}
