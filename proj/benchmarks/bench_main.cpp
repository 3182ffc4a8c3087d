// Micro-benchmarks for the hot numeric paths: exact k-NN retrieval, the
// 2-means cluster filter, the paired bootstrap and hash embedding.
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "factgauntlet/bootstrap.hpp"
#include "factgauntlet/defense.hpp"
#include "factgauntlet/embedding.hpp"
#include "factgauntlet/knowledge_base.hpp"

namespace fg = factgauntlet;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

fg::KnowledgeBase random_kb(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<fg::KbEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    entries.push_back({fg::Evidence("e" + std::to_string(i), "evidence " + std::to_string(i)),
                       fg::EmbeddingVector(random_vector(rng, dim))});
  return fg::KnowledgeBase("claim", dim, std::move(entries));
}

void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto kb = random_kb(n, 256, 1);
  std::mt19937_64 rng(2);
  const fg::EmbeddingVector query(random_vector(rng, 256));
  for (auto _ : state) benchmark::DoNotOptimize(fg::retrieve(kb, query, 5));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Retrieve)->Arg(100)->Arg(1000)->Arg(10000);

void BM_KMeans2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::vector<fg::EmbeddingVector> vectors;
  for (std::size_t i = 0; i < n; ++i) vectors.emplace_back(random_vector(rng, 256));
  const fg::ClusterFilterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fg::kmeans2(vectors, cfg));
}
BENCHMARK(BM_KMeans2)->Arg(5)->Arg(50)->Arg(500);

void BM_PairedBootstrap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = coin(rng);
    b[i] = coin(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fg::paired_bootstrap(a, b, 10000, 7));
}
BENCHMARK(BM_PairedBootstrap)->Arg(100)->Arg(1000);

void BM_HashEmbed(benchmark::State& state) {
  const fg::HashEmbedder embedder(static_cast<std::size_t>(state.range(0)), 0);
  const std::string text =
      "The county council approved the new transit budget on Tuesday after a three hour "
      "hearing in which residents argued over bus routes and fare increases.";
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
}
BENCHMARK(BM_HashEmbed)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
