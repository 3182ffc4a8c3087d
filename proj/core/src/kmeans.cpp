#include <algorithm>
#include <array>
#include <random>

#include "factgauntlet/defense.hpp"
#include "factgauntlet/error.hpp"

namespace factgauntlet {

namespace {

constexpr double kDensityEpsilon = 1e-12;

std::size_t farthest_from(std::span<const EmbeddingVector> vectors,
                          std::span<const double> origin, std::size_t exclude) {
  std::size_t best = exclude == 0 ? 1 : 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (i == exclude) continue;
    const double d = squared_distance(vectors[i].values(), origin);
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> assign(std::span<const EmbeddingVector> vectors,
                        const std::array<std::vector<double>, 2>& centroids) {
  std::vector<int> out(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double d0 = squared_distance(vectors[i].values(), centroids[0]);
    const double d1 = squared_distance(vectors[i].values(), centroids[1]);
    out[i] = d1 < d0 ? 1 : 0;
  }
  return out;
}

// Moves the point farthest from its own centroid into an empty cluster.
void repair_empty(std::span<const EmbeddingVector> vectors,
                  const std::array<std::vector<double>, 2>& centroids, std::vector<int>& labels) {
  for (int c = 0; c < 2; ++c) {
    if (std::find(labels.begin(), labels.end(), c) != labels.end()) continue;
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const double d = squared_distance(vectors[i].values(), centroids[labels[i]]);
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    labels[best] = c;
  }
}

std::array<std::vector<double>, 2> means(std::span<const EmbeddingVector> vectors,
                                         const std::vector<int>& labels) {
  const std::size_t dim = vectors.front().dim();
  std::array<std::vector<double>, 2> sums{std::vector<double>(dim, 0.0),
                                          std::vector<double>(dim, 0.0)};
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    auto& sum = sums[labels[i]];
    for (std::size_t d = 0; d < dim; ++d) sum[d] += vectors[i][d];
    ++counts[labels[i]];
  }
  for (int c = 0; c < 2; ++c)
    for (auto& x : sums[c]) x /= static_cast<double>(counts[c]);
  return sums;
}

double objective(std::span<const EmbeddingVector> vectors,
                 const std::array<std::vector<double>, 2>& centroids,
                 const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    total += squared_distance(vectors[i].values(), centroids[labels[i]]);
  return total;
}

}  // namespace

void ClusterFilterConfig::validate() const {
  if (k != 2) throw ValidationError("cluster filter k must be 2");
  if (!(density_ratio_threshold > 1.0))
    throw ValidationError("density_ratio_threshold must be greater than 1");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
}

KMeansResult kmeans2(std::span<const EmbeddingVector> vectors, const ClusterFilterConfig& cfg) {
  cfg.validate();
  if (vectors.size() < 2) throw ValidationError("kmeans2 needs at least two vectors");
  const std::size_t dim = vectors.front().dim();
  for (const auto& v : vectors)
    if (v.dim() != dim) throw ValidationError("kmeans2: vector dimensions differ");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t start = rng() % vectors.size();
  const std::size_t a = farthest_from(vectors, vectors[start].values(), start);
  const std::size_t b = farthest_from(vectors, vectors[a].values(), a);

  std::array<std::vector<double>, 2> centroids{
      std::vector<double>(vectors[a].values().begin(), vectors[a].values().end()),
      std::vector<double>(vectors[b].values().begin(), vectors[b].values().end())};

  KMeansResult result;
  auto labels = assign(vectors, centroids);
  labels[a] = 0;
  labels[b] = 1;
  repair_empty(vectors, centroids, labels);
  centroids = means(vectors, labels);
  result.objective_trace.push_back(objective(vectors, centroids, labels));

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    auto next = assign(vectors, centroids);
    repair_empty(vectors, centroids, next);
    if (next == labels) {
      result.converged = true;
      break;
    }
    labels = std::move(next);
    centroids = means(vectors, labels);
    result.objective_trace.push_back(objective(vectors, centroids, labels));
  }

  result.assignments = std::move(labels);
  for (auto& c : centroids) result.centroids.emplace_back(std::move(c));
  return result;
}

double mean_pairwise_distance(std::span<const EmbeddingVector> vectors,
                              std::span<const std::size_t> members) {
  if (members.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j, ++pairs)
      total += euclidean_distance(vectors[members[i]].values(), vectors[members[j]].values());
  return total / static_cast<double>(pairs);
}

std::vector<bool> cluster_keep_mask(std::span<const EmbeddingVector> vectors,
                                    const ClusterFilterConfig& cfg) {
  cfg.validate();
  std::vector<bool> keep(vectors.size(), true);
  if (vectors.size() < 3) return keep;

  const auto result = kmeans2(vectors, cfg);
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    members[result.assignments[i]].push_back(i);
  if (members[0].size() < 2 || members[1].size() < 2) return keep;

  const double d0 = mean_pairwise_distance(vectors, members[0]);
  const double d1 = mean_pairwise_distance(vectors, members[1]);
  const double ratio = std::max(d0, d1) / std::max(kDensityEpsilon, std::min(d0, d1));
  if (ratio < cfg.density_ratio_threshold) return keep;

  const int denser = d0 <= d1 ? 0 : 1;
  for (const auto i : members[denser]) keep[i] = false;
  return keep;
}

std::vector<Evidence> cluster_filter(std::span<const EmbeddedEvidence> retrieved,
                                     const ClusterFilterConfig& cfg) {
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(retrieved.size());
  for (const auto& r : retrieved) vectors.push_back(r.embedding);
  const auto keep = cluster_keep_mask(vectors, cfg);
  std::vector<Evidence> out;
  for (std::size_t i = 0; i < retrieved.size(); ++i)
    if (keep[i]) out.push_back(retrieved[i].evidence);
  return out;
}

}  // namespace factgauntlet
