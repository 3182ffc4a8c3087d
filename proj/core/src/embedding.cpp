#include "factgauntlet/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("embedding must have positive dimension");
  for (const double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("embedding contains a non-finite entry");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw ValidationError("hash embedder dim must be positive");
}

std::string HashEmbedder::name() const {
  return "hash-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
}

std::size_t HashEmbedder::bucket(std::string_view token) const noexcept {
  const std::uint64_t h = splitmix64(text::fnv1a64(token) ^ splitmix64(seed_));
  return static_cast<std::size_t>(h % dim_);
}

EmbeddingVector HashEmbedder::embed(std::string_view input) const {
  if (text::trim(input).empty()) throw ValidationError("cannot embed empty text");
  const auto tokens = text::tokenize(input);
  const std::set<std::string> distinct(tokens.begin(), tokens.end());

  std::vector<double> values(dim_, 0.0);
  for (const auto& token : distinct) values[bucket(token)] += 1.0;

  double norm = 0.0;
  for (const double v : values) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : values) v /= norm;
  }
  return EmbeddingVector(std::move(values));
}

std::string encode_embedding(const EmbeddingVector& v) {
  std::vector<std::uint8_t> bytes(v.dim() * 4);
  for (std::size_t i = 0; i < v.dim(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v[i]));
    for (int b = 0; b < 4; ++b) {
      bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits & 0xff);
      bits >>= 8;
    }
  }
  return text::base64_encode(bytes);
}

EmbeddingVector decode_embedding(std::string_view base64) {
  const auto bytes = text::base64_decode(base64);
  if (bytes.empty() || bytes.size() % 4 != 0)
    throw ParseError("embedding payload is not a float32 array");
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | bytes[i * 4 + static_cast<std::size_t>(b)];
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return EmbeddingVector(std::move(values));
}

}  // namespace factgauntlet
