#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factgauntlet {

/// Dense embedding. All entries are finite; an empty vector is rejected.
class EmbeddingVector {
 public:
  /// Throws ValidationError on empty input or non-finite entries.
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

/// Euclidean distance. Dimensions must match (checked by callers).
double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Text -> vector. Implementations must be safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  /// Throws ValidationError on empty text; BackendError from remote embedders.
  virtual EmbeddingVector embed(std::string_view text) const = 0;

  /// Default loops over embed(); remote embedders override to batch.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

/// Deterministic bag-of-tokens projector used for tests and offline runs.
///
/// Each distinct token (see text::tokenize) is hashed with a seeded 64-bit
/// hash into one of `dim` buckets and contributes +1 there; the vector is then
/// L2-normalized. Token multiplicity and order are ignored, so two texts with
/// the same token set map to the same vector. Text without any token maps to
/// the zero vector.
class HashEmbedder final : public Embedder {
 public:
  HashEmbedder(std::size_t dim, std::uint64_t seed);

  std::string name() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

  /// Bucket a token lands in. Exposed so tests can reason about collisions.
  std::size_t bucket(std::string_view token) const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Little-endian float32 packing used by the KB cache format.
std::string encode_embedding(const EmbeddingVector& v);
EmbeddingVector decode_embedding(std::string_view base64);

}  // namespace factgauntlet
