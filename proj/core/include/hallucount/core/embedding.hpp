#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hallucount {

/// Dense embedding. Dimension is fixed at construction and must be positive.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Scales v to unit L2 norm. Throws kZeroVector for an all-zero input.
EmbeddingVector unit_normalize(const EmbeddingVector& v);

/// dot(a, b) / (|a| |b|), clamped into [-1, 1] against rounding drift.
/// Throws kDimensionMismatch or kZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace hallucount
