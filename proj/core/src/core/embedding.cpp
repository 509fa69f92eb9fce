#include "hallucount/core/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hallucount/core/error.hpp"

namespace hallucount {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "embedding must have dim >= 1");
}

double EmbeddingVector::norm() const {
  return std::sqrt(std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0));
}

EmbeddingVector unit_normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (n == 0.0) throw Error(ErrorCode::kZeroVector, "cannot normalize the zero vector");
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const auto av = a.values();
  const auto bv = b.values();
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    dot += av[i] * bv[i];
    aa += av[i] * av[i];
    bb += bv[i] * bv[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of the zero vector");
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

}  // namespace hallucount
