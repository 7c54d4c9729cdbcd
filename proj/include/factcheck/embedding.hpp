#pragma once
// Text embedding providers.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "factcheck/core.hpp"

namespace factcheck {

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("embedding dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  /// Stable identifier stored with trained models.
  virtual std::string id() const = 0;
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;

  virtual std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Signed feature hashing of lowercase word tokens, L2-normalized. Text with
/// no tokens embeds to the zero vector.
class HashedEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedEmbedder(std::size_t dim = 64) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be >= 1");
  }

  std::size_t dim() const override { return dim_; }
  std::string id() const override { return "hashed-bow-" + std::to_string(dim_); }

  Eigen::VectorXd embed(std::string_view text) const override {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    for (const auto& tok : alnum_tokens(text)) {
      const std::uint64_t h = fnv1a64(tok);
      const auto slot = static_cast<Eigen::Index>(h % dim_);
      v[slot] += (h >> 63) ? -1.0 : 1.0;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
  }

 private:
  std::size_t dim_;
};

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace factcheck
