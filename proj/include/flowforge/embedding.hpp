#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

inline constexpr std::size_t kEmbeddingDims = 256;

// L2 norm is exactly 0 (empty text) or 1 within rounding.
struct EmbeddingVector {
  std::array<double, kEmbeddingDims> values{};

  [[nodiscard]] double norm() const noexcept;
  [[nodiscard]] bool is_zero() const noexcept;

  friend bool operator==(const EmbeddingVector &, const EmbeddingVector &) = default;
};

[[nodiscard]] double dot(const EmbeddingVector &a, const EmbeddingVector &b) noexcept;

class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  [[nodiscard]] virtual std::string_view name() const noexcept = 0;
  // True when the same text always yields the same vector without I/O;
  // such indexes are rebuilt from stored text on open.
  [[nodiscard]] virtual bool deterministic() const noexcept = 0;
  // Unnormalized kEmbeddingDims-wide vector for non-empty text.
  [[nodiscard]] virtual std::vector<double> raw_embedding(std::string_view text) = 0;
};

using EmbeddingProviderPtr = std::shared_ptr<EmbeddingProvider>;

// Lowercased alphanumeric runs, followed by adjacent bigrams ("a b").
[[nodiscard]] std::vector<std::string> embedding_tokens(std::string_view text);

// Tokens hashed with 64-bit FNV-1a into kEmbeddingDims count buckets.
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
  [[nodiscard]] std::string_view name() const noexcept override { return "deterministic"; }
  [[nodiscard]] bool deterministic() const noexcept override { return true; }
  [[nodiscard]] std::vector<double> raw_embedding(std::string_view text) override;
};

[[nodiscard]] EmbeddingProviderPtr make_default_provider();

// Empty text maps to the zero vector without consulting the provider.
// Provider output must be kEmbeddingDims finite values (ProviderUnavailable
// otherwise) and is L2-normalized here.
[[nodiscard]] EmbeddingVector embed(std::string_view text, EmbeddingProvider &provider);

} // namespace flowforge
