#include "flowforge/embedding.hpp"

#include "flowforge/error.hpp"
#include "flowforge/hash.hpp"

#include <cctype>
#include <cmath>

namespace flowforge {

double EmbeddingVector::norm() const noexcept { return std::sqrt(dot(*this, *this)); }

bool EmbeddingVector::is_zero() const noexcept {
  for (double v : values) {
    if (v != 0.0)
      return false;
  }
  return true;
}

double dot(const EmbeddingVector &a, const EmbeddingVector &b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDims; ++i)
    s += a.values[i] * b.values[i];
  return s;
}

std::vector<std::string> embedding_tokens(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty())
    words.push_back(std::move(cur));

  std::vector<std::string> tokens = words;
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    tokens.push_back(words[i] + " " + words[i + 1]);
  return tokens;
}

std::vector<double> HashingEmbeddingProvider::raw_embedding(std::string_view text) {
  std::vector<double> counts(kEmbeddingDims, 0.0);
  for (const auto &tok : embedding_tokens(text))
    counts[fnv1a64(tok) % kEmbeddingDims] += 1.0;
  return counts;
}

EmbeddingProviderPtr make_default_provider() {
  return std::make_shared<HashingEmbeddingProvider>();
}

EmbeddingVector embed(std::string_view text, EmbeddingProvider &provider) {
  EmbeddingVector out;
  if (text.empty())
    return out;
  const std::vector<double> raw = provider.raw_embedding(text);
  if (raw.size() != kEmbeddingDims)
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(provider.name()) + " returned " + std::to_string(raw.size()) +
                    " dimensions, expected " + std::to_string(kEmbeddingDims));
  double sq = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v))
      throw Error(ErrorCode::ProviderUnavailable,
                  std::string(provider.name()) + " returned a non-finite component");
    sq += v * v;
  }
  if (sq == 0.0)
    return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < kEmbeddingDims; ++i)
    out.values[i] = raw[i] * inv;
  return out;
}

} // namespace flowforge
