#pragma once

// Distances for numeric vectors and pre-tokenized translations.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "iaa/error.hpp"
#include "iaa/model.hpp"

namespace iaa {

enum class VectorMode { binary, euclidean };

/// binary: fraction of unequal elements. euclidean: RMSE of range-normalized differences.
inline double vector_distance(std::span<const double> a, std::span<const double> b,
                              VectorMode mode, const VectorRanges& ranges) {
  if (a.size() != b.size()) throw ValidationError("vector length mismatch");
  if (mode == VectorMode::binary) {
    if (a.empty()) return 0.0;
    std::size_t unequal = 0;
    for (std::size_t i = 0; i < a.size(); ++i) unequal += a[i] != b[i];
    return static_cast<double>(unequal) / static_cast<double>(a.size());
  }
  if (ranges.size() != a.size()) throw ValidationError("vector length != number of ranges");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double width = ranges[i].width();
    if (!(width > 0)) throw ValidationError("zero-width range for dimension " + std::to_string(i));
    const double d = (a[i] - b[i]) / width;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

/// Classical unit-cost edit distance over tokens.
inline std::size_t token_edit_distance(std::span<const std::string> a,
                                       std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), curr(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

/// Token edit distance, divided by max(|a|, |b|) unless `normalize` is false.
inline double levenshtein_distance(std::span<const std::string> a, std::span<const std::string> b,
                                   bool normalize = true) {
  const auto raw = static_cast<double>(token_edit_distance(a, b));
  if (!normalize) return raw;
  const std::size_t longest = std::max(a.size(), b.size());
  return longest == 0 ? 0.0 : raw / static_cast<double>(longest);
}

namespace detail {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

inline NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + i, tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

inline std::size_t total(const NgramCounts& counts) {
  std::size_t n = 0;
  for (const auto& [gram, c] : counts) n += c;
  return n;
}

}  // namespace detail

/// Sentence-level BLEU of `hypothesis` against a single `reference`: uniform 1..4-gram
/// weights, clipped n-gram precision, brevity penalty, and smoothing method 4 with
/// constant `k` as released in nltk 3.4.5 (a zero precision at 0-based order i becomes
/// 1 / (i + k / ln |hypothesis|)).
inline double sentence_bleu(std::span<const std::string> reference,
                            std::span<const std::string> hypothesis, double k = 5.0) {
  constexpr std::size_t kMaxOrder = 4;
  std::array<std::size_t, kMaxOrder> numerators{};
  std::array<std::size_t, kMaxOrder> denominators{};
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto hyp = detail::count_ngrams(hypothesis, n);
    const auto ref = detail::count_ngrams(reference, n);
    std::size_t clipped = 0;
    for (const auto& [gram, count] : hyp) {
      auto it = ref.find(gram);
      if (it != ref.end()) clipped += std::min(count, it->second);
    }
    numerators[n - 1] = clipped;
    denominators[n - 1] = std::max<std::size_t>(1, detail::total(hyp));
  }

  const auto hyp_len = static_cast<double>(hypothesis.size());
  const auto ref_len = static_cast<double>(reference.size());
  double brevity = 1.0;
  if (hyp_len == 0) {
    brevity = 0.0;
  } else if (hyp_len <= ref_len) {
    brevity = std::exp(1.0 - ref_len / hyp_len);
  }

  if (numerators[0] == 0) return 0.0;

  double log_sum = 0.0;
  for (std::size_t i = 0; i < kMaxOrder; ++i) {
    double p;
    if (numerators[i] == 0) {
      // ln(1) = 0 makes the increment infinite and the precision 0, hence BLEU 0.
      const double increment = static_cast<double>(i) + k / std::log(hyp_len);
      p = 1.0 / increment;
    } else {
      p = static_cast<double>(numerators[i]) / static_cast<double>(denominators[i]);
    }
    log_sum += 0.25 * std::log(p);
  }
  return brevity * std::exp(log_sum);
}

/// Sentence-level GLEU: matched 1..4-grams over max(total hypothesis n-grams, total
/// reference n-grams), i.e. min(precision, recall). Symmetric in its arguments.
inline double sentence_gleu(std::span<const std::string> reference,
                            std::span<const std::string> hypothesis) {
  std::size_t matches = 0, hyp_total = 0, ref_total = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto hyp = detail::count_ngrams(hypothesis, n);
    const auto ref = detail::count_ngrams(reference, n);
    hyp_total += detail::total(hyp);
    ref_total += detail::total(ref);
    for (const auto& [gram, count] : hyp) {
      auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
  }
  const std::size_t all = std::max(hyp_total, ref_total);
  return all == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(all);
}

/// 1 - mean of the two directed sentence BLEU scores; 0 for identical sequences.
inline double bleu_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw ValidationError("bleu requires nonempty token sequences");
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return 0.0;
  return 1.0 - (sentence_bleu(b, a) + sentence_bleu(a, b)) / 2.0;
}

/// 1 - mean of the two directed sentence GLEU scores; 0 for identical sequences.
inline double gleu_distance(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw ValidationError("gleu requires nonempty token sequences");
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return 0.0;
  return 1.0 - (sentence_gleu(b, a) + sentence_gleu(a, b)) / 2.0;
}

/// Contextual token vectors keyed by (sentence id, token index). Read-only once loaded.
class TokenEmbeddingTable {
 public:
  void add(const std::string& sentence_id, std::vector<std::vector<double>> vectors) {
    for (const auto& v : vectors) {
      if (dimension_ == 0) dimension_ = v.size();
      if (v.empty() || v.size() != dimension_) {
        throw ValidationError("embedding for sentence '" + sentence_id + "' has dimension " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(dimension_));
      }
    }
    table_[sentence_id] = std::move(vectors);
  }

  const std::vector<double>& at(const TokenSequence& seq, std::size_t index) const {
    auto it = table_.find(seq.sentence_id);
    if (it == table_.end() || index >= it->second.size()) {
      const std::string token = index < seq.tokens.size() ? seq.tokens[index] : "?";
      throw ValidationError("missing embedding for token '" + token + "' (sentence '" +
                            seq.sentence_id + "', index " + std::to_string(index) + ")");
    }
    return it->second[index];
  }

  bool contains(const std::string& sentence_id) const { return table_.contains(sentence_id); }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::vector<double>>> table_;
  std::size_t dimension_ = 0;
};

namespace detail {

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u == v) return 1.0;
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace detail

/// 1 - F1 of greedy maximum-cosine token matching (no IDF weighting).
inline double embedding_f1_distance(const TokenSequence& a, const TokenSequence& b,
                                    const TokenEmbeddingTable& table) {
  if (a.tokens.empty() || b.tokens.empty()) {
    throw ValidationError("embedding_f1 requires nonempty token sequences");
  }
  std::vector<const std::vector<double>*> ea, eb;
  for (std::size_t i = 0; i < a.tokens.size(); ++i) ea.push_back(&table.at(a, i));
  for (std::size_t j = 0; j < b.tokens.size(); ++j) eb.push_back(&table.at(b, j));

  std::vector<double> best_a(ea.size(), -1.0), best_b(eb.size(), -1.0);
  for (std::size_t i = 0; i < ea.size(); ++i) {
    for (std::size_t j = 0; j < eb.size(); ++j) {
      const double c = detail::cosine(*ea[i], *eb[j]);
      best_a[i] = std::max(best_a[i], c);
      best_b[j] = std::max(best_b[j], c);
    }
  }
  double precision = 0, recall = 0;
  for (double c : best_a) precision += c;
  for (double c : best_b) recall += c;
  precision /= static_cast<double>(ea.size());
  recall /= static_cast<double>(eb.size());
  const double f1 =
      precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return 1.0 - std::clamp(f1, 0.0, 1.0);
}

enum class TranslationMode { levenshtein, bleu, gleu, embedding_f1 };

struct TranslationResources {
  const TokenEmbeddingTable* embeddings = nullptr;
  bool normalize_levenshtein = true;
};

inline double translation_distance(const TokenSequence& a, const TokenSequence& b,
                                   TranslationMode mode, const TranslationResources& res = {}) {
  switch (mode) {
    case TranslationMode::levenshtein:
      return levenshtein_distance(a.tokens, b.tokens, res.normalize_levenshtein);
    case TranslationMode::bleu: return bleu_distance(a.tokens, b.tokens);
    case TranslationMode::gleu: return gleu_distance(a.tokens, b.tokens);
    case TranslationMode::embedding_f1:
      if (res.embeddings == nullptr) throw UsageError("embedding_f1 requires an embedding table");
      return embedding_f1_distance(a, b, *res.embeddings);
  }
  throw UsageError("unknown translation mode");
}

}  // namespace iaa
