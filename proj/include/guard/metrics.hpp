#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "guard/providers.hpp"

namespace guard {

struct DiversityReport {
  std::array<double, 3> per_n;  // unique/total ratios for n = 2, 3, 4
  double div;                   // product of the three ratios
};

class MetricUndefined : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Pack up to 4 token ids into one key; ids must fit in 16 bits.
inline std::uint64_t pack_ngram(std::span<const int> tokens, std::size_t start, int n) {
  std::uint64_t key = 0;
  for (int i = 0; i < n; ++i) {
    const int tok = tokens[start + i];
    if (tok < 0 || tok >= (1 << 16)) throw std::invalid_argument("token id out of range");
    key = (key << 16) | static_cast<std::uint64_t>(tok + 1);
  }
  return key;
}

}  // namespace detail

// DIV = prod_{n=2..4} unique n-grams / total n-grams, over the continuation
// tokens only. Requires length >= 5 so each n-gram count is at least one.
inline DiversityReport diversity(std::span<const int> tokens) {
  if (tokens.size() < 5) {
    throw MetricUndefined("diversity needs at least 5 tokens");
  }
  DiversityReport rep{};
  rep.div = 1.0;
  for (int n = 2; n <= 4; ++n) {
    std::unordered_set<std::uint64_t> seen;
    const std::size_t total = tokens.size() - n + 1;
    for (std::size_t i = 0; i < total; ++i) {
      seen.insert(detail::pack_ngram(tokens, i, n));
    }
    const double ratio = static_cast<double>(seen.size()) / static_cast<double>(total);
    rep.per_n[n - 2] = ratio;
    rep.div *= ratio;
  }
  return rep;
}

// Average conditional log-likelihood of the continuation given the prompt,
// in nats per token, scored by the given provider.
inline double coherence(DistributionSource& source, std::span<const int> prompt,
                        std::span<const int> continuation) {
  if (!source.can_score()) {
    throw CapabilityError("scoring provider cannot echo-score");
  }
  return source.score_continuation(prompt, continuation);
}

// Max repeat count of any n-gram, for n = 1..4.
inline std::map<int, int> repetition_profile(std::span<const int> tokens) {
  if (tokens.empty()) throw std::invalid_argument("empty token sequence");
  std::map<int, int> out;
  for (int n = 1; n <= 4; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    std::unordered_map<std::uint64_t, int> counts;
    int max_count = 0;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      const int c = ++counts[detail::pack_ngram(tokens, i, n)];
      max_count = std::max(max_count, c);
    }
    out[n] = max_count;
  }
  return out;
}

}  // namespace guard
