#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace guard {

// Next-token probability vector. `tail` marks an aggregate bucket holding
// residual mass from a top-M provider; it is never selectable.
struct Distribution {
  std::vector<double> probs;
  std::optional<int> tail;

  int vocab_size() const { return static_cast<int>(probs.size()); }
};

class InvalidDistribution : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Entries nonnegative, sum within 1e-6 of 1, at least two outcomes.
inline void validate(const Distribution& d) {
  if (d.vocab_size() < 2) {
    throw InvalidDistribution("distribution needs vocab_size >= 2");
  }
  double sum = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) {
      throw InvalidDistribution("distribution has a negative or NaN entry");
    }
    sum += p;
  }
  if (sum < 1.0 - 1e-6 || sum > 1.0 + 1e-6) {
    throw InvalidDistribution("distribution does not sum to 1");
  }
  if (d.tail && (*d.tail < 0 || *d.tail >= d.vocab_size())) {
    throw InvalidDistribution("tail bucket index out of range");
  }
}

}  // namespace guard
