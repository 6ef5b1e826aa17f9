#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "guard/distribution.hpp"

namespace guard {

// Shannon entropy in nats, with 0*ln(0) := 0. Result lies in [0, ln|V|].
inline double local_entropy(const Distribution& d) {
  validate(d);
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

// Median of the last min(w, len) values of `history`. Even count takes the
// midpoint of the central pair.
inline double window_median(std::span<const double> history, int w) {
  if (history.empty() || w < 1) {
    throw std::invalid_argument("window_median: empty history or w < 1");
  }
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(w), history.size());
  std::vector<double> win(history.end() - n, history.end());
  std::sort(win.begin(), win.end());
  if (n % 2 == 1) return win[n / 2];
  return 0.5 * (win[n / 2 - 1] + win[n / 2]);
}

// arctanh with the ratio clamped away from the +-1 singularities.
// Odd and monotone in `numerator`, finite everywhere.
inline double bounded_arctanh(double numerator, double scale) {
  constexpr double kLimit = 1.0 - 1e-6;
  double r = numerator / scale;
  r = std::clamp(r, -kLimit, kLimit);
  return std::atanh(r);
}

// Rolling local-entropy history with an O(1) incremental update of the
// decayed average  H_glob,t = sum(lambda^(t-i) H_i) / sum(lambda^(t-i)).
class EntropyTrace {
 public:
  EntropyTrace(double lambda, double vocab_log)
      : lambda_(lambda), vocab_log_(vocab_log) {}

  // Appends a local entropy and returns the updated global entropy.
  double push(double h_local) {
    num_ = lambda_ * num_ + h_local;
    den_ = lambda_ * den_ + 1.0;
    history_.push_back(h_local);
    return num_ / den_;
  }

  double global_entropy() const { return num_ / den_; }
  const std::vector<double>& history() const { return history_; }
  double lambda() const { return lambda_; }
  double vocab_log() const { return vocab_log_; }

 private:
  std::vector<double> history_;
  double lambda_;
  double vocab_log_;
  double num_ = 0.0;
  double den_ = 0.0;
};

}  // namespace guard
