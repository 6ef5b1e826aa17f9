#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "guard/distribution.hpp"

namespace guard {

class ProviderError : public std::runtime_error {
 public:
  ProviderError(std::string msg, int attempts = 1, bool retriable = false)
      : std::runtime_error(std::move(msg)), attempts(attempts), retriable(retriable) {}
  int attempts;
  bool retriable;
};

class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that yields a next-token distribution given a token context.
// Implementations must be shareable across concurrent generation streams.
class DistributionSource {
 public:
  virtual ~DistributionSource() = default;

  virtual int vocab_size() const = 0;
  virtual std::optional<int> eos_token() const { return std::nullopt; }

  virtual Distribution next_distribution(std::span<const int> context) = 0;

  // Candidate representation vectors (contrastive search needs these).
  virtual bool has_representations() const { return false; }
  virtual int rep_dim() const { return 0; }
  virtual std::span<const float> representation(int /*token*/) const {
    throw CapabilityError("provider does not expose representations");
  }

  // Echo-scoring: average log-likelihood per continuation token,
  // (1/|c|) sum_i ln p(c_i | prompt, c_<i).
  virtual bool can_score() const { return false; }
  virtual double score_continuation(std::span<const int> /*prompt*/,
                                    std::span<const int> /*continuation*/) {
    throw CapabilityError("provider cannot echo-score continuations");
  }
};

// Deterministic table-driven model for tests, oracles and benchmarks.
// The next-token distribution is the transition row of the last context
// token; rows are a valid Distribution by construction.
class SyntheticModel final : public DistributionSource {
 public:
  enum class Kind : std::uint8_t { kMarkovTable, kLooping, kForcedChain };

  // Random stochastic rows.
  static SyntheticModel markov(int vocab, std::uint64_t seed);
  // bias mass on repeating the last token, the rest spread by a seeded row.
  static SyntheticModel looping(int vocab, double bias, std::uint64_t seed);
  // One-hot successor chain: token a always goes to (a+1) mod vocab.
  static SyntheticModel forced_chain(int vocab);

  // Attach per-token unit representation vectors of dimension `dim`.
  void add_representations(int dim, std::uint64_t seed);
  void set_eos(int token) { eos_ = token; }

  int vocab_size() const override { return vocab_; }
  std::optional<int> eos_token() const override { return eos_; }
  Distribution next_distribution(std::span<const int> context) override;

  bool has_representations() const override { return rep_dim_ > 0; }
  int rep_dim() const override { return rep_dim_; }
  std::span<const float> representation(int token) const override;

  bool can_score() const override { return true; }
  double score_continuation(std::span<const int> prompt,
                            std::span<const int> continuation) override;

  Kind kind() const { return kind_; }
  std::span<const double> row(int token) const;

  // Structured-text persistence; round-trips bit-exactly.
  std::string to_json() const;
  static SyntheticModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static SyntheticModel load(const std::string& path);

 private:
  SyntheticModel(int vocab, Kind kind) : vocab_(vocab), kind_(kind) {}

  int vocab_;
  Kind kind_;
  double bias_ = 0.0;
  std::optional<int> eos_;
  std::vector<double> table_;  // vocab_ x vocab_, row-major
  int rep_dim_ = 0;
  std::vector<float> reps_;  // vocab_ x rep_dim_
};

struct RemoteProviderConfig {
  std::string endpoint;  // e.g. http://localhost:8080
  std::string model;
  int top_logprobs = 20;
  int timeout_ms = 30000;
  int retries = 2;
  int max_in_flight = 8;
  int vocab_capacity = 1024;
  std::string api_key_env = "PROVIDER_API_KEY";
};

// Client for completion servers that expose top-M logprobs on
// POST <endpoint>/v1/completions. Token ids are interned strings; the
// last slot is a tail bucket carrying the residual 1 - sum(exp(lp)).
class RemoteProvider final : public DistributionSource {
 public:
  explicit RemoteProvider(RemoteProviderConfig cfg);
  ~RemoteProvider() override;

  int vocab_size() const override;
  Distribution next_distribution(std::span<const int> context) override;
  bool can_score() const override { return true; }
  double score_continuation(std::span<const int> prompt,
                            std::span<const int> continuation) override;

  int tail_token() const;
  // Maps a provider token string to a stable id (interning on first use).
  int intern(const std::string& token_text);
  const std::string& token_text(int id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace guard
