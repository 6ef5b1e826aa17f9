#pragma once

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>

#include "guard/baselines.hpp"
#include "guard/guard.hpp"
#include "guard/providers.hpp"

namespace guard {

enum class StrategyKind : std::uint8_t {
  kGreedy,
  kTemperature,
  kTopK,
  kTopP,
  kTypical,
  kContrastiveSearch,
  kGuard,
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kGuard;
  double tau = 0.9;
  int k = 10;
  double p = 0.95;
  double typical_tau = 0.9;
  int cs_k = 10;
  double cs_alpha = 0.6;
  std::uint64_t seed = 0;
  GuardConfig guard;
};

std::string to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy_kind(const std::string& name);

// One decoding stream's worth of strategy state. Single owner; create one
// instance per concurrent generation.
class DecodingStrategy {
 public:
  virtual ~DecodingStrategy() = default;
  virtual int select(const Distribution& dist) = 0;
  // Populated only by strategies that produce per-step signals (GUARD).
  virtual const StepDiagnostics* last_diagnostics() const { return nullptr; }
};

class GreedyStrategy final : public DecodingStrategy {
 public:
  int select(const Distribution& dist) override { return greedy_select(dist); }
};

class TemperatureStrategy final : public DecodingStrategy {
 public:
  TemperatureStrategy(double tau, std::uint64_t seed) : tau_(tau), rng_(seed) {}
  int select(const Distribution& dist) override {
    return temperature_sample(dist, tau_, rng_);
  }

 private:
  double tau_;
  std::mt19937_64 rng_;
};

class TopKStrategy final : public DecodingStrategy {
 public:
  TopKStrategy(int k, std::uint64_t seed) : k_(k), rng_(seed) {}
  int select(const Distribution& dist) override { return top_k_sample(dist, k_, rng_); }

 private:
  int k_;
  std::mt19937_64 rng_;
};

class TopPStrategy final : public DecodingStrategy {
 public:
  TopPStrategy(double p, std::uint64_t seed) : p_(p), rng_(seed) {}
  int select(const Distribution& dist) override { return top_p_sample(dist, p_, rng_); }

 private:
  double p_;
  std::mt19937_64 rng_;
};

class TypicalStrategy final : public DecodingStrategy {
 public:
  TypicalStrategy(double typical_tau, std::uint64_t seed)
      : typical_tau_(typical_tau), rng_(seed) {}
  int select(const Distribution& dist) override {
    return typical_sample(dist, typical_tau_, rng_);
  }

 private:
  double typical_tau_;
  std::mt19937_64 rng_;
};

// CS keeps the chosen tokens' representation vectors as its context; prompt
// representations are included when the provider supplies them.
class ContrastiveSearchStrategy final : public DecodingStrategy {
 public:
  ContrastiveSearchStrategy(const DistributionSource& source, int cs_k, double cs_alpha,
                            std::span<const int> prompt)
      : source_(source), cs_k_(cs_k), cs_alpha_(cs_alpha) {
    if (!source.has_representations()) {
      throw CapabilityError("contrastive search needs candidate representations");
    }
    for (int tok : prompt) {
      const auto r = source_.representation(tok);
      context_reps_.emplace_back(r.begin(), r.end());
    }
  }

  int select(const Distribution& dist) override {
    validate(dist);
    auto ids = detail::ids_by_prob(dist);
    ids.resize(std::min<std::size_t>(ids.size(), static_cast<std::size_t>(cs_k_)));
    std::vector<CsCandidate> cands;
    cands.reserve(ids.size());
    for (int v : ids) {
      cands.push_back({v, dist.probs[v], source_.representation(v)});
    }
    const int chosen = contrastive_search_select(cands, context_reps_, cs_alpha_);
    const auto r = source_.representation(chosen);
    context_reps_.emplace_back(r.begin(), r.end());
    return chosen;
  }

  std::size_t context_length() const { return context_reps_.size(); }

  // Drops the oldest context representations down to `keep`; the benchmark
  // harness uses this to hold the context length fixed while timing.
  void trim_context(std::size_t keep) {
    if (context_reps_.size() > keep) {
      context_reps_.erase(context_reps_.begin(),
                          context_reps_.end() - static_cast<std::ptrdiff_t>(keep));
    }
  }

 private:
  const DistributionSource& source_;
  int cs_k_;
  double cs_alpha_;
  std::vector<std::vector<float>> context_reps_;
};

class GuardStrategy final : public DecodingStrategy {
 public:
  GuardStrategy(const GuardConfig& cfg, int vocab_size)
      : cfg_(cfg), state_(cfg, std::log(static_cast<double>(vocab_size))) {}

  int select(const Distribution& dist) override {
    auto [token, diag] = guard_select(dist, state_, cfg_);
    (void)diag;
    return token;
  }

  const StepDiagnostics* last_diagnostics() const override {
    return state_.step > 0 ? &state_.last_diagnostics : nullptr;
  }

  const GuardState& state() const { return state_; }

 private:
  GuardConfig cfg_;
  GuardState state_;
};

std::unique_ptr<DecodingStrategy> make_strategy(const StrategyConfig& cfg,
                                                const DistributionSource& source,
                                                std::span<const int> prompt);

}  // namespace guard
