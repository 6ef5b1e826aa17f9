#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "guard/strategy.hpp"

namespace guard {

struct StrategyBench {
  std::string name;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p99_ns = 0.0;
  int tokens = 0;
  double tokens_per_sec = 0.0;  // extrapolation from the mean, strategy cost only
};

struct BenchReport {
  std::vector<StrategyBench> strategies;
  std::string cpu;
  std::string timestamp;
  int vocab = 0;
  int rep_dim = 0;
  int context_len = 0;
};

struct BenchSpec {
  int vocab = 64;
  int rep_dim = 4096;     // 7B-class hidden size, so CS pays its cosine cost
  int context_len = 256;  // CS context held at this length during timing
  int tokens = 10000;
  int warmup = 100;
  std::uint64_t seed = 42;
};

// Times only the select step over a precomputed distribution stream
// (cycled). `per_step` runs untimed after each select; the CS harness uses
// it to pin the context length.
StrategyBench bench_select(DecodingStrategy& strategy,
                           std::span<const Distribution> dists, std::string name,
                           int tokens, int warmup,
                           const std::function<void()>& per_step = {});

// Single-threaded, strategies measured sequentially.
BenchReport bench_strategies(std::span<const StrategyConfig> strategies,
                             const BenchSpec& spec);

std::string cpu_model_string();

}  // namespace guard
