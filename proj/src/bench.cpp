#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

#include "guard/bench.hpp"

namespace guard {

namespace {
using Clock = std::chrono::steady_clock;

double percentile(std::vector<double>& sorted, double p) {
  const std::size_t idx = static_cast<std::size_t>(p * (sorted.size() - 1));
  return sorted[idx];
}
}  // namespace

std::string cpu_model_string() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto pos = line.find(':');
      if (pos != std::string::npos) return line.substr(pos + 2);
    }
  }
  return "unknown";
}

StrategyBench bench_select(DecodingStrategy& strategy,
                           std::span<const Distribution> dists, std::string name,
                           int tokens, int warmup,
                           const std::function<void()>& per_step) {
  const auto step = [&](std::size_t i) {
    strategy.select(dists[i % dists.size()]);
    if (per_step) per_step();
  };

  for (int i = 0; i < warmup; ++i) step(static_cast<std::size_t>(i));

  std::vector<double> ns;
  ns.reserve(tokens);
  for (int i = 0; i < tokens; ++i) {
    const std::size_t idx = static_cast<std::size_t>(warmup + i);
    const auto t0 = Clock::now();
    strategy.select(dists[idx % dists.size()]);
    const auto t1 = Clock::now();
    if (per_step) per_step();
    ns.push_back(static_cast<double>(std::chrono::nanoseconds(t1 - t0).count()));
  }

  StrategyBench out;
  out.name = std::move(name);
  out.tokens = tokens;
  double sum = 0.0;
  for (double v : ns) sum += v;
  out.mean_ns = sum / tokens;
  std::sort(ns.begin(), ns.end());
  out.median_ns = percentile(ns, 0.5);
  out.p99_ns = percentile(ns, 0.99);
  out.tokens_per_sec = 1e9 / out.mean_ns;
  return out;
}

BenchReport bench_strategies(std::span<const StrategyConfig> strategies,
                             const BenchSpec& spec) {
  const bool needs_reps = std::any_of(
      strategies.begin(), strategies.end(),
      [](const StrategyConfig& s) { return s.kind == StrategyKind::kContrastiveSearch; });

  SyntheticModel model = SyntheticModel::markov(spec.vocab, spec.seed);
  if (needs_reps) model.add_representations(spec.rep_dim, spec.seed);

  // Distribution stream from a seeded random walk over the table rows.
  std::mt19937_64 rng(spec.seed * 1315423911ULL + 7);
  std::vector<Distribution> dists;
  dists.reserve(512);
  std::vector<int> ctx{static_cast<int>(rng() % spec.vocab)};
  for (int i = 0; i < 512; ++i) {
    dists.push_back(model.next_distribution(ctx));
    ctx.back() = static_cast<int>(rng() % spec.vocab);
  }

  std::vector<int> prompt(spec.context_len);
  for (int& t : prompt) t = static_cast<int>(rng() % spec.vocab);

  BenchReport report;
  report.cpu = cpu_model_string();
  report.vocab = spec.vocab;
  report.rep_dim = needs_reps ? spec.rep_dim : 0;
  report.context_len = spec.context_len;
  {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    report.timestamp = buf;
  }

  for (const auto& cfg : strategies) {
    auto strat = make_strategy(cfg, model, prompt);
    std::function<void()> per_step;
    if (cfg.kind == StrategyKind::kContrastiveSearch) {
      auto* cs = static_cast<ContrastiveSearchStrategy*>(strat.get());
      const std::size_t keep = static_cast<std::size_t>(spec.context_len);
      per_step = [cs, keep] { cs->trim_context(keep); };
    }
    report.strategies.push_back(
        bench_select(*strat, dists, to_string(cfg.kind), spec.tokens, spec.warmup, per_step));
  }
  return report;
}

}  // namespace guard
