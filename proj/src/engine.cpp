#include <chrono>

#include "guard/engine.hpp"
#include "guard/entropy.hpp"

namespace guard {

namespace {
using Clock = std::chrono::steady_clock;
}

GenerationRun generate(DistributionSource& source, DecodingStrategy& strategy,
                       std::span<const int> prompt, int max_tokens) {
  if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");

  GenerationRun run;
  run.prompt.assign(prompt.begin(), prompt.end());
  std::vector<int> context(prompt.begin(), prompt.end());
  const auto eos = source.eos_token();

  for (int t = 0; t < max_tokens; ++t) {
    Distribution dist;
    try {
      const auto t0 = Clock::now();
      dist = source.next_distribution(context);
      run.provider_ns += std::chrono::nanoseconds(Clock::now() - t0).count();
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
      return run;
    }

    const auto t1 = Clock::now();
    const int token = strategy.select(dist);
    run.strategy_ns += std::chrono::nanoseconds(Clock::now() - t1).count();

    run.tokens.push_back(token);
    context.push_back(token);

    if (const StepDiagnostics* d = strategy.last_diagnostics()) {
      run.diagnostics.push_back(*d);
    } else {
      StepDiagnostics fallback;
      fallback.h_loc = local_entropy(dist);
      fallback.chosen_token = token;
      fallback.chosen_score = dist.probs[token];
      run.diagnostics.push_back(fallback);
    }

    if (eos && token == *eos) break;
  }
  return run;
}

}  // namespace guard
