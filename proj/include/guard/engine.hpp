#pragma once

#include <span>
#include <string>
#include <vector>

#include "guard/providers.hpp"
#include "guard/strategy.hpp"

namespace guard {

struct GenerationRun {
  std::vector<int> prompt;
  std::vector<int> tokens;
  std::vector<StepDiagnostics> diagnostics;
  std::int64_t provider_ns = 0;
  std::int64_t strategy_ns = 0;
  bool ok = true;
  std::string error;
};

// Drives one generation stream: provider -> strategy -> append, up to
// max_tokens or EOS. Provider and strategy wall time are split per run.
// On a provider failure the partial trace is preserved and ok is false.
GenerationRun generate(DistributionSource& source, DecodingStrategy& strategy,
                       std::span<const int> prompt, int max_tokens);

}  // namespace guard
