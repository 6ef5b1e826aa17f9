#include "guard/strategy.hpp"

namespace guard {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kGreedy: return "greedy";
    case StrategyKind::kTemperature: return "temperature";
    case StrategyKind::kTopK: return "top_k";
    case StrategyKind::kTopP: return "top_p";
    case StrategyKind::kTypical: return "typical";
    case StrategyKind::kContrastiveSearch: return "contrastive_search";
    case StrategyKind::kGuard: return "guard";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy_kind(const std::string& name) {
  if (name == "greedy") return StrategyKind::kGreedy;
  if (name == "temperature") return StrategyKind::kTemperature;
  if (name == "top_k") return StrategyKind::kTopK;
  if (name == "top_p") return StrategyKind::kTopP;
  if (name == "typical") return StrategyKind::kTypical;
  if (name == "contrastive_search" || name == "cs") return StrategyKind::kContrastiveSearch;
  if (name == "guard") return StrategyKind::kGuard;
  return std::nullopt;
}

std::unique_ptr<DecodingStrategy> make_strategy(const StrategyConfig& cfg,
                                                const DistributionSource& source,
                                                std::span<const int> prompt) {
  switch (cfg.kind) {
    case StrategyKind::kGreedy:
      return std::make_unique<GreedyStrategy>();
    case StrategyKind::kTemperature:
      return std::make_unique<TemperatureStrategy>(cfg.tau, cfg.seed);
    case StrategyKind::kTopK:
      return std::make_unique<TopKStrategy>(cfg.k, cfg.seed);
    case StrategyKind::kTopP:
      return std::make_unique<TopPStrategy>(cfg.p, cfg.seed);
    case StrategyKind::kTypical:
      return std::make_unique<TypicalStrategy>(cfg.typical_tau, cfg.seed);
    case StrategyKind::kContrastiveSearch:
      return std::make_unique<ContrastiveSearchStrategy>(source, cfg.cs_k, cfg.cs_alpha,
                                                         prompt);
    case StrategyKind::kGuard:
      return std::make_unique<GuardStrategy>(cfg.guard, source.vocab_size());
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace guard
