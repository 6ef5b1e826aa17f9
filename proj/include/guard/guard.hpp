#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "guard/distribution.hpp"
#include "guard/entropy.hpp"

namespace guard {

enum class AlphaVariant : std::uint8_t {
  kPseudocode,  // deltas scaled by ln(k_t) inside the exponent
  kProse,       // deltas recomputed with ln(k_t) as the arctanh scale
};

struct GuardConfig {
  double lambda = 0.95;
  int window = 7;
  double epsilon = 1e-6;
  int k_floor = 5;
  int k_span = 10;
  int max_tokens = 256;
  AlphaVariant alpha_variant = AlphaVariant::kPseudocode;
  bool global_median_history = false;
};

struct StepDiagnostics {
  double h_loc = 0.0;
  double h_glob = 0.0;
  double delta_loc = 0.0;
  double delta_glob = 0.0;
  double q = 1.0;
  double lambda_k = 0.0;
  int k_t = 0;
  double alpha_t = 0.0;
  int chosen_token = -1;
  double chosen_score = 0.0;

  bool operator==(const StepDiagnostics&) const = default;
};

// Per-generation-stream mutable state. Single owner, no shared mutation.
struct GuardState {
  EntropyTrace trace;
  std::vector<double> glob_history;
  std::unordered_map<int, int> token_counts;
  int step = 0;
  StepDiagnostics last_diagnostics;

  GuardState(const GuardConfig& cfg, double vocab_log)
      : trace(cfg.lambda, vocab_log) {}
};

// Deviation signals for one step. Raw numerators are kept so the prose
// alpha variant can re-map them with a different arctanh scale.
struct GlocalDeltas {
  double delta_loc = 0.0;
  double delta_glob = 0.0;
  double q = 1.0;
  double num_loc = 0.0;
  double num_glob = 0.0;
};

// Computes (delta_loc, delta_glob, q) for the current step. The local
// entropy must already be appended to the trace. Warm-up (t < w) zeroes
// delta_loc, keeps q at 1, and measures delta_glob against the median of
// the full history so far.
inline GlocalDeltas glocal_deltas(const GuardState& state, const GuardConfig& cfg) {
  const auto& hist = state.trace.history();
  const int t = static_cast<int>(hist.size());
  const double h_loc = hist.back();
  const double vlog = state.trace.vocab_log();

  GlocalDeltas out;
  if (t < cfg.window) {
    out.num_glob = h_loc - window_median(hist, t);
    out.delta_glob = bounded_arctanh(out.num_glob, vlog);
    return out;
  }

  std::span<const double> prior(hist.data(), hist.size() - 1);
  const double med_recent = window_median(prior, cfg.window);
  const double med_glob =
      cfg.global_median_history
          ? window_median(state.glob_history, static_cast<int>(state.glob_history.size()))
          : state.trace.global_entropy();

  const double med_diff = med_recent - med_glob;
  const double h_prev = hist[hist.size() - 2];
  const double r_change = std::abs(h_loc - h_prev) / (h_prev + cfg.epsilon);
  const double r_difference = std::abs(med_diff) / (med_glob + cfg.epsilon);

  out.q = 1.0 + r_change + r_difference;
  out.num_loc = h_loc - med_recent;
  out.num_glob = med_diff;
  out.delta_loc = out.q * bounded_arctanh(out.num_loc, vlog);
  out.delta_glob = out.q * bounded_arctanh(out.num_glob, vlog);
  return out;
}

inline double compute_lambda_k(double delta_loc, double delta_glob, double epsilon) {
  return std::abs(delta_loc) / (std::abs(delta_loc) + std::abs(delta_glob) + epsilon);
}

// Sigmoid-mapped candidate count: k_span * sigmoid(signal) + k_floor,
// rounded half-up and clamped to [k_floor, k_floor + k_span].
inline int compute_k(double delta_loc, double delta_glob, double lambda_k,
                     const GuardConfig& cfg = {}) {
  const double signal = lambda_k * delta_loc + (1.0 - lambda_k) * delta_glob;
  const double cont = cfg.k_span * (1.0 - 1.0 / (std::exp(signal) + 1.0)) + cfg.k_floor;
  const int k = static_cast<int>(std::floor(cont + 0.5));
  return std::clamp(k, cfg.k_floor, cfg.k_floor + cfg.k_span);
}

// Penalty base: 1 - 1/(exp((lambda_k d_loc + (1-lambda_k) d_glob) ln k) + 1).
inline double compute_alpha(double delta_loc, double delta_glob, double lambda_k, int k_t) {
  const double signal = lambda_k * delta_loc + (1.0 - lambda_k) * delta_glob;
  return 1.0 - 1.0 / (std::exp(signal * std::log(static_cast<double>(k_t))) + 1.0);
}

// Alternate reading: rebuild the deltas with ln(k_t) replacing ln|V|.
inline double compute_alpha_prose(const GlocalDeltas& gd, double lambda_k, int k_t) {
  const double scale = std::log(static_cast<double>(k_t));
  const double dl = (gd.delta_loc == 0.0) ? 0.0 : gd.q * bounded_arctanh(gd.num_loc, scale);
  const double dg = gd.q * bounded_arctanh(gd.num_glob, scale);
  const double signal = lambda_k * dl + (1.0 - lambda_k) * dg;
  return 1.0 - 1.0 / (std::exp(signal) + 1.0);
}

// One GUARD decoding step: push entropy, derive (q, deltas, lambda_k, k_t,
// alpha_t), truncate to the top-k_t candidates, and take the argmax of
// p(v) * alpha_t^count(v). Ties break toward the lowest token id.
inline std::pair<int, StepDiagnostics> guard_select(const Distribution& dist,
                                                    GuardState& state,
                                                    const GuardConfig& cfg) {
  const double h_loc = local_entropy(dist);
  const double h_glob = state.trace.push(h_loc);
  state.glob_history.push_back(h_glob);
  state.step += 1;

  const GlocalDeltas gd = glocal_deltas(state, cfg);
  const double lambda_k = compute_lambda_k(gd.delta_loc, gd.delta_glob, cfg.epsilon);
  const int k_t = compute_k(gd.delta_loc, gd.delta_glob, lambda_k, cfg);
  const double alpha_t = cfg.alpha_variant == AlphaVariant::kPseudocode
                             ? compute_alpha(gd.delta_loc, gd.delta_glob, lambda_k, k_t)
                             : compute_alpha_prose(gd, lambda_k, k_t);

  // Candidate ids ordered by probability descending, id ascending.
  std::vector<int> ids;
  ids.reserve(dist.probs.size());
  for (int v = 0; v < dist.vocab_size(); ++v) {
    if (dist.tail && v == *dist.tail) continue;
    ids.push_back(v);
  }
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k_t), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + keep, ids.end(), [&](int a, int b) {
    if (dist.probs[a] != dist.probs[b]) return dist.probs[a] > dist.probs[b];
    return a < b;
  });
  ids.resize(keep);

  int best = -1;
  double best_score = -1.0;
  for (int v : ids) {
    const auto it = state.token_counts.find(v);
    const int count = it == state.token_counts.end() ? 0 : it->second;
    const double score = dist.probs[v] * std::pow(alpha_t, count);
    if (score > best_score || (score == best_score && v < best)) {
      best = v;
      best_score = score;
    }
  }

  state.token_counts[best] += 1;

  StepDiagnostics diag;
  diag.h_loc = h_loc;
  diag.h_glob = h_glob;
  diag.delta_loc = gd.delta_loc;
  diag.delta_glob = gd.delta_glob;
  diag.q = gd.q;
  diag.lambda_k = lambda_k;
  diag.k_t = k_t;
  diag.alpha_t = alpha_t;
  diag.chosen_token = best;
  diag.chosen_score = best_score;
  state.last_diagnostics = diag;
  return {best, diag};
}

}  // namespace guard
