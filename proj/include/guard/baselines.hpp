#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "guard/distribution.hpp"
#include "guard/entropy.hpp"

namespace guard {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

inline bool selectable(const Distribution& d, int v) {
  return !(d.tail && v == *d.tail);
}

// Token ids ordered by probability descending, id ascending, tail excluded.
inline std::vector<int> ids_by_prob(const Distribution& d) {
  std::vector<int> ids;
  ids.reserve(d.probs.size());
  for (int v = 0; v < d.vocab_size(); ++v) {
    if (selectable(d, v)) ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (d.probs[a] != d.probs[b]) return d.probs[a] > d.probs[b];
    return a < b;
  });
  return ids;
}

// Draw an index from unnormalized weights.
inline int weighted_draw(std::span<const int> ids, std::span<const double> weights,
                         std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = uniform01(rng) * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    cum += weights[i];
    if (u < cum) return ids[i];
  }
  return ids.back();
}

}  // namespace detail

inline int greedy_select(const Distribution& dist) {
  validate(dist);
  int best = -1;
  double best_p = -1.0;
  for (int v = 0; v < dist.vocab_size(); ++v) {
    if (!detail::selectable(dist, v)) continue;
    if (dist.probs[v] > best_p) {
      best = v;
      best_p = dist.probs[v];
    }
  }
  return best;
}

// Sample from probs^(1/tau), renormalized. Computed in log space so that
// tiny tau degrades gracefully into argmax.
inline int temperature_sample(const Distribution& dist, double tau, std::mt19937_64& rng) {
  validate(dist);
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  double max_p = 0.0;
  for (int v = 0; v < dist.vocab_size(); ++v) {
    if (detail::selectable(dist, v)) max_p = std::max(max_p, dist.probs[v]);
  }
  std::vector<int> ids;
  std::vector<double> w;
  for (int v = 0; v < dist.vocab_size(); ++v) {
    if (!detail::selectable(dist, v) || dist.probs[v] <= 0.0) continue;
    ids.push_back(v);
    w.push_back(std::exp((std::log(dist.probs[v]) - std::log(max_p)) / tau));
  }
  return detail::weighted_draw(ids, w, rng);
}

inline int top_k_sample(const Distribution& dist, int k, std::mt19937_64& rng) {
  validate(dist);
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  auto ids = detail::ids_by_prob(dist);
  ids.resize(std::min<std::size_t>(ids.size(), static_cast<std::size_t>(k)));
  std::vector<double> w;
  w.reserve(ids.size());
  for (int v : ids) w.push_back(dist.probs[v]);
  return detail::weighted_draw(ids, w, rng);
}

// Smallest prefix of the descending-probability order with cumulative >= p.
inline int top_p_sample(const Distribution& dist, double p, std::mt19937_64& rng) {
  validate(dist);
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("p must be in (0, 1]");
  auto ids = detail::ids_by_prob(dist);
  std::size_t keep = 0;
  double cum = 0.0;
  while (keep < ids.size()) {
    cum += dist.probs[ids[keep]];
    ++keep;
    if (cum >= p) break;
  }
  ids.resize(keep);
  std::vector<double> w;
  w.reserve(ids.size());
  for (int v : ids) w.push_back(dist.probs[v]);
  return detail::weighted_draw(ids, w, rng);
}

// Keep the tokens whose surprisal is closest to the distribution entropy,
// up to cumulative mass typical_tau.
inline int typical_sample(const Distribution& dist, double typical_tau, std::mt19937_64& rng) {
  validate(dist);
  if (typical_tau <= 0.0 || typical_tau > 1.0) {
    throw std::invalid_argument("typical_tau must be in (0, 1]");
  }
  const double h = local_entropy(dist);
  std::vector<int> ids;
  for (int v = 0; v < dist.vocab_size(); ++v) {
    if (detail::selectable(dist, v) && dist.probs[v] > 0.0) ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double da = std::abs(-std::log(dist.probs[a]) - h);
    const double db = std::abs(-std::log(dist.probs[b]) - h);
    if (da != db) return da < db;
    return a < b;
  });
  std::size_t keep = 0;
  double cum = 0.0;
  while (keep < ids.size()) {
    cum += dist.probs[ids[keep]];
    ++keep;
    if (cum >= typical_tau) break;
  }
  ids.resize(keep);
  std::vector<double> w;
  w.reserve(ids.size());
  for (int v : ids) w.push_back(dist.probs[v]);
  return detail::weighted_draw(ids, w, rng);
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct CsCandidate {
  int token;
  double prob;
  std::span<const float> rep;
};

// Contrastive search scoring over a prepared candidate list:
// (1 - alpha) * p(v) - alpha * max_j cos(h_v, h_j). Ties break to lowest id.
inline int contrastive_search_select(std::span<const CsCandidate> candidates,
                                     std::span<const std::vector<float>> context_reps,
                                     double cs_alpha) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  int best = -1;
  double best_score = 0.0;
  for (const auto& c : candidates) {
    double max_sim = 0.0;
    bool any = false;
    for (const auto& ctx : context_reps) {
      const double s = cosine(c.rep, ctx);
      if (!any || s > max_sim) max_sim = s;
      any = true;
    }
    const double score = (1.0 - cs_alpha) * c.prob - (any ? cs_alpha * max_sim : 0.0);
    if (best < 0 || score > best_score || (score == best_score && c.token < best)) {
      best = c.token;
      best_score = score;
    }
  }
  return best;
}

}  // namespace guard
