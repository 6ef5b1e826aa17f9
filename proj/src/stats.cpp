#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "guard/stats.hpp"

namespace guard {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One path of the entropy process; h_glob recorded at each requested
// horizon (sorted ascending). Returns one value per horizon.
std::vector<double> simulate_path(const ProcessSpec& spec, std::uint64_t rep,
                                  std::span<const int> horizons) {
  std::mt19937_64 rng(splitmix64(spec.seed ^ (rep * 0x2545f4914f6cdd1dULL + 1)));
  std::normal_distribution<double> gauss(0.0, spec.noise_sd);

  double x = spec.mean;
  if (spec.kind == ProcessKind::kAr1) {
    for (int i = 0; i < spec.burn_in; ++i) {
      x = spec.mean + spec.phi * (x - spec.mean) + gauss(rng);
      x = std::clamp(x, spec.clip_lo, spec.clip_hi);
    }
  }

  std::vector<double> out;
  out.reserve(horizons.size());
  double num = 0.0, den = 0.0;
  std::size_t next = 0;
  const int max_t = horizons.back();
  for (int t = 1; t <= max_t; ++t) {
    double h;
    if (spec.kind == ProcessKind::kIidUniform) {
      h = spec.lo + (spec.hi - spec.lo) * uniform01(rng);
    } else {
      x = spec.mean + spec.phi * (x - spec.mean) + gauss(rng);
      x = std::clamp(x, spec.clip_lo, spec.clip_hi);
      h = x;
    }
    num = spec.lambda * num + h;
    den = spec.lambda * den + 1.0;
    while (next < horizons.size() && horizons[next] == t) {
      out.push_back(num / den + spec.injected_bias);
      ++next;
    }
  }
  return out;
}

// Fills results[rep * horizons.size() + i]; aggregation downstream is by
// replication index, so thread scheduling cannot change the output.
void simulate_all(const ProcessSpec& spec, std::span<const int> horizons,
                  std::vector<double>& results, bool parallel) {
  const int R = spec.replications;
  const std::size_t H = horizons.size();
  results.assign(static_cast<std::size_t>(R) * H, 0.0);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int rep = 0; rep < R; ++rep) {
      const auto path = simulate_path(spec, static_cast<std::uint64_t>(rep), horizons);
      std::copy(path.begin(), path.end(), results.begin() + rep * H);
    }
  } else {
    for (int rep = 0; rep < R; ++rep) {
      const auto path = simulate_path(spec, static_cast<std::uint64_t>(rep), horizons);
      std::copy(path.begin(), path.end(), results.begin() + rep * H);
    }
  }
}

// Mean and unbiased variance over a strided column of results.
std::pair<double, double> column_stats(const std::vector<double>& results,
                                       std::size_t stride, std::size_t col, int R) {
  // Accumulate relative to the first value so a column of identical
  // replications yields an exact mean and exactly zero variance.
  const double pivot = results[col];
  double shift = 0.0;
  for (int rep = 0; rep < R; ++rep) shift += results[rep * stride + col] - pivot;
  const double mean = pivot + shift / R;
  double var = 0.0;
  for (int rep = 0; rep < R; ++rep) {
    const double d = results[rep * stride + col] - mean;
    var += d * d;
  }
  var /= (R > 1 ? R - 1 : 1);
  return {mean, var};
}

}  // namespace

double process_mean(const ProcessSpec& spec) {
  if (spec.kind == ProcessKind::kIidUniform) return 0.5 * (spec.lo + spec.hi);
  return spec.mean;
}

BiasResult run_bias_experiment(const ProcessSpec& spec, bool parallel) {
  if (spec.replications < 1000) {
    throw std::invalid_argument("bias experiment needs at least 1000 replications");
  }
  const int horizon[] = {spec.horizon};
  std::vector<double> results;
  simulate_all(spec, horizon, results, parallel);

  BiasResult r;
  r.process_mean = process_mean(spec);
  const auto [mean, var] = column_stats(results, 1, 0, spec.replications);
  r.empirical_mean = mean;
  r.standard_error = std::sqrt(var / spec.replications);
  if (r.standard_error == 0.0) {
    // zero spread: call rounding-level disagreement unbiased, anything
    // larger an unambiguous failure
    const double tol = 1e-12 * std::max(1.0, std::abs(r.process_mean));
    r.z_score = (std::abs(r.empirical_mean - r.process_mean) <= tol)
                    ? 0.0
                    : std::numeric_limits<double>::infinity();
  } else {
    r.z_score = (r.empirical_mean - r.process_mean) / r.standard_error;
  }
  return r;
}

VarianceDecayResult run_variance_decay(const ProcessSpec& spec,
                                       std::span<const int> t_grid, bool parallel) {
  if (t_grid.empty()) throw std::invalid_argument("empty horizon grid");
  std::vector<int> horizons(t_grid.begin(), t_grid.end());
  std::sort(horizons.begin(), horizons.end());

  std::vector<double> results;
  simulate_all(spec, horizons, results, parallel);

  VarianceDecayResult out;
  out.horizons = horizons;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    out.variances.push_back(
        column_stats(results, horizons.size(), i, spec.replications).second);
  }

  // Least squares on (ln t, ln var); degenerate variances give slope 0.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (out.variances[i] <= 0.0) continue;
    const double x = std::log(static_cast<double>(horizons[i]));
    const double y = std::log(out.variances[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace guard
