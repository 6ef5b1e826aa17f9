#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace guard {

enum class ProcessKind : std::uint8_t { kIidUniform, kAr1 };

// Stationary synthetic entropy process driving the Monte Carlo checks of
// the global-entropy estimator (unbiasedness and variance decay).
struct ProcessSpec {
  ProcessKind kind = ProcessKind::kIidUniform;
  // iid_uniform(lo, hi); lo == hi gives a constant (degenerate) process.
  double lo = 0.0;
  double hi = 4.1588830833596715;  // ln 64
  // ar1: x_t = mean + phi * (x_{t-1} - mean) + noise, clipped to [clip_lo, clip_hi]
  double phi = 0.5;
  double mean = 2.0;
  double noise_sd = 0.3;
  double clip_lo = 0.0;
  double clip_hi = 4.1588830833596715;
  int burn_in = 100;

  int horizon = 256;
  int replications = 10000;
  double lambda = 0.95;
  std::uint64_t seed = 1;

  // Negative-control fixture: a nonzero offset added to every estimate,
  // which must make the bias assertion fail.
  double injected_bias = 0.0;
};

struct BiasResult {
  double empirical_mean = 0.0;
  double process_mean = 0.0;
  double standard_error = 0.0;
  double z_score = 0.0;
};

struct VarianceDecayResult {
  std::vector<int> horizons;
  std::vector<double> variances;
  double slope = 0.0;  // least-squares slope of ln Var vs ln t
};

// Analytic mean of the process (the Monte Carlo anchor).
double process_mean(const ProcessSpec& spec);

// Simulates `replications` independent paths and compares the mean of
// H_glob at the horizon against the analytic process mean. `parallel`
// selects the OpenMP path; both orderings give identical results.
BiasResult run_bias_experiment(const ProcessSpec& spec, bool parallel = true);

// Estimates Var(H_glob,t) across replications at each horizon and fits a
// log-log slope.
VarianceDecayResult run_variance_decay(const ProcessSpec& spec,
                                       std::span<const int> t_grid, bool parallel = true);

}  // namespace guard
