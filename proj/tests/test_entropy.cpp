#include <doctest.h>

#include <random>

#include "guard/entropy.hpp"

using namespace guard;

namespace {
Distribution uniform_dist(int n) {
  Distribution d;
  d.probs.assign(n, 1.0 / n);
  return d;
}
}  // namespace

TEST_CASE("local entropy of reference distributions") {
  CHECK(local_entropy(uniform_dist(4)) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  Distribution onehot;
  onehot.probs = {0.0, 1.0, 0.0};
  CHECK(local_entropy(onehot) == 0.0);

  Distribution half;
  half.probs = {0.5, 0.5, 0.0, 0.0};
  CHECK(local_entropy(half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("local entropy rejects invalid distributions") {
  Distribution neg;
  neg.probs = {1.2, -0.2};
  CHECK_THROWS_AS(local_entropy(neg), InvalidDistribution);

  Distribution short_sum;
  short_sum.probs = {0.3, 0.3};
  CHECK_THROWS_AS(local_entropy(short_sum), InvalidDistribution);

  Distribution tiny;
  tiny.probs = {1.0};
  CHECK_THROWS_AS(local_entropy(tiny), InvalidDistribution);
}

TEST_CASE("local entropy bounded by [0, ln V] on random distributions") {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> ex(1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 64);
    Distribution d;
    d.probs.resize(n);
    double sum = 0.0;
    for (double& p : d.probs) {
      p = ex(rng);
      sum += p;
    }
    for (double& p : d.probs) p /= sum;
    const double h = local_entropy(d);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("decayed global entropy matches direct summation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, std::log(64.0));
  for (double lambda : {0.5, 0.91, 0.95, 0.99, 1.0}) {
    EntropyTrace trace(lambda, std::log(64.0));
    double worst = 0.0;
    std::vector<double> hist;
    for (int t = 1; t <= 10000; ++t) {
      const double h = u(rng);
      hist.push_back(h);
      const double incremental = trace.push(h);
      if (t % 500 == 0 || t < 10) {
        double num = 0.0, den = 0.0;
        for (int i = 1; i <= t; ++i) {
          const double w = std::pow(lambda, t - i);
          num += w * hist[i - 1];
          den += w;
        }
        worst = std::max(worst, std::abs(incremental - num / den));
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("global entropy examples") {
  SUBCASE("constant history") {
    EntropyTrace trace(0.7, 1.0);
    trace.push(2.5);
    trace.push(2.5);
    CHECK(trace.push(2.5) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("two-element decayed average") {
    EntropyTrace trace(0.5, 1.0);
    trace.push(1.0);
    CHECK(trace.push(2.0) == doctest::Approx((0.5 * 1.0 + 2.0) / 1.5).epsilon(1e-12));
  }
  SUBCASE("lambda 1 is the arithmetic mean") {
    EntropyTrace trace(1.0, 1.0);
    trace.push(1.0);
    trace.push(2.0);
    CHECK(trace.push(3.0) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("global entropy stays within history bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  EntropyTrace trace(0.95, std::log(64.0));
  double lo = 1e300, hi = -1e300;
  for (int t = 0; t < 2000; ++t) {
    const double h = u(rng);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
    const double g = trace.push(h);
    CHECK(g >= lo - 1e-12);
    CHECK(g <= hi + 1e-12);
  }
}

TEST_CASE("window median") {
  const double a[] = {3.0, 1.0, 2.0};
  CHECK(window_median(a, 3) == 2.0);
  const double b[] = {1.0, 2.0, 3.0, 4.0};
  CHECK(window_median(b, 4) == 2.5);
  const double c[] = {5.0, 5.0, 9.0};
  CHECK(window_median(c, 2) == 7.0);
  CHECK(window_median(c, 10) == 5.0);  // w larger than history
  CHECK_THROWS_AS(window_median({}, 3), std::invalid_argument);
}

TEST_CASE("bounded arctanh") {
  CHECK(bounded_arctanh(0.0, 3.0) == 0.0);
  CHECK(bounded_arctanh(0.5, 1.0) == doctest::Approx(std::atanh(0.5)).epsilon(1e-12));
  const double clamped = bounded_arctanh(2.0, 1.0);
  CHECK(clamped == doctest::Approx(std::atanh(1.0 - 1e-6)).epsilon(1e-9));
  CHECK(std::isfinite(clamped));

  // odd and monotone
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double prev_x = -10.0, prev_y = bounded_arctanh(-10.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng);
    CHECK(bounded_arctanh(-x, 2.0) == doctest::Approx(-bounded_arctanh(x, 2.0)));
    CHECK(std::isfinite(bounded_arctanh(x, 2.0)));
  }
  for (double x = -9.0; x < 10.0; x += 0.5) {
    const double y = bounded_arctanh(x, 2.0);
    CHECK(y >= prev_y);
    prev_x = x;
    prev_y = y;
  }
}
