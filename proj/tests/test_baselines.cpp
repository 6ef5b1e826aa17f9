#include <doctest.h>

#include <map>

#include "guard/baselines.hpp"
#include "guard/providers.hpp"
#include "guard/strategy.hpp"

using namespace guard;

namespace {

Distribution make_dist(std::vector<double> probs) {
  Distribution d;
  d.probs = std::move(probs);
  return d;
}

std::map<int, int> draw_histogram(const Distribution& d, int n,
                                  const std::function<int(std::mt19937_64&)>& draw) {
  std::mt19937_64 rng(4242);
  std::map<int, int> hist;
  for (int i = 0; i < n; ++i) hist[draw(rng)]++;
  return hist;
}

}  // namespace

TEST_CASE("greedy") {
  CHECK(greedy_select(make_dist({0.0, 1.0, 0.0})) == 1);
  CHECK(greedy_select(make_dist({0.25, 0.25, 0.25, 0.25})) == 0);  // lowest-id tie-break
  CHECK(greedy_select(make_dist({0.2, 0.5, 0.3})) == 1);
}

TEST_CASE("temperature sampling") {
  SUBCASE("tiny tau behaves like greedy") {
    std::mt19937_64 rng(1);
    const auto d = make_dist({0.2, 0.5, 0.3});
    for (int i = 0; i < 100; ++i) CHECK(temperature_sample(d, 1e-4, rng) == 1);
  }
  SUBCASE("one-hot is invariant to tau") {
    std::mt19937_64 rng(1);
    const auto d = make_dist({0.0, 0.0, 1.0});
    for (double tau : {0.1, 1.0, 5.0}) CHECK(temperature_sample(d, tau, rng) == 2);
  }
  SUBCASE("tau = 1 reproduces the distribution within 3 sigma") {
    const auto d = make_dist({0.5, 0.3, 0.15, 0.05});
    const int n = 100000;
    const auto hist = draw_histogram(
        d, n, [&](std::mt19937_64& rng) { return temperature_sample(d, 1.0, rng); });
    for (int v = 0; v < 4; ++v) {
      const double expect = n * d.probs[v];
      const double sigma = std::sqrt(n * d.probs[v] * (1 - d.probs[v]));
      CHECK(std::abs(hist.at(v) - expect) < 3 * sigma);
    }
  }
  SUBCASE("fixed seed reproduces draws") {
    const auto d = make_dist({0.4, 0.3, 0.2, 0.1});
    std::mt19937_64 a(9), b(9);
    for (int i = 0; i < 50; ++i) {
      CHECK(temperature_sample(d, 0.9, a) == temperature_sample(d, 0.9, b));
    }
  }
}

TEST_CASE("top-k sampling") {
  SUBCASE("k = 1 is greedy") {
    std::mt19937_64 rng(2);
    const auto d = make_dist({0.2, 0.5, 0.3});
    for (int i = 0; i < 50; ++i) CHECK(top_k_sample(d, 1, rng) == 1);
  }
  SUBCASE("never selects outside the top-k support") {
    std::mt19937_64 rng(3);
    const auto d = make_dist({0.4, 0.3, 0.2, 0.06, 0.04});
    for (int i = 0; i < 2000; ++i) {
      const int tok = top_k_sample(d, 3, rng);
      CHECK(tok <= 2);
    }
  }
}

TEST_CASE("top-p sampling") {
  SUBCASE("hand truncation at p = 0.8") {
    // support {0, 1}, renormalized to [0.625, 0.375]
    const auto d = make_dist({0.5, 0.3, 0.15, 0.05});
    const int n = 100000;
    const auto hist =
        draw_histogram(d, n, [&](std::mt19937_64& rng) { return top_p_sample(d, 0.8, rng); });
    CHECK(hist.count(2) == 0);
    CHECK(hist.count(3) == 0);
    CHECK(std::abs(hist.at(0) / double(n) - 0.625) < 0.01);
    CHECK(std::abs(hist.at(1) / double(n) - 0.375) < 0.01);
  }
  SUBCASE("p = 1 keeps full support") {
    const auto d = make_dist({0.25, 0.25, 0.25, 0.25});
    const auto hist = draw_histogram(
        d, 4000, [&](std::mt19937_64& rng) { return top_p_sample(d, 1.0, rng); });
    CHECK(hist.size() == 4);
  }
}

TEST_CASE("typical sampling") {
  SUBCASE("uniform distribution stays uniform") {
    const auto d = make_dist({0.25, 0.25, 0.25, 0.25});
    const auto hist = draw_histogram(
        d, 40000, [&](std::mt19937_64& rng) { return typical_sample(d, 0.9, rng); });
    // all tokens equally typical; every token reachable
    CHECK(hist.size() == 4);
    for (const auto& [tok, count] : hist) CHECK(count > 40000 / 4 * 0.9);
  }
  SUBCASE("small mass keeps only the most typical token") {
    // H ~ 0.8979; token 1 has |-ln 0.3 - H| ~ 0.306, the minimum
    const auto d = make_dist({0.6, 0.3, 0.1});
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) CHECK(typical_sample(d, 0.2, rng) == 1);
  }
  SUBCASE("typical_tau = 1 keeps full support") {
    const auto d = make_dist({0.6, 0.3, 0.1});
    const auto hist = draw_histogram(
        d, 50000, [&](std::mt19937_64& rng) { return typical_sample(d, 1.0, rng); });
    CHECK(hist.size() == 3);
  }
}

TEST_CASE("top_p(1) and temperature(1) agree: chi-square over pooled draws") {
  const auto d = make_dist({0.45, 0.25, 0.2, 0.1});
  const int n = 100000;
  const auto h1 = draw_histogram(
      d, n, [&](std::mt19937_64& rng) { return top_p_sample(d, 1.0, rng); });
  const auto h2 = draw_histogram(
      d, n, [&](std::mt19937_64& rng) { return temperature_sample(d, 1.0, rng); });
  // two-sample chi-square, 3 dof; 11.34 is the 0.01 critical value
  double chi2 = 0.0;
  for (int v = 0; v < 4; ++v) {
    const double a = h1.count(v) ? h1.at(v) : 0.0;
    const double b = h2.count(v) ? h2.at(v) : 0.0;
    chi2 += (a - b) * (a - b) / (a + b);
  }
  CHECK(chi2 < 11.34);
}

TEST_CASE("contrastive search") {
  const std::vector<float> e1{1.0f, 0.0f};
  const std::vector<float> e2{0.0f, 1.0f};
  const std::vector<float> mix{0.6f, 0.8f};

  SUBCASE("alpha = 0 is greedy over candidates") {
    const CsCandidate cands[] = {{0, 0.6, e1}, {1, 0.4, e2}};
    const std::vector<std::vector<float>> ctx{e1};
    CHECK(contrastive_search_select(cands, ctx, 0.0) == 0);
  }
  SUBCASE("alpha = 1: orthogonal candidate beats a duplicate") {
    const CsCandidate cands[] = {{0, 0.9, e1}, {1, 0.1, e2}};
    const std::vector<std::vector<float>> ctx{e1};
    CHECK(contrastive_search_select(cands, ctx, 1.0) == 1);
  }
  SUBCASE("alpha = 0.6 three-candidate hand case") {
    // scores: 0: 0.4*0.5 - 0.6*1.0 = -0.40
    //         1: 0.4*0.3 - 0.6*0.0 =  0.12
    //         2: 0.4*0.2 - 0.6*0.8 = -0.40
    const CsCandidate cands[] = {{0, 0.5, e1}, {1, 0.3, e2}, {2, 0.2, mix}};
    const std::vector<std::vector<float>> ctx{e1};
    CHECK(contrastive_search_select(cands, ctx, 0.6) == 1);
  }
}

TEST_CASE("contrastive search strategy end to end") {
  auto model = SyntheticModel::markov(16, 21);
  SUBCASE("needs representations") {
    const std::vector<int> prompt{0};
    StrategyConfig cfg;
    cfg.kind = StrategyKind::kContrastiveSearch;
    CHECK_THROWS_AS(make_strategy(cfg, model, prompt), CapabilityError);
  }
  SUBCASE("selects within the top cs_k and appends context") {
    model.add_representations(8, 21);
    const std::vector<int> prompt{0, 1};
    ContrastiveSearchStrategy cs(model, 4, 0.6, prompt);
    CHECK(cs.context_length() == 2);
    const auto d = model.next_distribution(prompt);
    cs.select(d);
    CHECK(cs.context_length() == 3);
  }
}
