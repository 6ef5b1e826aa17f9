#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "guard/entropy.hpp"
#include "guard/providers.hpp"

using namespace guard;
using nlohmann::json;

TEST_CASE("forced chain emits one-hot successors") {
  auto model = SyntheticModel::forced_chain(8);
  const std::vector<int> ctx{3};
  const auto d = model.next_distribution(ctx);
  validate(d);
  CHECK(d.probs[4] == 1.0);
}

TEST_CASE("markov rows come back exactly") {
  auto model = SyntheticModel::markov(16, 11);
  const std::vector<int> ctx{0, 7};
  const auto d = model.next_distribution(ctx);
  const auto row = model.row(7);
  REQUIRE(d.probs.size() == row.size());
  for (std::size_t i = 0; i < row.size(); ++i) CHECK(d.probs[i] == row[i]);
}

TEST_CASE("synthetic models are bit-deterministic under a seed") {
  auto a = SyntheticModel::markov(32, 123);
  auto b = SyntheticModel::markov(32, 123);
  const std::vector<int> ctx{5};
  CHECK(a.next_distribution(ctx).probs == b.next_distribution(ctx).probs);
}

TEST_CASE("synthetic model file round-trips bit-exactly") {
  auto model = SyntheticModel::looping(24, 0.9, 31);
  model.add_representations(6, 31);
  model.set_eos(23);
  const auto path = std::filesystem::temp_directory_path() / "guard_model_rt.json";
  model.save(path.string());
  auto loaded = SyntheticModel::load(path.string());
  CHECK(loaded.to_json() == model.to_json());
  const std::vector<int> ctx{9};
  CHECK(loaded.next_distribution(ctx).probs == model.next_distribution(ctx).probs);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic scoring matches hand values") {
  SUBCASE("forced chain continuation scores 0") {
    auto model = SyntheticModel::forced_chain(8);
    const std::vector<int> prompt{0};
    const std::vector<int> cont{1, 2, 3};
    CHECK(model.score_continuation(prompt, cont) == 0.0);
  }
  SUBCASE("uniform rows score -ln 4") {
    SyntheticModel model = SyntheticModel::from_json(R"({
      "vocab_size": 4, "kind": "markov_table", "bias": 0.0,
      "table": [0.25,0.25,0.25,0.25, 0.25,0.25,0.25,0.25,
                0.25,0.25,0.25,0.25, 0.25,0.25,0.25,0.25]})");
    const std::vector<int> prompt{0};
    const std::vector<int> cont{1, 2};
    CHECK(model.score_continuation(prompt, cont) ==
          doctest::Approx(-std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("mixed probabilities average by hand") {
    // p = 0.5 then 0.25 -> (ln 0.5 + ln 0.25)/2
    SyntheticModel model = SyntheticModel::from_json(R"({
      "vocab_size": 4, "kind": "markov_table", "bias": 0.0,
      "table": [0.5,0.5,0.0,0.0, 0.25,0.25,0.25,0.25,
                0.25,0.25,0.25,0.25, 0.25,0.25,0.25,0.25]})");
    const std::vector<int> prompt{0};
    const std::vector<int> cont{1, 2};
    CHECK(model.score_continuation(prompt, cont) ==
          doctest::Approx((std::log(0.5) + std::log(0.25)) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("entropy of a top-M view lower-bounds the full entropy") {
  auto model = SyntheticModel::markov(64, 17);
  const std::vector<int> ctx{10};
  const auto full = model.next_distribution(ctx);
  const double h_full = local_entropy(full);

  // collapse everything but the top 8 into a tail bucket
  auto d = full;
  std::vector<int> ids(64);
  for (int i = 0; i < 64; ++i) ids[i] = i;
  std::sort(ids.begin(), ids.end(),
            [&](int a, int b) { return full.probs[a] > full.probs[b]; });
  Distribution truncated;
  truncated.probs.assign(9, 0.0);
  double mass = 0.0;
  for (int i = 0; i < 8; ++i) {
    truncated.probs[i] = full.probs[ids[i]];
    mass += truncated.probs[i];
  }
  truncated.probs[8] = 1.0 - mass;
  truncated.tail = 8;
  CHECK(local_entropy(truncated) <= h_full + 1e-12);
}

namespace {

// Minimal completion server covering the logprobs wire shape.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      requests.fetch_add(1);
      if (fail_first > 0) {
        --fail_first;
        res.status = 503;
        return;
      }
      const auto body = json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      json resp;
      if (body.value("echo", false)) {
        // echo-scoring: fixed per-token logprobs past the prompt
        resp = {{"choices",
                 {{{"logprobs",
                    {{"token_logprobs", {nullptr, -0.5, -1.5}},
                     {"text_offset", {0, 1, 2}}}}}}}};
      } else {
        resp = {{"choices",
                 {{{"logprobs",
                    {{"top_logprobs",
                      {{{"a", -0.105360515657826},  // ~0.9
                        {"b", -2.302585092994046}}}}}}}}}};  // ~0.1
      }
      res.set_content(resp.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};
  int fail_first = 0;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteProviderConfig remote_cfg(const FakeServer& server) {
  RemoteProviderConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.model = "test-model";
  cfg.top_logprobs = 5;
  cfg.timeout_ms = 2000;
  cfg.retries = 1;
  cfg.vocab_capacity = 32;
  return cfg;
}

}  // namespace

TEST_CASE("remote provider exponentiates top logprobs and fills the tail") {
  FakeServer server;
  RemoteProvider provider(remote_cfg(server));
  const int prompt = provider.intern("Once upon a time");
  const std::vector<int> ctx{prompt};
  const auto d = provider.next_distribution(ctx);
  validate(d);
  REQUIRE(d.tail.has_value());
  CHECK(*d.tail == provider.tail_token());
  const int a = provider.intern("a");
  const int b = provider.intern("b");
  CHECK(d.probs[a] == doctest::Approx(0.9).epsilon(1e-3));
  CHECK(d.probs[b] == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(d.probs[*d.tail] == doctest::Approx(0.0).epsilon(1e-3));
  double sum = 0.0;
  for (double p : d.probs) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("remote provider retries then surfaces the attempt count") {
  FakeServer server;
  server.fail_first = 10;  // more than retries+1
  RemoteProvider provider(remote_cfg(server));
  const int prompt = provider.intern("x");
  const std::vector<int> ctx{prompt};
  try {
    provider.next_distribution(ctx);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.attempts == 2);
    CHECK(e.retriable);
  }
}

TEST_CASE("remote echo-scoring averages continuation logprobs") {
  FakeServer server;
  RemoteProvider provider(remote_cfg(server));
  const int p0 = provider.intern("p");
  const int c0 = provider.intern("q");
  const int c1 = provider.intern("r");
  const std::vector<int> prompt{p0};
  const std::vector<int> cont{c0, c1};
  // prompt text "p" has length 1; offsets 1 and 2 are continuation
  CHECK(provider.score_continuation(prompt, cont) ==
        doctest::Approx((-0.5 + -1.5) / 2.0).epsilon(1e-12));
}

TEST_CASE("remote provider sends bearer auth from the environment") {
  setenv("PROVIDER_API_KEY", "sekrit", 1);
  FakeServer server;
  RemoteProvider provider(remote_cfg(server));
  const int prompt = provider.intern("x");
  const std::vector<int> ctx{prompt};
  provider.next_distribution(ctx);
  CHECK(server.last_auth == "Bearer sekrit");
  unsetenv("PROVIDER_API_KEY");
}

TEST_CASE("remote config validation") {
  RemoteProviderConfig cfg;
  cfg.endpoint = "http://localhost:1";
  cfg.top_logprobs = 1;
  CHECK_THROWS_AS(RemoteProvider{cfg}, std::invalid_argument);
  cfg.top_logprobs = 5;
  cfg.timeout_ms = 0;
  CHECK_THROWS_AS(RemoteProvider{cfg}, std::invalid_argument);
}
