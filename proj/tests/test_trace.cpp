#include <doctest.h>

#include <random>
#include <sstream>

#include "guard/trace.hpp"

using namespace guard;

namespace {

TraceRecord random_record(std::mt19937_64& rng, const std::string& run, int step) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  TraceRecord r;
  r.run_id = run;
  r.step = step;
  r.diag.h_loc = std::abs(u(rng));
  r.diag.h_glob = std::abs(u(rng));
  r.diag.delta_loc = u(rng);
  r.diag.delta_glob = u(rng);
  r.diag.q = 1.0 + std::abs(u(rng));
  r.diag.lambda_k = 0.5;
  r.diag.k_t = 5 + static_cast<int>(rng() % 11);
  r.diag.alpha_t = 0.5;
  r.diag.chosen_token = static_cast<int>(rng() % 64);
  r.diag.chosen_score = std::abs(u(rng));
  return r;
}

}  // namespace

TEST_CASE("trace round-trips exactly") {
  std::mt19937_64 rng(15);
  std::vector<TraceRecord> records;
  for (int run = 0; run < 3; ++run) {
    for (int t = 1; t <= 50; ++t) {
      records.push_back(random_record(rng, "run-" + std::to_string(run), t));
    }
  }
  std::stringstream ss;
  write_trace(ss, records);
  const auto parsed = read_trace(ss);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(parsed[i] == records[i]);
}

TEST_CASE("trace rejects non-increasing steps") {
  std::mt19937_64 rng(16);
  std::stringstream ss;
  ss << trace_line(random_record(rng, "r", 1)) << '\n'
     << trace_line(random_record(rng, "r", 1)) << '\n';
  CHECK_THROWS_AS(read_trace(ss), std::invalid_argument);
}

TEST_CASE("trace rejects non-finite fields") {
  std::stringstream ss;
  ss << R"({"run":"r","t":1,"token":3,"h_loc":1.0,"h_glob":1.0,"delta_loc":0.0,)"
     << R"("delta_glob":0.0,"q":null,"lambda_k":0.0,"k_t":10,"alpha_t":0.5,"score":0.1})"
     << '\n';
  CHECK_THROWS(read_trace(ss));
}

TEST_CASE("trace rejects garbage lines") {
  std::stringstream ss;
  ss << "not json at all\n";
  CHECK_THROWS(read_trace(ss));
}

TEST_CASE("total variation") {
  const double flat[] = {1.0, 1.0, 1.0};
  CHECK(total_variation(flat) == 0.0);
  const double saw[] = {0.0, 1.0, 0.0, 1.0};
  CHECK(total_variation(saw) == 3.0);
  CHECK(total_variation({}) == 0.0);
}
