#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "guard/trace.hpp"

#include <json.hpp>

namespace guard {

std::string trace_line(const TraceRecord& rec) {
  nlohmann::json j{
      {"run", rec.run_id},
      {"t", rec.step},
      {"token", rec.diag.chosen_token},
      {"h_loc", rec.diag.h_loc},
      {"h_glob", rec.diag.h_glob},
      {"delta_loc", rec.diag.delta_loc},
      {"delta_glob", rec.diag.delta_glob},
      {"q", rec.diag.q},
      {"lambda_k", rec.diag.lambda_k},
      {"k_t", rec.diag.k_t},
      {"alpha_t", rec.diag.alpha_t},
      {"score", rec.diag.chosen_score},
  };
  return j.dump();
}

TraceRecord parse_trace_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TraceRecord rec;
  rec.run_id = j.at("run").get<std::string>();
  rec.step = j.at("t").get<int>();
  rec.diag.chosen_token = j.at("token").get<int>();
  rec.diag.h_loc = j.at("h_loc").get<double>();
  rec.diag.h_glob = j.at("h_glob").get<double>();
  rec.diag.delta_loc = j.at("delta_loc").get<double>();
  rec.diag.delta_glob = j.at("delta_glob").get<double>();
  rec.diag.q = j.at("q").get<double>();
  rec.diag.lambda_k = j.at("lambda_k").get<double>();
  rec.diag.k_t = j.at("k_t").get<int>();
  rec.diag.alpha_t = j.at("alpha_t").get<double>();
  rec.diag.chosen_score = j.at("score").get<double>();

  for (double v : {rec.diag.h_loc, rec.diag.h_glob, rec.diag.delta_loc,
                   rec.diag.delta_glob, rec.diag.q, rec.diag.lambda_k,
                   rec.diag.alpha_t, rec.diag.chosen_score}) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite trace field");
  }
  return rec;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> records) {
  for (const auto& rec : records) out << trace_line(rec) << '\n';
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::unordered_map<std::string, int> last_step;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRecord rec = parse_trace_line(line);
    auto [it, inserted] = last_step.try_emplace(rec.run_id, rec.step);
    if (!inserted) {
      if (rec.step <= it->second) {
        throw std::invalid_argument("trace steps not strictly increasing for run " +
                                    rec.run_id);
      }
      it->second = rec.step;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

double total_variation(std::span<const double> series) {
  double tv = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    tv += std::abs(series[i] - series[i - 1]);
  }
  return tv;
}

}  // namespace guard
