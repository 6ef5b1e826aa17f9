#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "guard/guard.hpp"

namespace guard {

// One generated token's worth of diagnostics, persisted as one NDJSON line.
struct TraceRecord {
  std::string run_id;
  int step = 0;  // 1-based, strictly increasing within a run
  StepDiagnostics diag;

  bool operator==(const TraceRecord&) const = default;
};

std::string trace_line(const TraceRecord& rec);
TraceRecord parse_trace_line(const std::string& line);

void write_trace(std::ostream& out, std::span<const TraceRecord> records);

// Rejects non-finite fields and non-increasing steps within a run.
std::vector<TraceRecord> read_trace(std::istream& in);

// Sum of |x_{i+1} - x_i|; the smoothing comparison between the local and
// global entropy series runs on this.
double total_variation(std::span<const double> series);

}  // namespace guard
