// guardctl: generate / eval / bench / verify-props / plot-trace
//
// Decoding engine CLI. Synthetic providers make every command
// deterministic under a fixed seed; see README.md for the config keys.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "guard/bench.hpp"
#include "guard/engine.hpp"
#include "guard/metrics.hpp"
#include "guard/stats.hpp"
#include "guard/trace.hpp"

namespace {

using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct ProviderOptions {
  std::string provider = "synthetic";
  std::string model_file;      // synthetic model JSON; empty -> seeded markov
  int synthetic_vocab = 64;
  std::string endpoint;
  std::string model;
  int top_logprobs = 20;
  int timeout_ms = 30000;
  int retries = 2;
};

struct PromptOptions {
  std::string inline_prompt;  // token ids, comma/space separated (synthetic)
  std::string prompt_file;    // one prompt per line
};

std::vector<int> parse_token_line(const std::string& line) {
  std::vector<int> out;
  std::stringstream ss(line);
  std::string item;
  while (ss >> item) {
    if (!item.empty() && item.back() == ',') item.pop_back();
    out.push_back(std::stoi(item));
  }
  return out;
}

// Loads prompts as token-id lists (synthetic) or raw text lines (remote).
std::vector<std::string> load_prompt_lines(const PromptOptions& opt) {
  if (opt.inline_prompt.empty() == opt.prompt_file.empty()) {
    throw CLI::ValidationError("prompt", "exactly one of --prompt / --prompt-file required");
  }
  if (!opt.inline_prompt.empty()) return {opt.inline_prompt};
  std::ifstream in(opt.prompt_file);
  if (!in) throw CLI::ValidationError("prompt-file", "cannot open " + opt.prompt_file);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw CLI::ValidationError("prompt-file", "no prompts found");
  return lines;
}

std::unique_ptr<guard::DistributionSource> make_provider(const ProviderOptions& opt,
                                                         std::uint64_t seed) {
  if (opt.provider == "synthetic") {
    if (!opt.model_file.empty()) {
      return std::make_unique<guard::SyntheticModel>(
          guard::SyntheticModel::load(opt.model_file));
    }
    return std::make_unique<guard::SyntheticModel>(
        guard::SyntheticModel::markov(opt.synthetic_vocab, seed));
  }
  if (opt.provider == "remote") {
    if (opt.endpoint.empty()) {
      throw CLI::ValidationError("endpoint", "--endpoint required for the remote provider");
    }
    guard::RemoteProviderConfig cfg;
    cfg.endpoint = opt.endpoint;
    cfg.model = opt.model;
    cfg.top_logprobs = opt.top_logprobs;
    cfg.timeout_ms = opt.timeout_ms;
    cfg.retries = opt.retries;
    return std::make_unique<guard::RemoteProvider>(cfg);
  }
  throw CLI::ValidationError("provider", "unknown provider: " + opt.provider);
}

json effective_config_json(const guard::StrategyConfig& scfg, const ProviderOptions& pcfg,
                           int max_tokens) {
  return json{
      {"strategy", guard::to_string(scfg.kind)},
      {"lambda", scfg.guard.lambda},
      {"window", scfg.guard.window},
      {"epsilon", scfg.guard.epsilon},
      {"k_floor", scfg.guard.k_floor},
      {"k_span", scfg.guard.k_span},
      {"alpha_variant",
       scfg.guard.alpha_variant == guard::AlphaVariant::kPseudocode ? "pseudocode" : "prose"},
      {"global_median_history", scfg.guard.global_median_history},
      {"max_tokens", max_tokens},
      {"tau", scfg.tau},
      {"k", scfg.k},
      {"p", scfg.p},
      {"typical_tau", scfg.typical_tau},
      {"cs_k", scfg.cs_k},
      {"cs_alpha", scfg.cs_alpha},
      {"seed", scfg.seed},
      {"provider", pcfg.provider},
  };
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const guard::StrategyConfig& scfg, const ProviderOptions& pcfg,
                 const PromptOptions& prompts_opt, int max_tokens,
                 const std::string& out_path, const std::string& trace_path,
                 const std::string& report_path) {
  const auto prompt_lines = load_prompt_lines(prompts_opt);

  auto provider = make_provider(pcfg, scfg.seed);
  auto* remote = dynamic_cast<guard::RemoteProvider*>(provider.get());

  std::vector<std::vector<int>> prompts;
  for (const auto& line : prompt_lines) {
    if (remote) {
      prompts.push_back({remote->intern(line)});
    } else {
      auto toks = parse_token_line(line);
      if (toks.empty()) throw CLI::ValidationError("prompt", "empty prompt line");
      prompts.push_back(std::move(toks));
    }
  }

  // One stream per prompt; streams run concurrently and are flushed in
  // prompt order so outputs stay deterministic.
  std::vector<std::future<guard::GenerationRun>> futures;
  for (const auto& prompt : prompts) {
    futures.push_back(std::async(std::launch::async, [&, prompt] {
      auto strategy = guard::make_strategy(scfg, *provider, prompt);
      return guard::generate(*provider, *strategy, prompt, max_tokens);
    }));
  }

  std::vector<guard::GenerationRun> runs;
  for (auto& f : futures) runs.push_back(f.get());

  std::vector<guard::TraceRecord> records;
  bool any_failed = false;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    char run_id[32];
    std::snprintf(run_id, sizeof run_id, "run-%03zu", r);
    for (std::size_t t = 0; t < runs[r].diagnostics.size(); ++t) {
      records.push_back({run_id, static_cast<int>(t + 1), runs[r].diagnostics[t]});
    }
    if (!runs[r].ok) {
      any_failed = true;
      std::cerr << run_id << ": provider error: " << runs[r].error << '\n';
    }
  }

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("trace", "cannot open " + trace_path);
    guard::write_trace(out, records);
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("out", "cannot open " + out_path);
    for (const auto& run : runs) {
      for (std::size_t i = 0; i < run.tokens.size(); ++i) {
        out << (i ? " " : "") << run.tokens[i];
      }
      out << '\n';
    }
  }

  if (!report_path.empty()) {
    json rep;
    rep["config"] = effective_config_json(scfg, pcfg, max_tokens);
    rep["runs"] = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      rep["runs"].push_back({
          {"run", r},
          {"tokens", runs[r].tokens.size()},
          {"provider_ns", runs[r].provider_ns},
          {"strategy_ns", runs[r].strategy_ns},
          {"ok", runs[r].ok},
          {"error", runs[r].error},
      });
    }
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("report", "cannot open " + report_path);
    out << rep.dump(2) << '\n';
  }

  return any_failed ? kExitFailure : 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& tokens_path, const ProviderOptions& pcfg,
             const std::string& prompt_file, std::uint64_t seed,
             const std::string& report_path) {
  std::ifstream in(tokens_path);
  if (!in) throw CLI::ValidationError("tokens", "cannot open " + tokens_path);
  std::vector<std::vector<int>> continuations;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) continuations.push_back(parse_token_line(line));
  }
  if (continuations.empty()) throw CLI::ValidationError("tokens", "no token lines found");

  std::unique_ptr<guard::DistributionSource> scorer;
  std::vector<std::vector<int>> prompts;
  if (!prompt_file.empty()) {
    PromptOptions popt;
    popt.prompt_file = prompt_file;
    for (const auto& pl : load_prompt_lines(popt)) prompts.push_back(parse_token_line(pl));
    scorer = make_provider(pcfg, seed);
  }

  json rep;
  // MAUVE and BERTScore need external embedding models and are not
  // computed here; flagged so these numbers are not mistaken for them.
  rep["excluded_metrics"] = {"mauve", "bertscore"};
  rep["sequences"] = json::array();
  double div_sum = 0.0;
  for (std::size_t i = 0; i < continuations.size(); ++i) {
    const auto& cont = continuations[i];
    json entry{{"index", i}, {"length", cont.size()}};
    try {
      const auto d = guard::diversity(cont);
      entry["diversity"] = {{"n2", d.per_n[0]}, {"n3", d.per_n[1]}, {"n4", d.per_n[2]},
                            {"div", d.div}};
      div_sum += d.div;
    } catch (const guard::MetricUndefined& e) {
      entry["diversity"] = nullptr;
      entry["diversity_error"] = e.what();
    }
    json reps;
    for (const auto& [n, c] : guard::repetition_profile(cont)) {
      reps[std::to_string(n)] = c;
    }
    entry["max_ngram_repeats"] = reps;
    if (scorer && i < prompts.size()) {
      entry["coherence"] = guard::coherence(*scorer, prompts[i], cont);
    } else {
      entry["coherence"] = "unavailable";
    }
    rep["sequences"].push_back(std::move(entry));
  }
  rep["mean_div"] = div_sum / static_cast<double>(continuations.size());

  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("report", "cannot open " + report_path);
    out << rep.dump(2) << '\n';
  }
  std::cout << "sequences: " << continuations.size() << "  mean div: " << rep["mean_div"]
            << "  (mauve/bertscore excluded)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(int tokens, int context_len, int rep_dim, int vocab, std::uint64_t seed,
              const std::vector<std::string>& strategy_names,
              const std::string& report_path, bool compare_mc) {
  std::vector<guard::StrategyConfig> cfgs;
  for (const auto& name : strategy_names) {
    const auto kind = guard::parse_strategy_kind(name);
    if (!kind) throw CLI::ValidationError("strategies", "unknown strategy: " + name);
    guard::StrategyConfig c;
    c.kind = *kind;
    c.seed = seed;
    cfgs.push_back(c);
  }

  guard::BenchSpec spec;
  spec.tokens = tokens;
  spec.context_len = context_len;
  spec.rep_dim = rep_dim;
  spec.vocab = vocab;
  spec.seed = seed;
  const auto report = guard::bench_strategies(cfgs, spec);

  std::cout << "cpu: " << report.cpu << "\ncontext: " << report.context_len
            << "  rep_dim: " << report.rep_dim << "\n";
  for (const auto& s : report.strategies) {
    std::printf("%-20s mean %10.1f ns  median %10.1f ns  p99 %10.1f ns  %12.0f tok/s\n",
                s.name.c_str(), s.mean_ns, s.median_ns, s.p99_ns, s.tokens_per_sec);
  }

  json j{{"cpu", report.cpu},
         {"timestamp", report.timestamp},
         {"vocab", report.vocab},
         {"rep_dim", report.rep_dim},
         {"context_len", report.context_len},
         {"strategies", json::array()}};
  for (const auto& s : report.strategies) {
    j["strategies"].push_back({{"name", s.name},
                               {"mean_ns", s.mean_ns},
                               {"median_ns", s.median_ns},
                               {"p99_ns", s.p99_ns},
                               {"tokens", s.tokens},
                               {"tokens_per_sec", s.tokens_per_sec}});
  }

  if (compare_mc) {
    // Serial vs OpenMP Monte Carlo throughput on the estimator kernels.
    guard::ProcessSpec ps;
    ps.replications = 20000;
    ps.horizon = 256;
    const auto time_run = [&](bool parallel) {
      const auto t0 = std::chrono::steady_clock::now();
      guard::run_bias_experiment(ps, parallel);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double serial_s = time_run(false);
    const double parallel_s = time_run(true);
    std::printf("monte-carlo %d paths x %d steps: serial %.3fs, openmp %.3fs (%.1fx)\n",
                ps.replications, ps.horizon, serial_s, parallel_s, serial_s / parallel_s);
    j["monte_carlo"] = {{"paths", ps.replications},
                        {"steps", ps.horizon},
                        {"serial_s", serial_s},
                        {"openmp_s", parallel_s}};
  }

  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("report", "cannot open " + report_path);
    out << j.dump(2) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify-props

int cmd_verify_props(int replications, std::uint64_t seed, double inject_bias,
                     const std::string& report_path) {
  json rep;
  rep["assertions"] = json::array();
  bool all_ok = true;
  const auto record = [&](const std::string& name, bool ok, const json& details) {
    rep["assertions"].push_back({{"name", name}, {"pass", ok}, {"details", details}});
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "  " << details.dump() << '\n';
    all_ok = all_ok && ok;
  };

  // Proposition 1: unbiasedness of the decayed average on stationary
  // processes, |z| <= 3 against the analytic mean.
  for (double lambda : {0.5, 0.91, 0.95, 0.99, 1.0}) {
    guard::ProcessSpec spec;
    spec.lambda = lambda;
    spec.replications = replications;
    spec.seed = seed;
    spec.injected_bias = inject_bias;
    const auto r = guard::run_bias_experiment(spec);
    record("prop1_iid_uniform_lambda_" + std::to_string(lambda), std::abs(r.z_score) <= 3.0,
           {{"empirical_mean", r.empirical_mean},
            {"process_mean", r.process_mean},
            {"se", r.standard_error},
            {"z", r.z_score}});
  }
  {
    guard::ProcessSpec spec;
    spec.kind = guard::ProcessKind::kAr1;
    spec.replications = replications;
    spec.seed = seed + 1;
    spec.injected_bias = inject_bias;
    const auto r = guard::run_bias_experiment(spec);
    record("prop1_ar1", std::abs(r.z_score) <= 3.0,
           {{"empirical_mean", r.empirical_mean},
            {"process_mean", r.process_mean},
            {"z", r.z_score}});
  }

  // Proposition 2: with lambda = 1 the estimator is the sample mean and
  // Var decays like 1/t (log-log slope -1).
  {
    guard::ProcessSpec spec;
    spec.lambda = 1.0;
    spec.replications = replications;
    spec.seed = seed + 2;
    const int grid[] = {100, 1000, 10000};
    const auto r = guard::run_variance_decay(spec, grid);
    record("prop2_lambda1_slope", std::abs(r.slope + 1.0) <= 0.15,
           {{"slope", r.slope}, {"variances", r.variances}});
  }
  // With lambda < 1 the geometric weights leave a variance floor of
  // sigma^2 (1-lambda)/(1+lambda); variance decreases monotonically to it.
  {
    guard::ProcessSpec spec;
    spec.lambda = 0.95;
    spec.replications = replications;
    spec.seed = seed + 3;
    const int grid[] = {2, 5, 10, 20, 50, 200};
    const auto r = guard::run_variance_decay(spec, grid);
    bool monotone = true;
    for (std::size_t i = 1; i + 1 < r.variances.size(); ++i) {
      if (r.variances[i] > r.variances[i - 1] * 1.05) monotone = false;
    }
    const double sigma2 = (spec.hi - spec.lo) * (spec.hi - spec.lo) / 12.0;
    const double floor = sigma2 * (1.0 - spec.lambda) / (1.0 + spec.lambda);
    const double floor_ratio = r.variances.back() / floor;
    record("prop2_lambda095_floor", monotone && floor_ratio > 0.8 && floor_ratio < 1.25,
           {{"variances", r.variances}, {"analytic_floor", floor},
            {"floor_ratio", floor_ratio}});
  }

  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw CLI::ValidationError("report", "cannot open " + report_path);
    out << rep.dump(2) << '\n';
  }
  return all_ok ? 0 : kExitFailure;
}

// ---------------------------------------------------------------------------
// plot-trace

void write_svg(const std::string& path, const std::string& title,
               const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr double W = 800, H = 400, pad = 50;
  double lo = 1e300, hi = -1e300;
  std::size_t n = 0;
  for (const auto& [name, vals] : series) {
    for (double v : vals) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    n = std::max(n, vals.size());
  }
  if (hi <= lo) hi = lo + 1.0;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& vals = series[s].second;
    out << "<polyline fill=\"none\" stroke=\"" << colors[s % 3] << "\" points=\"";
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double x = pad + (W - 2 * pad) * (n > 1 ? double(i) / (n - 1) : 0.0);
      const double y = H - pad - (H - 2 * pad) * (vals[i] - lo) / (hi - lo);
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n<text x=\"" << pad << "\" y=\"" << 40 + 16 * s << "\" fill=\""
        << colors[s % 3] << "\">" << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
}

int cmd_plot_trace(const std::string& trace_path, const std::string& out_dir) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open trace: " << trace_path << '\n';
    return kExitConfig;
  }
  std::vector<guard::TraceRecord> records;
  try {
    records = guard::read_trace(in);
  } catch (const std::exception& e) {
    std::cerr << "malformed trace: " << e.what() << '\n';
    return kExitFailure;
  }
  if (records.empty()) {
    std::cerr << "trace is empty\n";
    return kExitFailure;
  }

  std::filesystem::create_directories(out_dir);
  std::map<std::string, std::vector<const guard::TraceRecord*>> by_run;
  for (const auto& r : records) by_run[r.run_id].push_back(&r);

  for (const auto& [run_id, recs] : by_run) {
    std::vector<double> h_loc, h_glob, k_t, alpha_t;
    for (const auto* r : recs) {
      h_loc.push_back(r->diag.h_loc);
      h_glob.push_back(r->diag.h_glob);
      k_t.push_back(static_cast<double>(r->diag.k_t));
      alpha_t.push_back(r->diag.alpha_t);
    }
    write_svg(out_dir + "/" + run_id + "_entropy.svg", run_id + " entropy",
              {{"H_loc", h_loc}, {"H_glob", h_glob}});
    write_svg(out_dir + "/" + run_id + "_adapt.svg", run_id + " k_t / alpha_t",
              {{"k_t", k_t}, {"alpha_t", alpha_t}});
    std::printf("%s: TV(H_loc)=%.4f TV(H_glob)=%.4f steps=%zu\n", run_id.c_str(),
                guard::total_variation(h_loc), guard::total_variation(h_glob), recs.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GUARD decoding engine"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI config; keys live under a section named for the subcommand");

  guard::StrategyConfig scfg;
  ProviderOptions pcfg;
  PromptOptions prompts;
  int max_tokens = 256;
  std::string strategy_name = "guard";
  std::string alpha_variant = "pseudocode";
  std::string out_path, trace_path, report_path;

  const auto add_provider_flags = [&](CLI::App* cmd) {
    cmd->add_option("--provider", pcfg.provider, "synthetic|remote")
        ->check(CLI::IsMember({"synthetic", "remote"}));
    cmd->add_option("--model-file", pcfg.model_file, "Synthetic model JSON file");
    cmd->add_option("--synthetic-vocab", pcfg.synthetic_vocab,
                    "Vocab size for the default seeded synthetic model");
    cmd->add_option("--endpoint", pcfg.endpoint, "Remote provider base URL");
    cmd->add_option("--model", pcfg.model, "Remote model name");
    cmd->add_option("--top-logprobs", pcfg.top_logprobs, "Top-M logprobs per step");
    cmd->add_option("--timeout-ms", pcfg.timeout_ms, "Request timeout");
    cmd->add_option("--retries", pcfg.retries, "Retry count for provider errors");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "Decode continuations for prompts");
  gen->add_option("--strategy", strategy_name,
                  "greedy|temperature|top_k|top_p|typical|contrastive_search|guard");
  gen->add_option("--lambda", scfg.guard.lambda, "Global entropy decay");
  gen->add_option("--window", scfg.guard.window, "Recent entropy window w");
  gen->add_option("--epsilon", scfg.guard.epsilon, "Stability epsilon");
  gen->add_option("--max-tokens", max_tokens, "Maximum continuation length");
  gen->add_option("--alpha-variant", alpha_variant, "pseudocode|prose")
      ->check(CLI::IsMember({"pseudocode", "prose"}));
  gen->add_flag("--global-median-history", scfg.guard.global_median_history,
                "Median over the history of global entropies instead of the current value");
  gen->add_option("--tau", scfg.tau, "Temperature");
  gen->add_option("--k", scfg.k, "Top-k size");
  gen->add_option("--p", scfg.p, "Top-p mass");
  gen->add_option("--typical-tau", scfg.typical_tau, "Typical sampling mass");
  gen->add_option("--cs-k", scfg.cs_k, "Contrastive search candidate count");
  gen->add_option("--cs-alpha", scfg.cs_alpha, "Contrastive search penalty weight");
  gen->add_option("--seed", scfg.seed, "Seed for stochastic strategies and models");
  gen->add_option("--prompt", prompts.inline_prompt, "Inline prompt (token ids)");
  gen->add_option("--prompt-file", prompts.prompt_file, "File of prompts, one per line");
  gen->add_option("--out", out_path, "Continuation token ids, one line per prompt");
  gen->add_option("--trace", trace_path, "Per-step NDJSON trace output");
  gen->add_option("--report", report_path, "Run report (effective config + timings)");
  add_provider_flags(gen);

  // eval
  std::string tokens_path, eval_prompt_file;
  auto* ev = app.add_subcommand("eval", "Diversity/coherence over generated tokens");
  ev->add_option("--tokens", tokens_path, "Token file produced by generate --out")
      ->required();
  ev->add_option("--prompt-file", eval_prompt_file,
                 "Prompts for coherence scoring (optional)");
  ev->add_option("--seed", scfg.seed, "Seed for the default synthetic scorer");
  ev->add_option("--report", report_path, "Evaluation report path");
  add_provider_flags(ev);

  // bench
  int bench_tokens = 10000, bench_context = 256, bench_rep_dim = 4096, bench_vocab = 64;
  bool compare_mc = false;
  std::vector<std::string> bench_strategies_names{"greedy", "top_k", "typical",
                                                  "contrastive_search", "guard"};
  auto* be = app.add_subcommand("bench", "Per-token strategy overhead");
  be->add_option("--tokens", bench_tokens, "Measured tokens per strategy");
  be->add_option("--context", bench_context, "Context length for CS");
  be->add_option("--rep-dim", bench_rep_dim, "Representation dimension");
  be->add_option("--vocab", bench_vocab, "Synthetic vocab size");
  be->add_option("--strategies", bench_strategies_names, "Strategies to measure");
  be->add_option("--seed", scfg.seed, "Harness seed");
  be->add_option("--report", report_path, "Machine-readable report path");
  be->add_flag("--compare-mc", compare_mc, "Also compare serial vs OpenMP Monte Carlo");

  // verify-props
  int replications = 10000;
  double inject_bias = 0.0;
  auto* vp = app.add_subcommand("verify-props",
                                "Monte Carlo checks of the estimator propositions");
  vp->add_option("--replications", replications, "Paths per experiment")
      ->check(CLI::Range(1000, 10000000));
  vp->add_option("--seed", scfg.seed, "Experiment seed");
  vp->add_option("--inject-bias", inject_bias,
                 "Offset added to every estimate (negative-control fixture)");
  vp->add_option("--report", report_path, "Machine-readable report path");

  // plot-trace
  std::string plot_out_dir = "plots";
  auto* pl = app.add_subcommand("plot-trace", "Render SVG plots from a trace file");
  pl->add_option("--trace", trace_path, "Trace file")->required();
  pl->add_option("--out-dir", plot_out_dir, "Output directory");

  for (auto* cmd : {gen, ev, be, vp, pl}) {
    cmd->configurable(true);
    cmd->fallthrough(true);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto kind = guard::parse_strategy_kind(strategy_name);
      if (!kind) {
        std::cerr << "unknown strategy: " << strategy_name << '\n';
        return kExitConfig;
      }
      scfg.kind = *kind;
      scfg.guard.max_tokens = max_tokens;
      scfg.guard.alpha_variant = alpha_variant == "prose" ? guard::AlphaVariant::kProse
                                                          : guard::AlphaVariant::kPseudocode;
      return cmd_generate(scfg, pcfg, prompts, max_tokens, out_path, trace_path,
                          report_path);
    }
    if (ev->parsed()) {
      return cmd_eval(tokens_path, pcfg, eval_prompt_file, scfg.seed, report_path);
    }
    if (be->parsed()) {
      return cmd_bench(bench_tokens, bench_context, bench_rep_dim, bench_vocab, scfg.seed,
                       bench_strategies_names, report_path, compare_mc);
    }
    if (vp->parsed()) {
      return cmd_verify_props(replications, scfg.seed, inject_bias, report_path);
    }
    if (pl->parsed()) {
      return cmd_plot_trace(trace_path, plot_out_dir);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
