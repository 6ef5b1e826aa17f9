#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "guard/providers.hpp"

#include <json.hpp>

namespace guard {

namespace {

std::mt19937_64 seeded(std::uint64_t seed) { return std::mt19937_64(seed); }

// Random stochastic row via normalized exponentials.
std::vector<double> random_row(int vocab, std::mt19937_64& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> row(vocab);
  double sum = 0.0;
  for (double& p : row) {
    p = ex(rng);
    sum += p;
  }
  for (double& p : row) p /= sum;
  return row;
}

}  // namespace

SyntheticModel SyntheticModel::markov(int vocab, std::uint64_t seed) {
  if (vocab < 2 || vocab > 256) throw std::invalid_argument("vocab must be in [2, 256]");
  SyntheticModel m(vocab, Kind::kMarkovTable);
  auto rng = seeded(seed);
  m.table_.reserve(static_cast<std::size_t>(vocab) * vocab);
  for (int a = 0; a < vocab; ++a) {
    auto row = random_row(vocab, rng);
    m.table_.insert(m.table_.end(), row.begin(), row.end());
  }
  return m;
}

SyntheticModel SyntheticModel::looping(int vocab, double bias, std::uint64_t seed) {
  if (vocab < 2 || vocab > 256) throw std::invalid_argument("vocab must be in [2, 256]");
  if (bias <= 0.0 || bias >= 1.0) throw std::invalid_argument("bias must be in (0, 1)");
  SyntheticModel m(vocab, Kind::kLooping);
  m.bias_ = bias;
  auto rng = seeded(seed);
  m.table_.reserve(static_cast<std::size_t>(vocab) * vocab);
  for (int a = 0; a < vocab; ++a) {
    auto row = random_row(vocab, rng);
    for (int b = 0; b < vocab; ++b) {
      double p = (1.0 - bias) * row[b];
      if (b == a) p += bias;
      m.table_.push_back(p);
    }
  }
  return m;
}

SyntheticModel SyntheticModel::forced_chain(int vocab) {
  if (vocab < 2 || vocab > 256) throw std::invalid_argument("vocab must be in [2, 256]");
  SyntheticModel m(vocab, Kind::kForcedChain);
  m.table_.assign(static_cast<std::size_t>(vocab) * vocab, 0.0);
  for (int a = 0; a < vocab; ++a) {
    m.table_[static_cast<std::size_t>(a) * vocab + (a + 1) % vocab] = 1.0;
  }
  return m;
}

void SyntheticModel::add_representations(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("rep dim must be >= 1");
  rep_dim_ = dim;
  reps_.assign(static_cast<std::size_t>(vocab_) * dim, 0.0f);
  auto rng = seeded(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  for (int v = 0; v < vocab_; ++v) {
    float* r = reps_.data() + static_cast<std::size_t>(v) * dim;
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      r[i] = gauss(rng);
      norm += static_cast<double>(r[i]) * r[i];
    }
    const float inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (int i = 0; i < dim; ++i) r[i] *= inv;
  }
}

std::span<const double> SyntheticModel::row(int token) const {
  if (token < 0 || token >= vocab_) throw std::out_of_range("token id out of range");
  return {table_.data() + static_cast<std::size_t>(token) * vocab_,
          static_cast<std::size_t>(vocab_)};
}

Distribution SyntheticModel::next_distribution(std::span<const int> context) {
  if (context.empty()) throw std::invalid_argument("context must be non-empty");
  const int last = context.back();
  if (last < 0 || last >= vocab_) throw std::out_of_range("context token out of range");
  Distribution d;
  d.probs.assign(table_.begin() + static_cast<std::size_t>(last) * vocab_,
                 table_.begin() + static_cast<std::size_t>(last + 1) * vocab_);
  return d;
}

std::span<const float> SyntheticModel::representation(int token) const {
  if (rep_dim_ == 0) throw CapabilityError("model has no representation table");
  if (token < 0 || token >= vocab_) throw std::out_of_range("token id out of range");
  return {reps_.data() + static_cast<std::size_t>(token) * rep_dim_,
          static_cast<std::size_t>(rep_dim_)};
}

double SyntheticModel::score_continuation(std::span<const int> prompt,
                                          std::span<const int> continuation) {
  if (prompt.empty() || continuation.empty()) {
    throw std::invalid_argument("prompt and continuation must be non-empty");
  }
  std::vector<int> ctx(prompt.begin(), prompt.end());
  double sum = 0.0;
  for (int tok : continuation) {
    const Distribution d = next_distribution(ctx);
    const double p = d.probs[tok];
    sum += std::log(p);  // -inf if the token was impossible under the model
    ctx.push_back(tok);
  }
  return sum / static_cast<double>(continuation.size());
}

std::string SyntheticModel::to_json() const {
  nlohmann::json j;
  j["vocab_size"] = vocab_;
  switch (kind_) {
    case Kind::kMarkovTable: j["kind"] = "markov_table"; break;
    case Kind::kLooping: j["kind"] = "looping"; break;
    case Kind::kForcedChain: j["kind"] = "forced_chain"; break;
  }
  j["bias"] = bias_;
  if (eos_) j["eos"] = *eos_;
  j["table"] = table_;
  if (rep_dim_ > 0) {
    j["rep_dim"] = rep_dim_;
    j["reps"] = reps_;
  }
  return j.dump();
}

SyntheticModel SyntheticModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  Kind k;
  if (kind == "markov_table") k = Kind::kMarkovTable;
  else if (kind == "looping") k = Kind::kLooping;
  else if (kind == "forced_chain") k = Kind::kForcedChain;
  else throw std::invalid_argument("unknown synthetic model kind: " + kind);

  SyntheticModel m(j.at("vocab_size").get<int>(), k);
  m.bias_ = j.value("bias", 0.0);
  if (j.contains("eos")) m.eos_ = j["eos"].get<int>();
  m.table_ = j.at("table").get<std::vector<double>>();
  if (m.table_.size() != static_cast<std::size_t>(m.vocab_) * m.vocab_) {
    throw std::invalid_argument("transition table size mismatch");
  }
  if (j.contains("rep_dim")) {
    m.rep_dim_ = j["rep_dim"].get<int>();
    m.reps_ = j.at("reps").get<std::vector<float>>();
    if (m.reps_.size() != static_cast<std::size_t>(m.vocab_) * m.rep_dim_) {
      throw std::invalid_argument("representation table size mismatch");
    }
  }
  for (int a = 0; a < m.vocab_; ++a) {
    Distribution row;
    row.probs.assign(m.table_.begin() + static_cast<std::size_t>(a) * m.vocab_,
                     m.table_.begin() + static_cast<std::size_t>(a + 1) * m.vocab_);
    validate(row);
  }
  return m;
}

void SyntheticModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json() << '\n';
}

SyntheticModel SyntheticModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace guard
