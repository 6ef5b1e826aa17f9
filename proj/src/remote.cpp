#include <cmath>
#include <cstdlib>
#include <mutex>
#include <semaphore>
#include <unordered_map>

#include "guard/providers.hpp"

#include <httplib.h>
#include <json.hpp>

namespace guard {

struct RemoteProvider::Impl {
  RemoteProviderConfig cfg;
  httplib::Client client;
  std::counting_semaphore<256> in_flight;

  std::mutex mu;
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> texts;

  explicit Impl(RemoteProviderConfig c)
      : cfg(std::move(c)), client(cfg.endpoint), in_flight(cfg.max_in_flight) {
    if (cfg.top_logprobs < 2) throw std::invalid_argument("top_logprobs must be >= 2");
    if (cfg.timeout_ms <= 0) throw std::invalid_argument("timeout must be positive");
    client.set_connection_timeout(0, cfg.timeout_ms * 1000LL);
    client.set_read_timeout(0, cfg.timeout_ms * 1000LL);
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) {
      client.set_bearer_token_auth(key);
    }
  }

  int intern_locked(const std::string& text) {
    auto [it, inserted] = ids.try_emplace(text, static_cast<int>(texts.size()));
    if (inserted) {
      if (static_cast<int>(texts.size()) >= cfg.vocab_capacity - 1) {
        ids.erase(it);
        throw ProviderError("token vocabulary exceeded vocab_capacity");
      }
      texts.push_back(text);
    }
    return it->second;
  }

  std::string render(std::span<const int> context) {
    std::lock_guard lock(mu);
    std::string out;
    for (int id : context) {
      if (id < 0 || id >= static_cast<int>(texts.size())) {
        throw std::out_of_range("unknown token id in context");
      }
      out += texts[id];
    }
    return out;
  }

  nlohmann::json post(const nlohmann::json& body) {
    in_flight.acquire();
    struct Release {
      std::counting_semaphore<256>& sem;
      ~Release() { sem.release(); }
    } release{in_flight};

    std::string last_error;
    for (int attempt = 1; attempt <= cfg.retries + 1; ++attempt) {
      auto res = client.Post("/v1/completions", body.dump(), "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "http status " + std::to_string(res->status);
        continue;
      }
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        last_error = std::string("malformed response: ") + e.what();
      }
    }
    throw ProviderError("provider request failed after " +
                            std::to_string(cfg.retries + 1) + " attempts: " + last_error,
                        cfg.retries + 1, /*retriable=*/true);
  }
};

RemoteProvider::RemoteProvider(RemoteProviderConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {}

RemoteProvider::~RemoteProvider() = default;

int RemoteProvider::vocab_size() const { return impl_->cfg.vocab_capacity; }

int RemoteProvider::tail_token() const { return impl_->cfg.vocab_capacity - 1; }

int RemoteProvider::intern(const std::string& token_text) {
  std::lock_guard lock(impl_->mu);
  return impl_->intern_locked(token_text);
}

const std::string& RemoteProvider::token_text(int id) const {
  std::lock_guard lock(impl_->mu);
  if (id < 0 || id >= static_cast<int>(impl_->texts.size())) {
    throw std::out_of_range("unknown token id");
  }
  return impl_->texts[id];
}

Distribution RemoteProvider::next_distribution(std::span<const int> context) {
  nlohmann::json body{
      {"model", impl_->cfg.model},
      {"prompt", impl_->render(context)},
      {"max_tokens", 1},
      {"logprobs", impl_->cfg.top_logprobs},
  };
  const auto res = impl_->post(body);

  Distribution d;
  d.probs.assign(static_cast<std::size_t>(impl_->cfg.vocab_capacity), 0.0);
  d.tail = tail_token();
  double mass = 0.0;
  try {
    const auto& top = res.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
    std::lock_guard lock(impl_->mu);
    for (auto it = top.begin(); it != top.end(); ++it) {
      const int id = impl_->intern_locked(it.key());
      const double p = std::exp(it.value().get<double>());
      d.probs[id] = p;
      mass += p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed logprobs payload: ") + e.what());
  }
  if (mass > 1.0) {
    // logprob rounding can push the top-M mass slightly past 1
    for (double& p : d.probs) p /= mass;
    mass = 1.0;
  }
  d.probs[*d.tail] = 1.0 - mass;
  return d;
}

double RemoteProvider::score_continuation(std::span<const int> prompt,
                                          std::span<const int> continuation) {
  const std::string prompt_text = impl_->render(prompt);
  std::vector<int> full(prompt.begin(), prompt.end());
  full.insert(full.end(), continuation.begin(), continuation.end());

  nlohmann::json body{
      {"model", impl_->cfg.model},
      {"prompt", impl_->render(full)},
      {"max_tokens", 0},
      {"echo", true},
      {"logprobs", 0},
  };
  const auto res = impl_->post(body);
  try {
    const auto& lp = res.at("choices").at(0).at("logprobs");
    const auto& token_logprobs = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < token_logprobs.size(); ++i) {
      if (offsets.at(i).get<std::size_t>() < prompt_text.size()) continue;
      if (token_logprobs.at(i).is_null()) continue;
      sum += token_logprobs.at(i).get<double>();
      ++n;
    }
    if (n == 0) throw CapabilityError("provider returned no continuation logprobs");
    return sum / n;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed echo-scoring payload: ") + e.what());
  }
}

}  // namespace guard
