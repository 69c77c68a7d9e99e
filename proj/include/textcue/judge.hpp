#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "textcue/eval.hpp"

namespace textcue::judge {

inline constexpr const char* kApiKeyEnv = "TEXTCUE_JUDGE_API_KEY";

/// Moves one request body to the judge endpoint and returns the response
/// body. Failures throw Error{kJudgeTransport}.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const std::string& body) = 0;
};

/// Chat-completions style endpoint over HTTP(S), bearer-token auth.
class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string url, std::string api_key,
                std::chrono::seconds timeout = std::chrono::seconds(60));
  std::string post(const std::string& body) override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

struct Config {
  std::string model = "gpt-4o-mini";
  int max_retries = 3;  // transport retries after the first attempt
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{8000};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Leading-token rule: the first alphabetic word decides; YES -> true,
/// NO -> false, anything else -> nullopt.
std::optional<bool> parse_verdict(std::string_view text);

std::string render_prompt(const eval::Sample& sample, std::string_view candidate);

/// {"model": ..., "messages": [...]}
nlohmann::json request_body(const std::string& model, const nlohmann::json& messages);

/// Pulls choices[0].message.content out of a chat-completions response.
std::string response_text(const std::string& body);

std::chrono::milliseconds backoff_delay(const Config& config, int attempt);

class Client {
 public:
  Client(Config config, std::shared_ptr<Transport> transport);

  /// One verdict with transport retries and a single reprompt when the
  /// verdict does not parse. Never throws for judge-side failures; they are
  /// reported through the verdict status.
  eval::FreeFormVerdict judge(const eval::Sample& sample, std::string_view candidate) const;

  eval::FreeFormScorer scorer() const;

 private:
  std::string send(const nlohmann::json& messages, int& retries) const;

  Config config_;
  std::shared_ptr<Transport> transport_;
};

}  // namespace textcue::judge
