#include "textcue/judge.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "textcue/error.hpp"
#include "textcue/prompts.hpp"

namespace textcue::judge {

using nlohmann::json;

HttpTransport::HttpTransport(std::string url, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    fail(ErrorCode::kInvalidArgument, "judge URL must look like http[s]://host[:port]/path");
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpTransport::post(const std::string& body) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = cli.Post(path_, headers, body, "application/json");
  if (!res) {
    fail(ErrorCode::kJudgeTransport, "judge request failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    fail(ErrorCode::kJudgeTransport, "judge endpoint returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::optional<bool> parse_verdict(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  std::string word;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[i++]))));
  }
  if (word == "YES") return true;
  if (word == "NO") return false;
  return std::nullopt;
}

std::string render_prompt(const eval::Sample& sample, std::string_view candidate) {
  const auto tmpl = prompts::get("judge.free_form");
  if (!tmpl) fail(ErrorCode::kIo, "judge prompt asset missing");
  std::string question = sample.question;
  if (!sample.context.empty()) question = sample.context + " " + question;
  return prompts::render(*tmpl, {{"question", question},
                                 {"gold", sample.answer},
                                 {"candidate", std::string(candidate)}});
}

json request_body(const std::string& model, const json& messages) {
  return json{{"model", model}, {"messages", messages}};
}

std::string response_text(const std::string& body) {
  try {
    const auto j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kJudgeTransport, std::string("malformed judge response: ") + e.what());
  }
}

std::chrono::milliseconds backoff_delay(const Config& config, int attempt) {
  auto delay = config.backoff_base;
  for (int k = 0; k < attempt && delay < config.backoff_cap; ++k) delay *= 2;
  return std::min(delay, config.backoff_cap);
}

Client::Client(Config config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) fail(ErrorCode::kInvalidArgument, "judge client needs a transport");
  if (!config_.sleep) {
    config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::string Client::send(const json& messages, int& retries) const {
  const std::string body = request_body(config_.model, messages).dump();
  for (int attempt = 0;; ++attempt) {
    try {
      return response_text(transport_->post(body));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kJudgeTransport || attempt >= config_.max_retries) throw;
      const auto delay = backoff_delay(config_, attempt);
      spdlog::warn("judge transport error ({}); retry {} in {} ms", e.what(), attempt + 1,
                   delay.count());
      ++retries;
      config_.sleep(delay);
    }
  }
}

eval::FreeFormVerdict Client::judge(const eval::Sample& sample, std::string_view candidate) const {
  eval::FreeFormVerdict v;
  json messages = json::array({{{"role", "user"}, {"content", render_prompt(sample, candidate)}}});
  try {
    std::string reply = send(messages, v.retries);
    auto verdict = parse_verdict(reply);
    if (!verdict) {
      messages.push_back({{"role", "assistant"}, {"content", reply}});
      messages.push_back({{"role", "user"}, {"content", std::string(*prompts::get("judge.reprompt"))}});
      reply = send(messages, v.retries);
      verdict = parse_verdict(reply);
    }
    if (!verdict) {
      v.status = eval::FreeFormVerdict::Status::kParseError;
      v.detail = reply;
      spdlog::warn("judge verdict for sample {} unparseable after reprompt", sample.id);
    } else {
      v.correct = *verdict;
      v.detail = reply;
    }
  } catch (const Error& e) {
    v.status = eval::FreeFormVerdict::Status::kTransportError;
    v.detail = e.what();
    spdlog::error("judge gave up on sample {}: {}", sample.id, e.what());
  }
  if (v.retries > 0) spdlog::info("sample {} judged after {} transport retries", sample.id, v.retries);
  return v;
}

eval::FreeFormScorer Client::scorer() const {
  return [this](const eval::Sample& s, std::string_view candidate) { return judge(s, candidate); };
}

}  // namespace textcue::judge
