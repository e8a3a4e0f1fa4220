#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mars {

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct GatewayRequest {
  std::string system;
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_tokens = 512;

  bool operator==(const GatewayRequest&) const = default;
};

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Gateway {
 public:
  virtual ~Gateway() = default;
  // Completion text. Throws GatewayError.
  virtual std::string complete(const GatewayRequest& req) = 0;
};

// Answers from a callback; every request is kept for inspection.
class ScriptedGateway : public Gateway {
 public:
  using Script = std::function<std::string(const GatewayRequest&)>;
  explicit ScriptedGateway(Script script) : script_(std::move(script)) {}
  // Pops canned replies in order; throws GatewayError when they run out.
  explicit ScriptedGateway(std::deque<std::string> replies);

  std::string complete(const GatewayRequest& req) override;
  const std::vector<GatewayRequest>& requests() const { return requests_; }

 private:
  Script script_;
  std::vector<GatewayRequest> requests_;
  std::mutex mu_;
};

// OpenAI-style chat completions endpoint, e.g. "https://api.openai.com/v1".
struct HttpGatewayConfig {
  std::string base_url;
  std::string api_key;
  std::string model = "gpt-4-0125-preview";
  int timeout_seconds = 120;

  // MARS_LLM_BASE_URL, MARS_LLM_API_KEY, MARS_LLM_MODEL.
  static HttpGatewayConfig from_env();
};

std::unique_ptr<Gateway> http_gateway(const HttpGatewayConfig& cfg);

// Replays a cassette (JSON lines of {"request", "response"}) in order. A
// request that differs from the recorded one throws GatewayError.
std::unique_ptr<Gateway> cassette_gateway(const std::string& path);
// Forwards to `inner` and appends each exchange to the cassette at `path`.
std::unique_ptr<Gateway> recording_gateway(std::unique_ptr<Gateway> inner, const std::string& path);

// "http", "cassette:<path>" or "record:<path>" (live http, recorded).
std::unique_ptr<Gateway> make_gateway(const std::string& spec);

std::string request_json(const GatewayRequest& req);

}  // namespace mars
