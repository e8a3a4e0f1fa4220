#include "mars/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>

#include "httplib.h"
#include "json.hpp"

namespace mars {

using nlohmann::json;

namespace {

json to_json(const GatewayRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"system", req.system}, {"messages", msgs}, {"temperature", req.temperature},
          {"max_tokens", req.max_tokens}};
}

std::string env_or(const char* key, std::string fallback) {
  const char* v = std::getenv(key);
  return v && *v ? std::string(v) : fallback;
}

class HttpGateway : public Gateway {
 public:
  explicit HttpGateway(HttpGatewayConfig cfg) : cfg_(std::move(cfg)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.base_url, m, url)) throw GatewayError("bad endpoint url: '" + cfg_.base_url + "'");
    host_ = m[1];
    prefix_ = m[2].matched ? std::string(m[2]) : "";
    if (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string complete(const GatewayRequest& req) override {
    json msgs = json::array();
    msgs.push_back({{"role", "system"}, {"content", req.system}});
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    const json body = {{"model", cfg_.model},
                       {"messages", msgs},
                       {"temperature", req.temperature},
                       {"max_tokens", req.max_tokens}};
    httplib::Client cli(host_);
    cli.set_read_timeout(cfg_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    auto res = cli.Post(prefix_ + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw GatewayError("gateway unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw GatewayError("gateway status " + std::to_string(res->status) + ": " + res->body);
    try {
      return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw GatewayError(std::string("malformed gateway reply: ") + e.what());
    }
  }

 private:
  HttpGatewayConfig cfg_;
  std::string host_;
  std::string prefix_;
};

class CassetteGateway : public Gateway {
 public:
  explicit CassetteGateway(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw GatewayError("cannot open cassette '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      tape_.push_back(json::parse(line));
    }
  }

  std::string complete(const GatewayRequest& req) override {
    std::lock_guard lock(mu_);
    if (next_ >= tape_.size()) throw GatewayError("cassette '" + path_ + "' exhausted");
    const json& e = tape_[next_];
    if (e.at("request") != to_json(req)) {
      throw GatewayError("cassette '" + path_ + "' mismatch at exchange " + std::to_string(next_));
    }
    ++next_;
    return e.at("response").get<std::string>();
  }

 private:
  std::string path_;
  std::vector<json> tape_;
  std::size_t next_ = 0;
  std::mutex mu_;
};

class RecordingGateway : public Gateway {
 public:
  RecordingGateway(std::unique_ptr<Gateway> inner, const std::string& path)
      : inner_(std::move(inner)), out_(path, std::ios::trunc) {
    if (!out_) throw GatewayError("cannot write cassette '" + path + "'");
  }

  std::string complete(const GatewayRequest& req) override {
    std::lock_guard lock(mu_);
    std::string text = inner_->complete(req);
    out_ << json{{"request", to_json(req)}, {"response", text}}.dump() << '\n';
    out_.flush();
    return text;
  }

 private:
  std::unique_ptr<Gateway> inner_;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace

ScriptedGateway::ScriptedGateway(std::deque<std::string> replies) {
  auto q = std::make_shared<std::deque<std::string>>(std::move(replies));
  script_ = [q](const GatewayRequest&) {
    if (q->empty()) throw GatewayError("scripted replies exhausted");
    std::string r = std::move(q->front());
    q->pop_front();
    return r;
  };
}

std::string ScriptedGateway::complete(const GatewayRequest& req) {
  std::lock_guard lock(mu_);
  requests_.push_back(req);
  return script_(req);
}

HttpGatewayConfig HttpGatewayConfig::from_env() {
  HttpGatewayConfig c;
  c.base_url = env_or("MARS_LLM_BASE_URL", "https://api.openai.com/v1");
  c.api_key = env_or("MARS_LLM_API_KEY", "");
  c.model = env_or("MARS_LLM_MODEL", c.model);
  return c;
}

std::unique_ptr<Gateway> http_gateway(const HttpGatewayConfig& cfg) { return std::make_unique<HttpGateway>(cfg); }

std::unique_ptr<Gateway> cassette_gateway(const std::string& path) {
  return std::make_unique<CassetteGateway>(path);
}

std::unique_ptr<Gateway> recording_gateway(std::unique_ptr<Gateway> inner, const std::string& path) {
  return std::make_unique<RecordingGateway>(std::move(inner), path);
}

std::unique_ptr<Gateway> make_gateway(const std::string& spec) {
  if (spec == "http") return http_gateway(HttpGatewayConfig::from_env());
  if (spec.rfind("cassette:", 0) == 0) return cassette_gateway(spec.substr(9));
  if (spec.rfind("record:", 0) == 0) return recording_gateway(http_gateway(HttpGatewayConfig::from_env()), spec.substr(7));
  throw GatewayError("unknown gateway '" + spec + "'");
}

std::string request_json(const GatewayRequest& req) { return to_json(req).dump(); }

}  // namespace mars
