#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "mars/engine.hpp"
#include "mars/world_config.hpp"

namespace mars {

inline constexpr int kProtocolVersion = 1;

// One play episode driven by JSON messages; see docs/protocol.md.
class PlaySession {
 public:
  // Reply to one client message (always exactly one JSON object).
  std::string handle(std::string_view message);
  bool live() const { return state_.has_value(); }

 private:
  std::string hello(const std::string& world, const std::string* config_text, std::uint64_t seed);
  std::string frame(const StepResult* r) const;

  std::optional<GameState> state_;
  WorldConfig cfg_;
  std::string world_;
  std::uint64_t seed_ = 0;
  std::vector<Achievement> achievements_;
};

std::string error_message(std::string_view code, std::string_view text);

// Lobby handlers: status code and JSON body.
struct LobbyReply {
  int status = 200;
  std::string body;
};
LobbyReply lobby_worlds();
LobbyReply lobby_sample(std::string_view body);  // {"axes": [...], "variant": ..., "seed": n}
LobbyReply lobby_verify(std::string_view body);  // {"config": "...", "seed": n} or raw config text

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  int threads = 2;
};

// HTTP lobby (GET /worlds, POST /sample, POST /verify) and WebSocket /play.
class Server {
 public:
  explicit Server(const ServerOptions& opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  void start();  // returns once listening
  void wait();   // until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mars
