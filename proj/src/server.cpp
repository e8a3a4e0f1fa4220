#include "mars/server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "mars/descriptor.hpp"
#include "mars/sampler.hpp"
#include "mars/verifier.hpp"

namespace mars {

using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

json cell_json(const ViewCell& c) {
  json j = {{"in_bounds", c.in_bounds}, {"ripe", c.ripe}, {"arrow", c.arrow}};
  j["material"] = c.in_bounds ? json(std::string(name(c.material))) : json(nullptr);
  j["station"] = c.station == Station::none ? json(nullptr) : json(std::string(name(c.station)));
  j["creature"] = c.creature ? json(std::string(name(*c.creature))) : json(nullptr);
  return j;
}

json names(const std::vector<Achievement>& v) {
  json a = json::array();
  for (auto x : v) a.push_back(std::string(name(x)));
  return a;
}

LobbyReply reply(int status, const json& body) { return {status, body.dump()}; }

LobbyReply bad(int status, std::string_view code, std::string_view text) {
  return reply(status, {{"error", {{"code", code}, {"text", text}}}});
}

json principle_json(const PrincipleResult& p) { return {{"pass", p.pass}, {"witnesses", p.witnesses}}; }

}  // namespace

std::string error_message(std::string_view code, std::string_view text) {
  return json{{"type", "error"}, {"code", code}, {"text", text}}.dump();
}

std::string PlaySession::handle(std::string_view message) {
  json msg;
  try {
    msg = json::parse(message);
  } catch (const json::exception&) {
    return error_message("bad_message", "message is not JSON");
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return error_message("bad_message", "message needs a string \"type\"");
  }
  const std::string type = msg["type"];
  try {
    if (type == "hello") {
      const std::uint64_t seed = msg.value("seed", std::uint64_t{0});
      if (msg.contains("config")) {
        const std::string text = msg["config"].get<std::string>();
        return hello(msg.value("world", std::string("custom")), &text, seed);
      }
      return hello(msg.value("world", std::string("default")), nullptr, seed);
    }
    if (type == "bye") return json{{"type", "bye"}}.dump();
    if (type != "reset" && type != "action") {
      return error_message("unknown_type", "unknown message type '" + type + "'");
    }
    if (!state_) return error_message("no_session", "send hello first");
    if (type == "reset") {
      state_ = generate_world(cfg_, seed_);
      achievements_.clear();
      return frame(nullptr);
    }
    if (type == "action") {
      std::optional<Action> a;
      if (msg.contains("action") && msg["action"].is_string()) a = parse_action(msg["action"].get<std::string>());
      if (msg.contains("action") && msg["action"].is_number_integer()) {
        const int id = msg["action"].get<int>();
        if (id >= 0 && id < kActionCount) a = static_cast<Action>(id);
      }
      if (!a) return error_message("invalid_action", "unknown action " + msg.value("action", json()).dump());
      if (state_->done) return error_message("episode_finished", "episode is over; send reset or hello");
      const StepResult r = step(*state_, *a);
      for (auto x : r.info.newly_unlocked) achievements_.push_back(x);
      return frame(&r);
    }
  } catch (const json::exception& e) {
    return error_message("bad_message", e.what());
  }
  return error_message("unknown_type", "unknown message type '" + type + "'");
}

std::string PlaySession::hello(const std::string& world, const std::string* config_text, std::uint64_t seed) {
  try {
    if (config_text) {
      cfg_ = load_world_text(*config_text);
    } else {
      if (!is_builtin_world(world)) return error_message("unknown_world", "unknown world '" + world + "'");
      cfg_ = builtin_world(world);
    }
  } catch (const std::exception& e) {
    return error_message("bad_config", e.what());
  }
  world_ = world;
  seed_ = seed;
  state_ = generate_world(cfg_, seed_);
  achievements_.clear();
  return frame(nullptr);
}

std::string PlaySession::frame(const StepResult* r) const {
  const Observation obs = r ? r->observation : observe(*state_);
  json view = json::array();
  for (int row = 0; row < kViewRows; ++row) {
    json line = json::array();
    for (int col = 0; col < kViewCols; ++col) line.push_back(cell_json(obs.view[row * kViewCols + col]));
    view.push_back(line);
  }
  json inventory = json::array();
  for (int i = 0; i < kInventorySlots; ++i) {
    if (obs.inventory[i] > 0) inventory.push_back({{"item", name(static_cast<Item>(i))}, {"count", obs.inventory[i]}});
  }
  json f = {{"type", "frame"},
            {"version", kProtocolVersion},
            {"world", world_},
            {"seed", seed_},
            {"tick", obs.tick},
            {"view", view},
            {"status", {{"health", obs.health}, {"food", obs.food}, {"drink", obs.drink}, {"energy", obs.energy}}},
            {"inventory", inventory},
            {"position", {{"x", obs.pos.x}, {"y", obs.pos.y}}},
            {"facing", {{"x", obs.facing.x}, {"y", obs.facing.y}}},
            {"sleeping", obs.sleeping},
            {"reward_tenths", r ? r->reward_tenths : 0},
            {"unlocked", r ? names(r->info.newly_unlocked) : json::array()},
            {"achievements", names(achievements_)},
            {"done", state_->done},
            {"death_cause", state_->death_cause},
            {"text", describe(obs).text()}};
  return f.dump();
}

LobbyReply lobby_worlds() {
  json w = json::array();
  for (auto n : kBuiltinWorldNames) w.push_back(std::string(n));
  return reply(200, {{"worlds", w}});
}

LobbyReply lobby_sample(std::string_view body) {
  ModificationSpec spec;
  try {
    const json j = json::parse(body);
    for (const auto& a : j.at("axes")) {
      auto axis = parse_axis(a.get<std::string>());
      if (!axis) return bad(400, "bad_request", "unknown axis " + a.dump());
      spec.axes.insert(*axis);
    }
    if (j.contains("variant")) {
      auto v = parse_collect_variant(j["variant"].get<std::string>());
      if (!v) return bad(400, "bad_request", "unknown variant " + j["variant"].dump());
      spec.collect_variant = *v;
    }
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    return bad(400, "bad_request", e.what());
  }
  if (spec.axes.empty()) return bad(400, "bad_request", "axes must not be empty");
  try {
    const WorldConfig cfg = sample_world(spec);
    const VerificationReport rep = verify(cfg, spec.seed);
    return reply(200, {{"config", serialize_config(cfg)}, {"pass", rep.pass()}, {"report", report_to_yaml(rep)}});
  } catch (const SamplingExhausted& e) {
    return bad(422, "sampling_exhausted", e.what());
  }
}

LobbyReply lobby_verify(std::string_view body) {
  std::string text(body);
  std::uint64_t seed = 0;
  try {
    const json j = json::parse(body);
    if (j.is_object() && j.contains("config")) {
      text = j["config"].get<std::string>();
      seed = j.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception&) {
  }
  WorldConfig cfg;
  try {
    cfg = load_world_text(text);
  } catch (const std::exception& e) {
    return bad(400, "bad_config", e.what());
  }
  const VerificationReport rep = verify(cfg, seed);
  return reply(200, {{"pass", rep.pass()},
                     {"feasibility", principle_json(rep.feasibility)},
                     {"accessibility", principle_json(rep.accessibility)},
                     {"balance", principle_json(rep.balance)},
                     {"supply", principle_json(rep.supply)},
                     {"report", report_to_yaml(rep)}});
}

struct Server::Impl {
  ServerOptions opts;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> io_threads;

  std::mutex mu;
  std::condition_variable cv;
  std::set<int> open_fds;
  int active = 0;
  bool stopped = false;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      {
        std::lock_guard lock(mu);
        if (stopped) return;
        open_fds.insert(sock.native_handle());
        ++active;
      }
      std::thread([this, s = std::move(sock)]() mutable {
        const int fd = s.native_handle();
        serve(std::move(s));
        std::lock_guard lock(mu);
        open_fds.erase(fd);
        --active;
        cv.notify_all();
      }).detach();
      accept();
    });
  }

  static http::response<http::string_body> respond(const http::request<http::string_body>& req, const LobbyReply& r) {
    http::response<http::string_body> res{static_cast<http::status>(r.status), req.version()};
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = r.body;
    res.prepare_payload();
    return res;
  }

  static LobbyReply route(const http::request<http::string_body>& req) {
    const std::string target(req.target());
    if (target == "/worlds" && req.method() == http::verb::get) return lobby_worlds();
    if (target == "/sample" && req.method() == http::verb::post) return lobby_sample(req.body());
    if (target == "/verify" && req.method() == http::verb::post) return lobby_verify(req.body());
    return bad(404, "not_found", "no route " + std::string(req.method_string()) + " " + target);
  }

  void serve(tcp::socket sock) {
    beast::error_code ec;
    beast::flat_buffer buf;
    while (true) {
      http::request<http::string_body> req;
      http::read(sock, buf, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/play") play(std::move(sock), std::move(req));
        break;
      }
      if (req.method() == http::verb::options) {
        http::response<http::string_body> res{http::status::no_content, req.version()};
        res.set(http::field::access_control_allow_origin, "*");
        res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
        res.keep_alive(req.keep_alive());
        http::write(sock, res, ec);
      } else {
        http::write(sock, respond(req, route(req)), ec);
      }
      if (ec || !req.keep_alive()) break;
    }
    sock.shutdown(tcp::socket::shutdown_both, ec);
  }

  static void play(tcp::socket sock, http::request<http::string_body> req) {
    websocket::stream<tcp::socket> ws(std::move(sock));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    PlaySession session;
    while (true) {
      beast::flat_buffer in;
      ws.read(in, ec);
      if (ec) return;
      const std::string text = beast::buffers_to_string(in.data());
      const std::string out = session.handle(text);
      ws.text(true);
      ws.write(asio::buffer(out), ec);
      if (ec) return;
      if (json::parse(out)["type"] == "bye") {
        ws.close(websocket::close_code::normal, ec);
        return;
      }
    }
  }
};

Server::Server(const ServerOptions& opts) : impl_(std::make_unique<Impl>()) { impl_->opts = opts; }

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  auto& m = *impl_;
  const tcp::endpoint ep(asio::ip::make_address(m.opts.host), m.opts.port);
  m.acceptor.open(ep.protocol());
  m.acceptor.set_option(asio::socket_base::reuse_address(true));
  m.acceptor.bind(ep);
  m.acceptor.listen();
  m.accept();
  for (int i = 0; i < std::max(1, m.opts.threads); ++i) m.io_threads.emplace_back([&m] { m.ioc.run(); });
}

void Server::wait() {
  for (auto& t : impl_->io_threads) {
    if (t.joinable()) t.join();
  }
}

void Server::stop() {
  auto& m = *impl_;
  {
    std::lock_guard lock(m.mu);
    if (m.stopped) return;
    m.stopped = true;
    for (int fd : m.open_fds) ::shutdown(fd, SHUT_RDWR);
  }
  m.ioc.stop();
  wait();
  beast::error_code ec;
  m.acceptor.close(ec);
  std::unique_lock lock(m.mu);
  m.cv.wait(lock, [&m] { return m.active == 0; });
}

}  // namespace mars
