#include "aeromap/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "aeromap/error.hpp"

namespace aeromap {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// A client this far behind is dropped rather than buffered without bound.
constexpr std::size_t kMaxQueuedFrames = 8192;

std::string log_filename() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return std::string("mission-") + buf + ".json";
}

std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

struct TelemetryServer::Impl {
  Session& session;
  TelemetryConfig cfg;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> running{false};
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::uint16_t bound_port = 0;

  std::mutex mu;
  std::condition_variable cv;
  bool stopped = false;
  std::set<std::uint64_t> subscriptions;

  Impl(Session& s, TelemetryConfig c) : session(s), cfg(std::move(c)) {}

  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }

  void track(std::uint64_t id) {
    std::lock_guard lock(mu);
    subscriptions.insert(id);
  }
  void untrack(std::uint64_t id) {
    {
      std::lock_guard lock(mu);
      subscriptions.erase(id);
    }
    session.unsubscribe(id);
  }

  void do_accept();
  void simulate();
  http::response<http::string_body> handle(const http::request<http::string_body>& req);
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, TelemetryServer::Impl& impl)
      : ws_(std::move(socket)), impl_(impl) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto ex = ws_.get_executor();
    // The sink runs under the session lock on another thread: hand the
    // frame over to this connection's executor and return.
    sub_id_ = impl_.session.subscribe([weak, ex](const Frame&, const std::string& encoded) {
      if (auto self = weak.lock()) {
        net::post(ex, [self, encoded] { self->send(encoded); });
      }
    });
    subscribed_ = true;
    impl_.track(sub_id_);
    impl_.session.touch(impl_.now_ms());
    do_read();
  }

  void send(const std::string& msg) {
    if (closed_) return;
    queue_.push_back(msg);
    if (queue_.size() > kMaxQueuedFrames) {
      close();
      return;
    }
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty() && !closed_) do_write();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    const std::string msg = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    impl_.session.handle_command(msg, impl_.now_ms());
    do_read();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    queue_.clear();
    if (subscribed_) impl_.untrack(sub_id_);
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
  }

  websocket::stream<beast::tcp_stream> ws_;
  TelemetryServer::Impl& impl_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::uint64_t sub_id_ = 0;
  bool subscribed_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, TelemetryServer::Impl& impl)
      : stream_(std::move(socket)), impl_(impl) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), impl_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(impl_.handle(req_));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
                        if (wec) return;
                        if (res->need_eof()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->do_read();
                      });
  }

  beast::tcp_stream stream_;
  TelemetryServer::Impl& impl_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

http::response<http::string_body> TelemetryServer::Impl::handle(
    const http::request<http::string_body>& req) {
  const auto reply = [&](http::status status, std::string body, const std::string& type) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "aeromap");
    res.set(http::field::content_type, type);
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  const auto json_error = [&](http::status status, std::string_view code, std::string_view msg) {
    return reply(status, Json{{"code", code}, {"message", msg}}.dump(), "application/json");
  };
  const std::string target(req.target().data(), req.target().size());
  const std::string path = target.substr(0, target.find('?'));

  if (path == "/api/state") {
    if (req.method() != http::verb::get) return json_error(http::status::method_not_allowed, "method", "use GET");
    return reply(http::status::ok, session.state_json().dump(), "application/json");
  }
  if (path == "/api/log") {
    if (req.method() != http::verb::get) return json_error(http::status::method_not_allowed, "method", "use GET");
    auto res = reply(http::status::ok, session.log_document(), "application/json");
    res.set(http::field::content_disposition, "attachment; filename=\"" + log_filename() + "\"");
    return res;
  }
  if (path == "/api/command") {
    if (req.method() != http::verb::post) return json_error(http::status::method_not_allowed, "method", "use POST");
    const Frame f = session.handle_command(req.body(), now_ms());
    const auto status = f.type() == FrameType::error ? http::status::bad_request : http::status::ok;
    return reply(status, encode_frame(f), "application/json");
  }
  if (!cfg.static_dir.empty() && req.method() == http::verb::get && path.find("..") == std::string::npos) {
    std::filesystem::path file = std::filesystem::path(cfg.static_dir) / path.substr(1);
    if (path == "/") file = std::filesystem::path(cfg.static_dir) / "index.html";
    std::error_code fec;
    if (std::filesystem::is_regular_file(file, fec)) {
      try {
        return reply(http::status::ok, read_file(file), mime_type(file));
      } catch (const ConfigError&) {
      }
    }
  }
  return json_error(http::status::not_found, "not_found", path);
}

void TelemetryServer::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!running) return;
    } else {
      std::make_shared<HttpSession>(std::move(socket), *this)->run();
    }
    if (running) do_accept();
  });
}

void TelemetryServer::Impl::simulate() {
  using namespace std::chrono;
  const std::int64_t tick = cfg.tick_ms;
  const std::int64_t period = std::max<std::int64_t>(cfg.action_period_ms, 1);
  std::int64_t next_tick = now_ms();
  std::int64_t next_action = next_tick;
  while (running) {
    const std::int64_t now = now_ms();
    if (now >= next_tick) {
      session.tick(now);
      next_tick = now + tick;
    }
    if (now >= next_action) {
      session.step(now);
      next_action = now + period;
    }
    const std::int64_t wake = std::min(next_tick, next_action);
    std::unique_lock lock(mu);
    cv.wait_for(lock, milliseconds(std::max<std::int64_t>(wake - now_ms(), 0)),
                [this] { return !running; });
  }
}

TelemetryServer::TelemetryServer(Session& session, TelemetryConfig cfg)
    : impl_(std::make_unique<Impl>(session, std::move(cfg))) {}

TelemetryServer::~TelemetryServer() { stop(); }

void TelemetryServer::start() {
  Impl& m = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(m.cfg.bind, ec);
  if (ec) throw Error("invalid bind address " + m.cfg.bind + ": " + ec.message());
  const tcp::endpoint endpoint{address, m.cfg.port};
  m.acceptor.open(endpoint.protocol(), ec);
  if (!ec) m.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) m.acceptor.bind(endpoint, ec);
  if (!ec) m.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error("cannot bind " + m.cfg.bind + ":" + std::to_string(m.cfg.port) + ": " +
                ec.message());
  }
  m.bound_port = m.acceptor.local_endpoint().port();
  m.running = true;
  m.do_accept();
  m.io_thread = std::thread([&m] { m.ioc.run(); });
  m.sim_thread = std::thread([&m] { m.simulate(); });
}

void TelemetryServer::stop() {
  Impl& m = *impl_;
  {
    std::lock_guard lock(m.mu);
    if (m.stopped) return;
    m.stopped = true;
    m.running = false;
  }
  m.cv.notify_all();
  if (m.sim_thread.joinable()) m.sim_thread.join();
  beast::error_code ignored;
  m.acceptor.close(ignored);
  m.ioc.stop();
  if (m.io_thread.joinable()) m.io_thread.join();
  std::set<std::uint64_t> subs;
  {
    std::lock_guard lock(m.mu);
    subs.swap(m.subscriptions);
  }
  for (auto id : subs) m.session.unsubscribe(id);
}

void TelemetryServer::wait() {
  Impl& m = *impl_;
  std::unique_lock lock(m.mu);
  m.cv.wait(lock, [&m] { return m.stopped; });
}

std::uint16_t TelemetryServer::port() const { return impl_->bound_port; }

std::int64_t TelemetryServer::now_ms() const { return impl_->now_ms(); }

}  // namespace aeromap
