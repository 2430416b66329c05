#pragma once

// Minimal blocking HTTP and WebSocket clients for talking to a
// TelemetryServer on localhost in tests.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "aeromap/wire.hpp"

namespace aeromap::testing {

struct HttpReply {
  int status = 0;
  std::map<std::string, std::string> headers;
  std::string body;
};

inline HttpReply http_request(std::uint16_t port, const std::string& method,
                              const std::string& target, const std::string& body = {}) {
  namespace beast = boost::beast;
  namespace http = beast::http;
  boost::asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  stream.connect({boost::asio::ip::make_address("127.0.0.1"), port});
  http::request<http::string_body> req{http::string_to_verb(method), target, 11};
  req.set(http::field::host, "127.0.0.1");
  if (!body.empty()) {
    req.set(http::field::content_type, "application/json");
    req.body() = body;
  }
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
  HttpReply out;
  out.status = static_cast<int>(res.result_int());
  for (const auto& field : res) out.headers[std::string(field.name_string())] = std::string(field.value());
  out.body = res.body();
  return out;
}

// Reads on a background thread; received frames are kept in arrival order.
class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    boost::beast::get_lowest_layer(ws_).connect({boost::asio::ip::make_address("127.0.0.1"), port});
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/ws");
    read_next();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  ~WsClient() {
    boost::asio::post(ioc_, [this] {
      boost::beast::error_code ec;
      boost::beast::get_lowest_layer(ws_).socket().close(ec);
    });
    thread_.join();
  }

  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const std::string& text) {
    std::promise<void> done;
    boost::asio::post(ioc_, [&] {
      boost::beast::error_code ec;
      ws_.text(true);
      ws_.write(boost::asio::buffer(text), ec);
      done.set_value();
    });
    done.get_future().wait();
  }

  // Waits until `pred` holds for the received frames or the timeout passes.
  bool wait_for(const std::function<bool(const std::vector<Frame>&)>& pred,
                std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return pred(frames_); });
  }

  std::vector<Frame> frames() const {
    std::lock_guard lock(mu_);
    return frames_;
  }
  std::vector<std::string> texts() const {
    std::lock_guard lock(mu_);
    return texts_;
  }
  // Receipt time of frame i on the steady clock.
  std::chrono::steady_clock::time_point received_at(std::size_t i) const {
    std::lock_guard lock(mu_);
    return times_.at(i);
  }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  void read_next() {
    ws_.async_read(buffer_, [this](boost::beast::error_code ec, std::size_t) {
      std::lock_guard lock(mu_);
      if (ec) {
        closed_ = true;
        cv_.notify_all();
        return;
      }
      const auto now = std::chrono::steady_clock::now();
      std::string text = boost::beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      frames_.push_back(decode_frame(text));
      texts_.push_back(std::move(text));
      times_.push_back(now);
      cv_.notify_all();
      read_next();
    });
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
  boost::beast::flat_buffer buffer_;
  std::thread thread_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Frame> frames_;
  std::vector<std::string> texts_;
  std::vector<std::chrono::steady_clock::time_point> times_;
  bool closed_ = false;
};

}  // namespace aeromap::testing
