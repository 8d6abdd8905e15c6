#pragma once

#include <adt/measure_hub.hpp>
#include <adt/session.hpp>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <deque>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace adt {

namespace server_detail {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct ServerShared {
    SessionRegistry& registry;
    std::atomic<std::size_t> malformed_client_messages{0};
    std::atomic<std::size_t> websocket_clients{0};
};

/// Splits "/a/b/c" into {"a","b","c"}, ignoring any query string.
inline std::vector<std::string> path_segments(std::string_view target) {
    target = target.substr(0, target.find('?'));
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < target.size()) {
        if (target[i] == '/') {
            ++i;
            continue;
        }
        const auto j = target.find('/', i);
        out.emplace_back(target.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
        if (j == std::string_view::npos) break;
        i = j;
    }
    return out;
}

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
public:
    WebSocketSession(tcp::socket&& socket, std::shared_ptr<LiveSession> session, std::shared_ptr<ServerShared> shared)
        : ws_(std::move(socket)), session_(std::move(session)), shared_(std::move(shared)) {}

    ~WebSocketSession() {
        attachment_.detach();
        --shared_->websocket_clients;
    }

    void run(http::request<http::string_body> req) {
        ++shared_->websocket_clients;
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept(req, beast::bind_front_handler(&WebSocketSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::vector<MeasurePoint> snapshot;
        std::weak_ptr<WebSocketSession> weak = shared_from_this();
        auto executor = ws_.get_executor();
        attachment_ = session_->hub().attach(
            [weak, executor](const std::vector<MeasurePoint>& batch) {
                std::vector<std::string> frames;
                frames.reserve(batch.size());
                for (const auto& p : batch) frames.push_back(to_json(p).dump());
                net::post(executor, [weak, frames = std::move(frames)]() mutable {
                    if (auto self = weak.lock()) self->enqueue(std::move(frames));
                });
            },
            snapshot);
        std::vector<std::string> frames;
        for (const auto& p : snapshot) frames.push_back(to_json(p, true).dump());
        enqueue(std::move(frames));
        do_read();
    }

    void enqueue(std::vector<std::string> frames) {
        const bool idle = queue_.empty();
        for (auto& f : frames) queue_.push_back(std::move(f));
        if (idle && !queue_.empty()) do_write();
    }

    void do_write() {
        ws_.async_write(net::buffer(queue_.front()),
                        beast::bind_front_handler(&WebSocketSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return;
        queue_.pop_front();
        if (!queue_.empty()) do_write();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;  // closed or failed; the pipeline is unaffected
        const std::string msg = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        auto j = nlohmann::json::parse(msg, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++shared_->malformed_client_messages;
            std::cerr << "adt: ignoring malformed client message on session " << session_->id() << '\n';
        } else if (j.value("k", std::string{}) == "ping") {
            enqueue({nlohmann::json{{"k", "pong"}}.dump()});
        }
        do_read();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::shared_ptr<LiveSession> session_;
    std::shared_ptr<ServerShared> shared_;
    MeasureHub::Attachment attachment_;
    std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<ServerShared> shared)
        : stream_(std::move(socket)), shared_(std::move(shared)) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
    }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;
        const auto target = req_.target();
        const auto seg = path_segments(std::string_view(target.data(), target.size()));
        if (websocket::is_upgrade(req_)) {
            if (seg.size() == 3 && seg[0] == "ws" && seg[1] == "sessions") {
                if (auto s = shared_->registry.find(seg[2])) {
                    stream_.expires_never();
                    std::make_shared<WebSocketSession>(stream_.release_socket(), std::move(s), shared_)
                        ->run(std::move(req_));
                    return;
                }
                return respond(http::status::not_found, error_body("unknown session '" + seg[2] + "'"));
            }
            return respond(http::status::not_found, error_body("no websocket endpoint at this path"));
        }
        route(seg);
    }

    static std::string error_body(const std::string& why) { return nlohmann::json{{"error", why}}.dump(); }

    void route(const std::vector<std::string>& seg) {
        const auto method = req_.method();
        if (method == http::verb::get && seg.size() == 1 && seg[0] == "sessions") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& s : shared_->registry.list())
                list.push_back({{"id", s->id()}, {"users", s->config().user_ids}, {"running", s->running()}});
            return respond(http::status::ok, list.dump());
        }
        if (seg.size() == 3 && seg[0] == "sessions") {
            auto s = shared_->registry.find(seg[1]);
            if (!s) return respond(http::status::not_found, error_body("unknown session '" + seg[1] + "'"));
            if (method == http::verb::get && seg[2] == "summary") return respond(http::status::ok, to_json(s->summary()).dump());
            if (method == http::verb::post && seg[2] == "stop") {
                s->stop_command();
                return respond(http::status::ok, nlohmann::json{{"id", s->id()}, {"stopped", true}}.dump());
            }
        }
        respond(http::status::not_found, error_body("not found"));
    }

    void respond(http::status status, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::content_type, "application/json");
        res->keep_alive(req_.keep_alive());
        res->body() = std::move(body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (res->need_eof()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<ServerShared> shared_;
};

}  // namespace server_detail

/// HTTP + WebSocket front end for a SessionRegistry.
///
///   GET  /sessions                list of sessions
///   GET  /sessions/<id>/summary   SessionSummary
///   POST /sessions/<id>/stop      stop a session
///   WS   /ws/sessions/<id>        snapshot frames (`"snapshot":true`) then live points
class DashboardServer {
public:
    DashboardServer(SessionRegistry& registry, const std::string& address = "127.0.0.1", unsigned short port = 0)
        : shared_(std::make_shared<server_detail::ServerShared>(registry)), acceptor_(ioc_) {
        namespace net = server_detail::net;
        const server_detail::tcp::endpoint ep(net::ip::make_address(address), port);
        acceptor_.open(ep.protocol());
        acceptor_.set_option(net::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen(net::socket_base::max_listen_connections);
    }

    DashboardServer(const DashboardServer&) = delete;
    DashboardServer& operator=(const DashboardServer&) = delete;

    ~DashboardServer() { stop(); }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void start(unsigned threads = 1) {
        do_accept();
        for (unsigned i = 0; i < threads; ++i) threads_.emplace_back([this] { ioc_.run(); });
    }

    void stop() {
        ioc_.stop();
        for (auto& t : threads_)
            if (t.joinable()) t.join();
        threads_.clear();
    }

    std::size_t malformed_client_messages() const { return shared_->malformed_client_messages; }
    std::size_t websocket_clients() const { return shared_->websocket_clients; }

private:
    void do_accept() {
        acceptor_.async_accept(server_detail::net::make_strand(ioc_),
                               [this](server_detail::beast::error_code ec, server_detail::tcp::socket socket) {
                                   if (!ec) std::make_shared<server_detail::HttpSession>(std::move(socket), shared_)->run();
                                   if (acceptor_.is_open()) do_accept();
                               });
    }

    server_detail::net::io_context ioc_;
    std::shared_ptr<server_detail::ServerShared> shared_;
    server_detail::tcp::acceptor acceptor_;
    std::vector<std::thread> threads_;
};

}  // namespace adt
