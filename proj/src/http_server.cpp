#include "qkdvault/http_server.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qkdvault/errors.hpp"

namespace qkdvault {

namespace {

using nlohmann::json;

int status_for(Errc code) {
    switch (code) {
        case Errc::ValidationFailed:
        case Errc::InvalidArgument: return 400;
        case Errc::AuthenticationFailed:
        case Errc::TokenInvalid: return 401;
        case Errc::NotFound: return 404;
        case Errc::Conflict: return 409;
        case Errc::KeyExhausted: return 507;
        default: return 500;
    }
}

void set_error(httplib::Response& res, const Error& e) {
    res.status = status_for(e.code());
    json body{{"code", errc_name(e.code())}, {"message", e.what()}};
    res.set_content(body.dump(), "application/json");
}

std::string bearer_token(const httplib::Request& req) {
    std::string header = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (header.rfind(prefix, 0) == 0) return header.substr(prefix.size());
    return {};
}

AdversaryStrategy adversary_from(const std::string& name, double fraction) {
    if (name.empty() || name == "none") return AdversaryStrategy::none();
    if (name == "intercept" || name == "intercept-resend") {
        return AdversaryStrategy::intercept_resend(fraction);
    }
    if (name == "mitm") return AdversaryStrategy::mitm(true);
    raise(Errc::ValidationFailed, "unknown adversary: " + name);
}

} // namespace

struct HttpVaultServer::Impl {
    explicit Impl(VaultService& svc) : service(svc) {}

    VaultService& service;
    httplib::Server server;
    std::thread worker;
    std::atomic<uint64_t> request_counter{0};

    void route();
};

void HttpVaultServer::Impl::route() {
    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
        res.set_header("X-Request-Id", std::to_string(request_counter.fetch_add(1) + 1));
    });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const Error& e) {
                set_error(res, e);
            } catch (const std::exception& e) {
                res.status = 500;
                json body{{"code", "internal"}, {"message", e.what()}};
                res.set_content(body.dump(), "application/json");
            }
        });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"status\":\"ok\"}", "application/json");
    });

    server.Post("/register", [this](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) raise(Errc::ValidationFailed, "body must be JSON");
        auto result = service.register_user(body.value("username", ""), body.value("password", ""));
        json out{{"auth_secret_hex", result.auth_secret_hex}};
        res.status = 201;
        res.set_content(out.dump(), "application/json");
    });

    server.Post("/login", [this](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) raise(Errc::ValidationFailed, "body must be JSON");
        auto token = service.login(body.value("username", ""), body.value("password", ""));
        json out{{"token", token.token}, {"expires_at", token.expires_at_ms}};
        res.set_content(out.dump(), "application/json");
    });

    server.Post("/qkd/session", [this](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) raise(Errc::ValidationFailed, "body must be JSON");
        QkdRequest qkd;
        qkd.photon_count = body.value("photon_count", uint64_t{10000});
        qkd.flip = body.value("flip", 0.0);
        qkd.loss = body.value("loss", 0.0);
        qkd.adversary = adversary_from(body.value("adversary", "none"), body.value("fraction", 0.0));
        if (body.contains("seed")) qkd.seed = body["seed"].get<uint64_t>();
        if (body.contains("sample_size")) qkd.sample_size = body["sample_size"].get<uint64_t>();
        if (body.contains("qber_threshold")) {
            qkd.qber_threshold = body["qber_threshold"].get<double>();
        }
        auto summary = service.establish_key(bearer_token(req), qkd);
        json out{{"status", status_name(summary.status)},
                 {"sifted_length", summary.sifted_length},
                 {"qber", summary.qber},
                 {"final_length", summary.final_length}};
        res.set_content(out.dump(), "application/json");
    });

    server.Put(R"(/vault/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto result = service.put_blob(
            bearer_token(req), req.matches[1],
            std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(req.body.data()),
                                     req.body.size()));
        json out{{"key_id", result.key_id_hex}, {"length", result.length}};
        res.status = 201;
        res.set_content(out.dump(), "application/json");
    });

    server.Get(R"(/vault/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto bytes = service.get_blob(bearer_token(req), req.matches[1]);
        res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
    });
}

HttpVaultServer::HttpVaultServer(VaultService& service) : impl_(std::make_unique<Impl>(service)) {
    impl_->route();
}

HttpVaultServer::~HttpVaultServer() {
    stop();
    wait();
}

void HttpVaultServer::start(const std::string& host, int port) {
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        if (port_ <= 0) raise(Errc::Io, "could not bind a port");
    } else {
        if (!impl_->server.bind_to_port(host, port)) {
            raise(Errc::Io, "port is already in use");
        }
        port_ = port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

// stop() only signals the listener; the join lives in wait() so a signal
// handler can call stop() while the main thread blocks in wait().
void HttpVaultServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpVaultServer::wait() {
    if (impl_ && impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

} // namespace qkdvault
