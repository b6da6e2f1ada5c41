#pragma once

#include <memory>
#include <string>

#include "qkdvault/vault_service.hpp"

namespace qkdvault {

// HTTP front end for VaultService:
//   POST /register {username,password}        -> 201 {auth_secret_hex} | 409 | 400
//   POST /login    {username,password}        -> 200 {token,expires_at} | 401
//   POST /qkd/session {photon_count,flip,loss,adversary,fraction,seed?}
//                  + bearer token             -> 200 {status,sifted_length,qber,final_length}
//   PUT  /vault/<name>  raw bytes + bearer    -> 201 {key_id,length} | 409 | 507
//   GET  /vault/<name>  + bearer              -> 200 raw bytes | 404
//   GET  /health                              -> 200
// Every response carries X-Request-Id; errors are {"code","message"}.
class HttpVaultServer {
public:
    explicit HttpVaultServer(VaultService& service);
    ~HttpVaultServer();

    HttpVaultServer(const HttpVaultServer&) = delete;
    HttpVaultServer& operator=(const HttpVaultServer&) = delete;

    // Binds and serves on a background thread; raises Io when the port is
    // taken. Port 0 picks a free port; port() reports the bound one.
    void start(const std::string& host, int port);
    void stop();
    // Blocks until the listener thread exits (after stop() or a signal).
    void wait();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace qkdvault
