#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qkdvault/adversary.hpp"
#include "qkdvault/auth.hpp"
#include "qkdvault/bb84.hpp"
#include "qkdvault/keystore.hpp"
#include "qkdvault/qotp.hpp"

namespace qkdvault {

struct VaultConfig {
    uint64_t seed = 0;                    // drives token/key-id/session randomness
    int64_t token_ttl_ms = 30 * 60 * 1000; // 30 minutes
    size_t credential_iterations = 10000;
    size_t max_photon_count = size_t{1} << 25;
    std::function<int64_t()> clock;       // milliseconds since epoch; wall clock if empty
};

struct RegisterResult {
    std::string username;
    std::string auth_secret_hex; // delivered exactly once at registration
};

struct TokenInfo {
    std::string token; // 128-bit hex
    int64_t expires_at_ms = 0;
};

struct QkdRequest {
    size_t photon_count = 10000;
    double flip = 0.0;
    double loss = 0.0;
    AdversaryStrategy adversary;
    std::optional<uint64_t> seed;
    size_t sample_size = 19;
    double qber_threshold = 0.11;
    size_t security_margin = 30;
};

struct SessionSummary {
    SessionStatus status = SessionStatus::AbortedLength;
    size_t sifted_length = 0;
    double qber = 0.0;
    size_t final_length = 0;
};

struct PutResult {
    std::string key_id_hex;
    size_t length = 0; // payload bytes
};

// Cloud-side vault: registration, login, QKD key establishment against the
// simulated channel, and put/get of one-time-pad encrypted blobs. Plaintext
// passwords are never stored; login failures are uniform so usernames cannot
// be probed.
class VaultService {
public:
    explicit VaultService(VaultConfig config = {});

    RegisterResult register_user(const std::string& username, const std::string& password);
    TokenInfo login(const std::string& username, const std::string& password);

    SessionSummary establish_key(const std::string& token, const QkdRequest& request);

    PutResult put_blob(const std::string& token, const std::string& name,
                       std::span<const uint8_t> payload);
    std::vector<uint8_t> get_blob(const std::string& token, const std::string& name);

    // Introspection used by tests and the pool-status path.
    uint64_t pool_available(const std::string& username) const;
    std::optional<BitVec> stored_ciphertext(const std::string& username,
                                            const std::string& name) const;

private:
    struct UserEntry {
        std::string username;
        std::array<uint8_t, 16> salt{};
        std::array<uint8_t, 32> credential_digest{};
        AuthSecret auth_secret;
        int64_t created_at_ms = 0;
        std::unique_ptr<KeyPool> pool;
        std::map<std::string, CipherText> vault; // name -> immutable entry
        int64_t next_session_stream = 0;
        // Serializes this user's sessions and vault writes; sessions share
        // one classical-channel auth counter, so they cannot interleave.
        std::unique_ptr<std::mutex> op_mutex = std::make_unique<std::mutex>();
    };
    struct TokenEntry {
        std::string username;
        int64_t expires_at_ms = 0;
    };

    int64_t now() const { return config_.clock ? config_.clock() : default_now(); }
    static int64_t default_now();
    UserEntry& authorize(const std::string& token);

    VaultConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, UserEntry> users_;
    std::map<std::string, TokenEntry> tokens_;
    Rng service_rng_;
    uint64_t user_counter_ = 0;
};

} // namespace qkdvault
