#include "qkdvault/vault_service.hpp"

#include <chrono>

#include "qkdvault/digest.hpp"
#include "qkdvault/errors.hpp"

namespace qkdvault {

VaultService::VaultService(VaultConfig config)
    : config_(std::move(config)), service_rng_(Rng::derive(config_.seed, 0x766c74ULL)) {}

int64_t VaultService::default_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

RegisterResult VaultService::register_user(const std::string& username,
                                           const std::string& password) {
    if (username.empty()) {
        raise(Errc::ValidationFailed, "username must not be empty");
    }
    if (password.empty()) {
        raise(Errc::ValidationFailed, "password must not be empty");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (users_.count(username) != 0) {
        raise(Errc::Conflict, "username already registered");
    }

    UserEntry entry;
    entry.username = username;
    entry.created_at_ms = now();
    for (size_t i = 0; i < entry.salt.size(); i += 8) {
        uint64_t w = service_rng_.next_u64();
        for (size_t j = 0; j < 8; ++j) entry.salt[i + j] = static_cast<uint8_t>(w >> (8 * j));
    }
    entry.credential_digest = iterated_digest(
        entry.salt,
        std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(password.data()),
                                 password.size()),
        config_.credential_iterations);
    entry.auth_secret = AuthSecret::random(service_rng_);
    entry.pool = std::make_unique<KeyPool>(Rng::derive(config_.seed, ++user_counter_));

    RegisterResult out{username, entry.auth_secret.to_hex()};
    users_.emplace(username, std::move(entry));
    return out;
}

TokenInfo VaultService::login(const std::string& username, const std::string& password) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = users_.find(username);
    // Uniform failure for unknown users and wrong passwords alike.
    if (it == users_.end()) {
        raise(Errc::AuthenticationFailed, "authentication failed");
    }
    auto digest = iterated_digest(
        it->second.salt,
        std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(password.data()),
                                 password.size()),
        config_.credential_iterations);
    if (digest != it->second.credential_digest) {
        raise(Errc::AuthenticationFailed, "authentication failed");
    }

    TokenEntry token_entry;
    token_entry.username = username;
    token_entry.expires_at_ms = now() + config_.token_ttl_ms;
    std::array<uint8_t, 16> token_bytes{};
    for (size_t i = 0; i < token_bytes.size(); i += 8) {
        uint64_t w = service_rng_.next_u64();
        for (size_t j = 0; j < 8; ++j) token_bytes[i + j] = static_cast<uint8_t>(w >> (8 * j));
    }
    TokenInfo info;
    info.token = to_hex(std::span<const uint8_t>(token_bytes.data(), token_bytes.size()));
    info.expires_at_ms = token_entry.expires_at_ms;
    tokens_[info.token] = token_entry;
    return info;
}

VaultService::UserEntry& VaultService::authorize(const std::string& token) {
    auto it = tokens_.find(token);
    if (it == tokens_.end()) {
        raise(Errc::TokenInvalid, "missing or unknown token");
    }
    if (it->second.expires_at_ms <= now()) {
        tokens_.erase(it);
        raise(Errc::TokenInvalid, "token expired");
    }
    auto user = users_.find(it->second.username);
    if (user == users_.end()) {
        raise(Errc::TokenInvalid, "token user no longer exists");
    }
    return user->second;
}

SessionSummary VaultService::establish_key(const std::string& token, const QkdRequest& request) {
    if (request.photon_count == 0 || request.photon_count > config_.max_photon_count) {
        raise(Errc::ValidationFailed, "photon_count out of range");
    }

    UserEntry* user = nullptr;
    uint64_t session_seed = 0;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        user = &authorize(token);
        session_seed = request.seed.value_or(Rng::derive(
            config_.seed, splitmix64(static_cast<uint64_t>(++user->next_session_stream)) ^
                              splitmix64(static_cast<uint64_t>(user->created_at_ms))));
    }

    // Sessions for one user serialize on the user lock; the service itself
    // stays available to other users while this session runs.
    std::lock_guard<std::mutex> user_lock(*user->op_mutex);

    SessionParams params;
    params.photon_count = request.photon_count;
    params.sample_size = request.sample_size;
    params.qber_threshold = request.qber_threshold;
    params.security_margin = request.security_margin;
    params.seed = session_seed;

    ChannelConfig channel(request.flip, request.loss, Rng::derive(params.seed, 0x636831ULL));

    QkdSessionResult result = run_session(params, channel, request.adversary, &user->auth_secret);

    SessionSummary summary;
    summary.status = result.status;
    summary.sifted_length = result.sifted_length;
    summary.qber = result.estimated_qber;
    if (result.status == SessionStatus::Established) {
        summary.final_length = result.final_key->size();
        user->pool->deposit(result);
    }
    return summary;
}

PutResult VaultService::put_blob(const std::string& token, const std::string& name,
                                 std::span<const uint8_t> payload) {
    if (name.empty()) {
        raise(Errc::ValidationFailed, "blob name must not be empty");
    }
    UserEntry* user = nullptr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        user = &authorize(token);
    }
    std::lock_guard<std::mutex> user_lock(*user->op_mutex);
    if (user->vault.count(name) != 0) {
        raise(Errc::Conflict, "a blob with this name already exists");
    }

    PlainText plain = PlainText::from_bytes(payload);
    OtpKey key = user->pool->consume(plain.bits.size()); // KeyExhausted propagates
    CipherText cipher = encrypt(plain, key);

    PutResult out{key_id_hex(cipher.key_id), payload.size()};
    user->vault.emplace(name, std::move(cipher));
    return out;
}

std::vector<uint8_t> VaultService::get_blob(const std::string& token, const std::string& name) {
    UserEntry* user = nullptr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        user = &authorize(token);
    }
    std::lock_guard<std::mutex> user_lock(*user->op_mutex);
    auto it = user->vault.find(name);
    if (it == user->vault.end()) {
        raise(Errc::NotFound, "no blob with this name");
    }
    auto key_bits = user->pool->lookup_consumed(it->second.key_id);
    if (!key_bits.has_value()) {
        raise(Errc::SessionCorruption, "decrypt ledger is missing the key material");
    }
    return decrypt_with_bits(it->second, *key_bits).to_bytes();
}

uint64_t VaultService::pool_available(const std::string& username) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = users_.find(username);
    if (it == users_.end()) raise(Errc::NotFound, "unknown user");
    return it->second.pool->total_available();
}

std::optional<BitVec> VaultService::stored_ciphertext(const std::string& username,
                                                      const std::string& name) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = users_.find(username);
    if (it == users_.end()) return std::nullopt;
    auto blob = it->second.vault.find(name);
    if (blob == it->second.vault.end()) return std::nullopt;
    return blob->second.bits;
}

} // namespace qkdvault
