#include "qkdvault/qotp.hpp"

#include <cstring>
#include <fstream>

#include "qkdvault/errors.hpp"

namespace qkdvault {

std::string key_id_hex(const KeyId& id) {
    return to_hex(std::span<const uint8_t>(id.data(), id.size()));
}

KeyId key_id_from_hex(const std::string& hex) {
    auto bytes = from_hex(hex);
    if (bytes.size() != 16) {
        raise(Errc::InvalidArgument, "key id must be 16 bytes of hex");
    }
    KeyId id{};
    std::copy(bytes.begin(), bytes.end(), id.begin());
    return id;
}

CipherText encrypt(const PlainText& message, OtpKey& key) {
    if (key.size() != message.bits.size()) {
        raise(Errc::KeyLengthMismatch, "key length must equal message length");
    }
    if (!key.try_consume()) {
        raise(Errc::KeyReuseRefused, "one-time key has already been used");
    }
    CipherText cipher;
    cipher.key_id = key.id();
    cipher.bits = message.bits ^ key.bits();
    return cipher;
}

PlainText decrypt(const CipherText& cipher, const OtpKey& key) {
    if (key.id() != cipher.key_id) {
        raise(Errc::WrongKey, "ciphertext was made with a different key");
    }
    return decrypt_with_bits(cipher, key.bits());
}

PlainText decrypt_with_bits(const CipherText& cipher, const BitVec& key_bits) {
    if (key_bits.size() != cipher.bits.size()) {
        raise(Errc::KeyLengthMismatch, "key length must equal ciphertext length");
    }
    return {cipher.bits ^ key_bits};
}

BitVec reuse_attack_demo(const CipherText& c1, const CipherText& c2) {
    if (c1.key_id != c2.key_id) {
        raise(Errc::DemoInapplicable, "ciphertexts were made with different keys");
    }
    if (c1.bits.size() != c2.bits.size()) {
        raise(Errc::KeyLengthMismatch, "ciphertext lengths differ");
    }
    return c1.bits ^ c2.bits;
}

namespace {
constexpr char kCipherMagic[5] = {'Q', 'O', 'T', 'P', '1'};
}

void write_cipher_file(const std::filesystem::path& path, const CipherText& cipher) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::Io, "cannot open cipher file for writing");
    out.write(kCipherMagic, sizeof(kCipherMagic));
    out.write(reinterpret_cast<const char*>(cipher.key_id.data()),
              static_cast<std::streamsize>(cipher.key_id.size()));
    uint64_t len = cipher.bits.size();
    uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = static_cast<uint8_t>(len >> (8 * (7 - i)));
    out.write(reinterpret_cast<const char*>(len_be), sizeof(len_be));
    auto packed = cipher.bits.to_bytes_msb_first();
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
    if (!out) raise(Errc::Io, "short write to cipher file");
}

CipherText read_cipher_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open cipher file");
    char magic[5];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCipherMagic, 5) != 0) {
        raise(Errc::Io, "not a cipher file (bad magic)");
    }
    CipherText cipher;
    if (!in.read(reinterpret_cast<char*>(cipher.key_id.data()),
                 static_cast<std::streamsize>(cipher.key_id.size()))) {
        raise(Errc::Io, "cipher file truncated in key id");
    }
    uint8_t len_be[8];
    if (!in.read(reinterpret_cast<char*>(len_be), sizeof(len_be))) {
        raise(Errc::Io, "cipher file truncated in length");
    }
    uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | len_be[i];
    std::vector<uint8_t> packed((len + 7) / 8);
    if (!in.read(reinterpret_cast<char*>(packed.data()),
                 static_cast<std::streamsize>(packed.size()))) {
        raise(Errc::Io, "cipher file truncated in payload");
    }
    cipher.bits = BitVec::from_bytes_msb_first(packed, len);
    return cipher;
}

} // namespace qkdvault
