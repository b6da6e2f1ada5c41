#include "qkdvault/classical_channel.hpp"

#include "qkdvault/errors.hpp"

namespace qkdvault {

std::vector<uint8_t> encode_u64(uint64_t value) {
    std::vector<uint8_t> out(8);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(value >> (8 * i));
    return out;
}

std::vector<uint8_t> encode_u32_list(std::span<const uint32_t> values) {
    std::vector<uint8_t> out;
    out.reserve(8 + values.size() * 4);
    auto count = encode_u64(values.size());
    out.insert(out.end(), count.begin(), count.end());
    for (uint32_t v : values) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    return out;
}

std::vector<uint8_t> encode_bits(const BitVec& bits) {
    std::vector<uint8_t> out = encode_u64(bits.size());
    auto packed = bits.to_bytes_msb_first();
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

void ClassicalChannel::send(std::string_view sender, std::string_view kind,
                            std::span<const uint8_t> payload) {
    std::vector<uint8_t> wire(payload.begin(), payload.end());

    TranscriptRecord record;
    record.sender = std::string(sender);
    record.kind = std::string(kind);

    if (secret_ != nullptr) {
        TaggedMessage tagged = authenticate_message(wire, *secret_);
        record.seq = tagged.seq;
        record.tag_hex = to_hex(std::span<const uint8_t>(tagged.tag.data(), tagged.tag.size()));
        if (forges_) {
            // Eve modifies the payload but cannot recompute the tag.
            if (wire.empty()) {
                wire.push_back(0x01);
            } else {
                wire[0] ^= 0x01;
            }
        }
        record.payload_hex = to_hex(wire);
        bool ok = verify_message(wire, tagged.tag, tagged.seq, *secret_);
        if (transcript_ != nullptr) transcript_->append(std::move(record));
        ++sent_;
        if (!ok) {
            raise(Errc::AuthenticationFailed, "classical message failed authentication");
        }
        return;
    }

    record.seq = local_seq_++;
    record.payload_hex = to_hex(wire);
    if (transcript_ != nullptr) transcript_->append(std::move(record));
    ++sent_;
}

void ClassicalChannel::send_bits(std::string_view sender, std::string_view kind,
                                 const BitVec& bits) {
    auto payload = encode_bits(bits);
    send(sender, kind, payload);
}

void ClassicalChannel::send_u32_list(std::string_view sender, std::string_view kind,
                                     std::span<const uint32_t> values) {
    auto payload = encode_u32_list(values);
    send(sender, kind, payload);
}

void ClassicalChannel::send_u64(std::string_view sender, std::string_view kind, uint64_t value) {
    auto payload = encode_u64(value);
    send(sender, kind, payload);
}

} // namespace qkdvault
