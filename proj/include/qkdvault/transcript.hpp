#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qkdvault {

// One classical-channel message as observed on the wire (post-adversary).
struct TranscriptRecord {
    uint64_t seq = 0;
    std::string sender;      // "alice" | "bob"
    std::string kind;
    std::string payload_hex; // canonical byte encoding of the payload
    std::string tag_hex;     // empty when the channel is unauthenticated
};

class Transcript {
public:
    void append(TranscriptRecord record) { records_.push_back(std::move(record)); }
    const std::vector<TranscriptRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

    // Newline-delimited JSON, one record per line:
    // {"seq":..,"sender":..,"kind":..,"payload_hex":..,"tag_hex":..}
    std::string to_ndjson() const;

private:
    std::vector<TranscriptRecord> records_;
};

} // namespace qkdvault
