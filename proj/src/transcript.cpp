#include "qkdvault/transcript.hpp"

#include <json.hpp>

namespace qkdvault {

std::string Transcript::to_ndjson() const {
    std::string out;
    for (const auto& r : records_) {
        nlohmann::ordered_json j;
        j["seq"] = r.seq;
        j["sender"] = r.sender;
        j["kind"] = r.kind;
        j["payload_hex"] = r.payload_hex;
        j["tag_hex"] = r.tag_hex;
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace qkdvault
