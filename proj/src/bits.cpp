#include "lightiot/bits.hpp"
#include "lightiot/outcome.hpp"

namespace lightiot {

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = nibble(hex[2 * i]);
        const int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string_view to_string(Reject r) {
    switch (r) {
        case Reject::StaleTimestamp: return "StaleTimestamp";
        case Reject::UnknownClient: return "UnknownClient";
        case Reject::UnknownGateway: return "UnknownGateway";
        case Reject::BadAuthenticator: return "BadAuthenticator";
        case Reject::BadServerAuthenticator: return "BadServerAuthenticator";
        case Reject::KeyConfirmFailed: return "KeyConfirmFailed";
        case Reject::NotPaired: return "NotPaired";
        case Reject::NoPendingRun: return "NoPendingRun";
        case Reject::LengthMismatch: return "LengthMismatch";
    }
    return "Unknown";
}

}  // namespace lightiot
