#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lightiot {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Fixed-width opaque bit value. Widths are whole bytes; the tag keeps
/// identities and digests from being mixed up.
template <std::size_t Bits, class Tag>
struct FixedBits {
    static_assert(Bits % 8 == 0);
    static constexpr std::size_t kBits = Bits;
    static constexpr std::size_t kBytes = Bits / 8;

    std::array<std::uint8_t, kBytes> bytes{};

    ByteView view() const { return bytes; }

    static FixedBits from(ByteView src) {
        FixedBits out;
        std::copy_n(src.begin(), kBytes, out.bytes.begin());
        return out;
    }

    bool is_zero() const {
        return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
    }

    friend bool operator==(const FixedBits&, const FixedBits&) = default;
    friend auto operator<=>(const FixedBits&, const FixedBits&) = default;

    friend FixedBits operator^(FixedBits a, const FixedBits& b) {
        for (std::size_t i = 0; i < kBytes; ++i) a.bytes[i] ^= b.bytes[i];
        return a;
    }
};

struct IdTag {};
struct DigestTag {};

/// 128-bit identities, pseudo-identities, secrets and nonces.
using IdBits = FixedBits<128, IdTag>;
/// 256-bit SHA3-256 output.
using Digest = FixedBits<256, DigestTag>;

/// 32-bit millisecond tick of an entity's logical clock.
struct Timestamp {
    static constexpr std::size_t kBits = 32;
    static constexpr std::size_t kBytes = 4;

    std::uint32_t ticks = 0;

    std::array<std::uint8_t, 4> to_be() const {
        return {static_cast<std::uint8_t>(ticks >> 24), static_cast<std::uint8_t>(ticks >> 16),
                static_cast<std::uint8_t>(ticks >> 8), static_cast<std::uint8_t>(ticks)};
    }
    static Timestamp from_be(ByteView src) {
        return Timestamp{(std::uint32_t{src[0]} << 24) | (std::uint32_t{src[1]} << 16) |
                         (std::uint32_t{src[2]} << 8) | std::uint32_t{src[3]}};
    }

    friend bool operator==(const Timestamp&, const Timestamp&) = default;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// |a - b| without wrap-around.
inline std::uint64_t abs_diff(Timestamp a, Timestamp b) {
    return a.ticks > b.ticks ? std::uint64_t{a.ticks} - b.ticks : std::uint64_t{b.ticks} - a.ticks;
}

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

template <class T>
    requires requires(const T& t) { t.view(); }
std::string to_hex(const T& fixed) {
    return to_hex(fixed.view());
}

/// Parses exactly T::kBytes bytes of hex.
template <class T>
std::optional<T> parse_fixed_hex(std::string_view hex) {
    auto raw = from_hex(hex);
    if (!raw || raw->size() != T::kBytes) return std::nullopt;
    return T::from(*raw);
}

}  // namespace lightiot
