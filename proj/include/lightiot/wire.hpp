#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <variant>

#include "lightiot/bits.hpp"
#include "lightiot/outcome.hpp"

namespace lightiot::wire {

enum class MessageKind : std::uint8_t { M1 = 1, M2, M3, M4, M5, M6 };

inline constexpr std::array<MessageKind, 6> kAllKinds = {MessageKind::M1, MessageKind::M2, MessageKind::M3,
                                                          MessageKind::M4, MessageKind::M5, MessageKind::M6};

std::string_view to_string(MessageKind k);
std::optional<MessageKind> parse_kind(std::string_view s);

// Fields are packed big-endian in declaration order.

struct FrameM1 {
    static constexpr MessageKind kKind = MessageKind::M1;
    static constexpr std::size_t kBits = 544;
    IdBits id_c;
    IdBits r_c;
    Timestamp t_c1;
    Digest d1;
    friend bool operator==(const FrameM1&, const FrameM1&) = default;
};

struct FrameM2 {
    static constexpr MessageKind kKind = MessageKind::M2;
    static constexpr std::size_t kBits = 288;
    Digest d2;
    Timestamp t_s;
    friend bool operator==(const FrameM2&, const FrameM2&) = default;
};

struct FrameM3 {
    static constexpr MessageKind kKind = MessageKind::M3;
    static constexpr std::size_t kBits = 544;
    Digest c1;
    IdBits r_c;
    Timestamp t_c1;
    IdBits p_id_c;
    friend bool operator==(const FrameM3&, const FrameM3&) = default;
};

struct FrameM4 {
    static constexpr MessageKind kKind = MessageKind::M4;
    static constexpr std::size_t kBits = 672;
    Digest c1;
    Digest c2;
    IdBits p_id_c;
    /// Request timestamp as stamped by the gateway (the client's T_c1).
    Timestamp t_gw1;
    friend bool operator==(const FrameM4&, const FrameM4&) = default;
};

struct FrameM5 {
    static constexpr MessageKind kKind = MessageKind::M5;
    static constexpr std::size_t kBits = 800;
    Timestamp t_s;
    Digest c3;
    Digest c4;
    Digest c5;
    friend bool operator==(const FrameM5&, const FrameM5&) = default;
};

struct FrameM6 {
    static constexpr MessageKind kKind = MessageKind::M6;
    static constexpr std::size_t kBits = 576;
    /// Byte range of the C5||C6 region, which travels masked.
    static constexpr std::size_t kMaskedBytes = 64;
    Digest c5;
    Digest c6;
    Timestamp t_s;
    Timestamp t_gw2;
    friend bool operator==(const FrameM6&, const FrameM6&) = default;
};

static_assert(FrameM1::kBits == 2 * IdBits::kBits + Timestamp::kBits + Digest::kBits);
static_assert(FrameM2::kBits == Digest::kBits + Timestamp::kBits);
static_assert(FrameM3::kBits == Digest::kBits + IdBits::kBits + Timestamp::kBits + IdBits::kBits);
static_assert(FrameM4::kBits == 2 * Digest::kBits + IdBits::kBits + Timestamp::kBits);
static_assert(FrameM5::kBits == Timestamp::kBits + 3 * Digest::kBits);
static_assert(FrameM6::kBits == 2 * Digest::kBits + 2 * Timestamp::kBits);

using Frame = std::variant<FrameM1, FrameM2, FrameM3, FrameM4, FrameM5, FrameM6>;

constexpr std::size_t frame_bits(MessageKind k) {
    switch (k) {
        case MessageKind::M1: return FrameM1::kBits;
        case MessageKind::M2: return FrameM2::kBits;
        case MessageKind::M3: return FrameM3::kBits;
        case MessageKind::M4: return FrameM4::kBits;
        case MessageKind::M5: return FrameM5::kBits;
        case MessageKind::M6: return FrameM6::kBits;
    }
    return 0;
}

constexpr std::size_t frame_bytes(MessageKind k) { return frame_bits(k) / 8; }

static_assert(frame_bits(MessageKind::M1) + frame_bits(MessageKind::M2) + frame_bits(MessageKind::M3) +
                  frame_bits(MessageKind::M4) + frame_bits(MessageKind::M5) + frame_bits(MessageKind::M6) ==
              3424);
static_assert(frame_bits(MessageKind::M1) + frame_bits(MessageKind::M3) == 1088);

Bytes encode(const FrameM1& f);
Bytes encode(const FrameM2& f);
Bytes encode(const FrameM3& f);
Bytes encode(const FrameM4& f);
Bytes encode(const FrameM5& f);
Bytes encode(const FrameM6& f);
Bytes encode(const Frame& f);

template <class F>
Outcome<F> decode_as(ByteView bits);

template <>
Outcome<FrameM1> decode_as<FrameM1>(ByteView bits);
template <>
Outcome<FrameM2> decode_as<FrameM2>(ByteView bits);
template <>
Outcome<FrameM3> decode_as<FrameM3>(ByteView bits);
template <>
Outcome<FrameM4> decode_as<FrameM4>(ByteView bits);
template <>
Outcome<FrameM5> decode_as<FrameM5>(ByteView bits);
template <>
Outcome<FrameM6> decode_as<FrameM6>(ByteView bits);

/// Fails with LengthMismatch unless bits is exactly frame_bytes(kind) long.
Outcome<Frame> decode(MessageKind kind, ByteView bits);

/// Bit offsets of each field within a frame, in order, as (offset, width).
struct FieldSpan {
    std::string_view name;
    std::size_t offset_bits;
    std::size_t width_bits;
};
std::span<const FieldSpan> layout(MessageKind kind);

}  // namespace lightiot::wire
