#include <catch_amalgamated.hpp>

#include "lightiot/rng.hpp"
#include "lightiot/wire.hpp"

using namespace lightiot;
using namespace lightiot::wire;

namespace {

Timestamp random_ts(Rng& rng) { return Timestamp{static_cast<std::uint32_t>(rng.next_u64())}; }

Digest random_digest(Rng& rng) {
    Digest d;
    for (auto& b : d.bytes) b = static_cast<std::uint8_t>(rng.next_u64());
    return d;
}

Frame random_frame(MessageKind k, Rng& rng) {
    switch (k) {
        case MessageKind::M1: return FrameM1{rng.next_id(), rng.next_id(), random_ts(rng), random_digest(rng)};
        case MessageKind::M2: return FrameM2{random_digest(rng), random_ts(rng)};
        case MessageKind::M3: return FrameM3{random_digest(rng), rng.next_id(), random_ts(rng), rng.next_id()};
        case MessageKind::M4: return FrameM4{random_digest(rng), random_digest(rng), rng.next_id(), random_ts(rng)};
        case MessageKind::M5:
            return FrameM5{random_ts(rng), random_digest(rng), random_digest(rng), random_digest(rng)};
        case MessageKind::M6:
            return FrameM6{random_digest(rng), random_digest(rng), random_ts(rng), random_ts(rng)};
    }
    return FrameM1{};
}

}  // namespace

TEST_CASE("encoded sizes") {
    Rng rng(1);
    const std::pair<MessageKind, std::size_t> expected[] = {{MessageKind::M1, 544}, {MessageKind::M2, 288},
                                                            {MessageKind::M3, 544}, {MessageKind::M4, 672},
                                                            {MessageKind::M5, 800}, {MessageKind::M6, 576}};
    std::size_t total = 0;
    for (auto [k, bits] : expected) {
        auto enc = encode(random_frame(k, rng));
        CHECK(enc.size() * 8 == bits);
        CHECK(frame_bits(k) == bits);
        total += enc.size() * 8;
    }
    CHECK(total == 3424);
    CHECK(frame_bits(MessageKind::M1) + frame_bits(MessageKind::M3) == 1088);
}

TEST_CASE("all-zero M2 encodes to zero bits") {
    auto enc = encode(FrameM2{});
    CHECK(enc == Bytes(36, 0));
}

TEST_CASE("decode inverts encode for random frames of every kind") {
    Rng rng(2);
    for (auto k : kAllKinds) {
        for (int i = 0; i < 200; ++i) {
            auto f = random_frame(k, rng);
            auto back = decode(k, encode(f));
            REQUIRE(back.ok());
            REQUIRE(back.value() == f);
        }
    }
}

TEST_CASE("wrong lengths are LengthMismatch") {
    Rng rng(3);
    auto m5 = encode(random_frame(MessageKind::M5, rng));
    Bytes short_by_one(m5.begin(), m5.end() - 1);
    CHECK(decode(MessageKind::M5, short_by_one).error() == Reject::LengthMismatch);
    m5.push_back(0);
    CHECK(decode(MessageKind::M5, m5).error() == Reject::LengthMismatch);
    CHECK(decode_as<FrameM1>(Bytes{}).error() == Reject::LengthMismatch);
    // An M1-sized buffer is not an M2.
    CHECK(decode(MessageKind::M2, encode(random_frame(MessageKind::M1, rng))).error() == Reject::LengthMismatch);
}

TEST_CASE("layouts tile each frame in declaration order") {
    for (auto k : kAllKinds) {
        std::size_t offset = 0;
        for (const auto& f : layout(k)) {
            CHECK(f.offset_bits == offset);
            offset += f.width_bits;
        }
        CHECK(offset == frame_bits(k));
    }
}

TEST_CASE("each field lands at its declared offset") {
    // Set one byte inside one field at a time and see which field changed.
    for (auto k : kAllKinds) {
        auto spans = layout(k);
        for (std::size_t fi = 0; fi < spans.size(); ++fi) {
            for (std::size_t byte = spans[fi].offset_bits / 8; byte < (spans[fi].offset_bits + spans[fi].width_bits) / 8;
                 ++byte) {
                Bytes raw(frame_bytes(k), 0);
                raw[byte] = 0xa5;
                auto f = decode(k, raw).value();
                // Re-encoding zero except for the touched field must reproduce raw.
                REQUIRE(encode(f) == raw);
                REQUIRE(f != decode(k, Bytes(frame_bytes(k), 0)).value());
            }
        }
    }
}

TEST_CASE("M6 carries t_gw2 in its last 32 bits") {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        auto f = std::get<FrameM6>(random_frame(MessageKind::M6, rng));
        auto enc = encode(f);
        const std::uint32_t tail = (std::uint32_t{enc[68]} << 24) | (std::uint32_t{enc[69]} << 16) |
                                   (std::uint32_t{enc[70]} << 8) | enc[71];
        CHECK(tail == f.t_gw2.ticks);
        CHECK(decode_as<FrameM6>(enc).value().t_gw2 == f.t_gw2);
    }
    CHECK(FrameM6::kMaskedBytes * 8 == layout(MessageKind::M6)[2].offset_bits);
}

TEST_CASE("kind names round-trip") {
    for (auto k : kAllKinds) CHECK(parse_kind(to_string(k)) == k);
    CHECK(parse_kind("m4") == MessageKind::M4);
    CHECK_FALSE(parse_kind("M7").has_value());
    CHECK_FALSE(parse_kind("").has_value());
}
