#include "lightiot/wire.hpp"

#include <cassert>

namespace lightiot::wire {
namespace {

class Writer {
public:
    explicit Writer(std::size_t bits) { out_.reserve(bits / 8); }
    Writer& put(const IdBits& v) { return raw(v.view()); }
    Writer& put(const Digest& v) { return raw(v.view()); }
    Writer& put(Timestamp t) {
        auto be = t.to_be();
        return raw(ByteView(be));
    }
    Bytes finish(std::size_t expected_bits) {
        assert(out_.size() * 8 == expected_bits);
        (void)expected_bits;
        return std::move(out_);
    }

private:
    Writer& raw(ByteView v) {
        out_.insert(out_.end(), v.begin(), v.end());
        return *this;
    }
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView src) : src_(src) {}
    void get(IdBits& v) { v = IdBits::from(take(IdBits::kBytes)); }
    void get(Digest& v) { v = Digest::from(take(Digest::kBytes)); }
    void get(Timestamp& t) { t = Timestamp::from_be(take(Timestamp::kBytes)); }

private:
    ByteView take(std::size_t n) {
        auto s = src_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    ByteView src_;
    std::size_t pos_ = 0;
};

template <class F>
bool length_ok(ByteView bits) {
    return bits.size() * 8 == F::kBits;
}

constexpr FieldSpan kLayoutM1[] = {{"id_c", 0, 128}, {"r_c", 128, 128}, {"t_c1", 256, 32}, {"d1", 288, 256}};
constexpr FieldSpan kLayoutM2[] = {{"d2", 0, 256}, {"t_s", 256, 32}};
constexpr FieldSpan kLayoutM3[] = {{"c1", 0, 256}, {"r_c", 256, 128}, {"t_c1", 384, 32}, {"p_id_c", 416, 128}};
constexpr FieldSpan kLayoutM4[] = {{"c1", 0, 256}, {"c2", 256, 256}, {"p_id_c", 512, 128}, {"t_gw1", 640, 32}};
constexpr FieldSpan kLayoutM5[] = {{"t_s", 0, 32}, {"c3", 32, 256}, {"c4", 288, 256}, {"c5", 544, 256}};
constexpr FieldSpan kLayoutM6[] = {{"c5", 0, 256}, {"c6", 256, 256}, {"t_s", 512, 32}, {"t_gw2", 544, 32}};

}  // namespace

std::string_view to_string(MessageKind k) {
    switch (k) {
        case MessageKind::M1: return "M1";
        case MessageKind::M2: return "M2";
        case MessageKind::M3: return "M3";
        case MessageKind::M4: return "M4";
        case MessageKind::M5: return "M5";
        case MessageKind::M6: return "M6";
    }
    return "M?";
}

std::optional<MessageKind> parse_kind(std::string_view s) {
    for (auto k : kAllKinds)
        if (to_string(k) == s) return k;
    if (s.size() == 2 && (s[0] == 'm') && s[1] >= '1' && s[1] <= '6') return static_cast<MessageKind>(s[1] - '0');
    return std::nullopt;
}

Bytes encode(const FrameM1& f) {
    return Writer(FrameM1::kBits).put(f.id_c).put(f.r_c).put(f.t_c1).put(f.d1).finish(FrameM1::kBits);
}
Bytes encode(const FrameM2& f) { return Writer(FrameM2::kBits).put(f.d2).put(f.t_s).finish(FrameM2::kBits); }
Bytes encode(const FrameM3& f) {
    return Writer(FrameM3::kBits).put(f.c1).put(f.r_c).put(f.t_c1).put(f.p_id_c).finish(FrameM3::kBits);
}
Bytes encode(const FrameM4& f) {
    return Writer(FrameM4::kBits).put(f.c1).put(f.c2).put(f.p_id_c).put(f.t_gw1).finish(FrameM4::kBits);
}
Bytes encode(const FrameM5& f) {
    return Writer(FrameM5::kBits).put(f.t_s).put(f.c3).put(f.c4).put(f.c5).finish(FrameM5::kBits);
}
Bytes encode(const FrameM6& f) {
    return Writer(FrameM6::kBits).put(f.c5).put(f.c6).put(f.t_s).put(f.t_gw2).finish(FrameM6::kBits);
}
Bytes encode(const Frame& f) {
    return std::visit([](const auto& v) { return encode(v); }, f);
}

template <>
Outcome<FrameM1> decode_as<FrameM1>(ByteView bits) {
    if (!length_ok<FrameM1>(bits)) return Reject::LengthMismatch;
    FrameM1 f;
    Reader r(bits);
    r.get(f.id_c), r.get(f.r_c), r.get(f.t_c1), r.get(f.d1);
    return f;
}
template <>
Outcome<FrameM2> decode_as<FrameM2>(ByteView bits) {
    if (!length_ok<FrameM2>(bits)) return Reject::LengthMismatch;
    FrameM2 f;
    Reader r(bits);
    r.get(f.d2), r.get(f.t_s);
    return f;
}
template <>
Outcome<FrameM3> decode_as<FrameM3>(ByteView bits) {
    if (!length_ok<FrameM3>(bits)) return Reject::LengthMismatch;
    FrameM3 f;
    Reader r(bits);
    r.get(f.c1), r.get(f.r_c), r.get(f.t_c1), r.get(f.p_id_c);
    return f;
}
template <>
Outcome<FrameM4> decode_as<FrameM4>(ByteView bits) {
    if (!length_ok<FrameM4>(bits)) return Reject::LengthMismatch;
    FrameM4 f;
    Reader r(bits);
    r.get(f.c1), r.get(f.c2), r.get(f.p_id_c), r.get(f.t_gw1);
    return f;
}
template <>
Outcome<FrameM5> decode_as<FrameM5>(ByteView bits) {
    if (!length_ok<FrameM5>(bits)) return Reject::LengthMismatch;
    FrameM5 f;
    Reader r(bits);
    r.get(f.t_s), r.get(f.c3), r.get(f.c4), r.get(f.c5);
    return f;
}
template <>
Outcome<FrameM6> decode_as<FrameM6>(ByteView bits) {
    if (!length_ok<FrameM6>(bits)) return Reject::LengthMismatch;
    FrameM6 f;
    Reader r(bits);
    r.get(f.c5), r.get(f.c6), r.get(f.t_s), r.get(f.t_gw2);
    return f;
}

Outcome<Frame> decode(MessageKind kind, ByteView bits) {
    auto lift = [](auto o) -> Outcome<Frame> {
        if (!o) return o.error();
        return Frame(std::move(o).value());
    };
    switch (kind) {
        case MessageKind::M1: return lift(decode_as<FrameM1>(bits));
        case MessageKind::M2: return lift(decode_as<FrameM2>(bits));
        case MessageKind::M3: return lift(decode_as<FrameM3>(bits));
        case MessageKind::M4: return lift(decode_as<FrameM4>(bits));
        case MessageKind::M5: return lift(decode_as<FrameM5>(bits));
        case MessageKind::M6: return lift(decode_as<FrameM6>(bits));
    }
    return Reject::LengthMismatch;
}

std::span<const FieldSpan> layout(MessageKind kind) {
    switch (kind) {
        case MessageKind::M1: return kLayoutM1;
        case MessageKind::M2: return kLayoutM2;
        case MessageKind::M3: return kLayoutM3;
        case MessageKind::M4: return kLayoutM4;
        case MessageKind::M5: return kLayoutM5;
        case MessageKind::M6: return kLayoutM6;
    }
    return {};
}

}  // namespace lightiot::wire
