#include "lightiot/crypto.hpp"

namespace lightiot::crypto {

IdBits truncate_id(const Digest& d) { return IdBits::from(ByteView(d.bytes).first(IdBits::kBytes)); }

IdBits low_half(const Digest& d) { return IdBits::from(ByteView(d.bytes).last(IdBits::kBytes)); }

Bytes expand_pad(ByteView key, std::size_t bits, OpTally* tally) {
    const std::size_t nbytes = (bits + 7) / 8;
    Bytes out;
    out.reserve(nbytes + Digest::kBytes);

    Bytes block(key.begin(), key.end());
    block.resize(key.size() + 4);
    for (std::uint32_t ctr = 0; out.size() < nbytes; ++ctr) {
        block[key.size() + 0] = static_cast<std::uint8_t>(ctr >> 24);
        block[key.size() + 1] = static_cast<std::uint8_t>(ctr >> 16);
        block[key.size() + 2] = static_cast<std::uint8_t>(ctr >> 8);
        block[key.size() + 3] = static_cast<std::uint8_t>(ctr);
        const Digest d = sha3_256(block);
        if (tally) ++tally->pad_hashes;
        out.insert(out.end(), d.bytes.begin(), d.bytes.end());
    }
    out.resize(nbytes);
    if (bits % 8 != 0) out.back() &= static_cast<std::uint8_t>(0xFF << (8 - bits % 8));
    return out;
}

Bytes mask(ByteView frame, ByteView key, OpTally* tally) {
    Bytes out = expand_pad(key, frame.size() * 8, tally);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= frame[i];
    if (tally) ++tally->xor_ops;
    return out;
}

}  // namespace lightiot::crypto
