#pragma once

#include <cstdint>

#include "lightiot/bits.hpp"

namespace lightiot::crypto {

/// FIPS 202 SHA3-256.
Digest sha3_256(ByteView data);

/// Uncounted digest; same as sha3_256.
inline Digest digest(ByteView data) { return sha3_256(data); }

/// Most-significant 128 bits of a digest.
IdBits truncate_id(const Digest& d);

/// Least-significant 128 bits of a digest. Used as the pre-shared nonce that
/// accompanies a pseudo-identity derived from the same digest.
IdBits low_half(const Digest& d);

/// Operation tally for one entity and one protocol phase.
struct OpTally {
    std::uint64_t protocol_hashes = 0;
    std::uint64_t pad_hashes = 0;
    std::uint64_t xor_ops = 0;

    OpTally& operator+=(const OpTally& o) {
        protocol_hashes += o.protocol_hashes;
        pad_hashes += o.pad_hashes;
        xor_ops += o.xor_ops;
        return *this;
    }
    friend OpTally operator+(OpTally a, const OpTally& b) { return a += b; }
    friend bool operator==(const OpTally&, const OpTally&) = default;
};

/// First `bits` bits of digest(key||ctr32=0) || digest(key||ctr32=1) || ...
/// Trailing bits of the last byte are zero when bits % 8 != 0. Each block
/// hash is charged to tally->pad_hashes.
Bytes expand_pad(ByteView key, std::size_t bits, OpTally* tally = nullptr);

/// frame XOR expand_pad(key, 8 * frame.size()). Involution.
Bytes mask(ByteView frame, ByteView key, OpTally* tally = nullptr);

/// Concatenation of fixed-width fields in argument order.
class Preimage {
public:
    Preimage& add(ByteView v) {
        buf_.insert(buf_.end(), v.begin(), v.end());
        return *this;
    }
    Preimage& add(const IdBits& v) { return add(v.view()); }
    Preimage& add(const Digest& v) { return add(v.view()); }
    Preimage& add(Timestamp t) {
        auto be = t.to_be();
        return add(ByteView(be));
    }
    ByteView view() const { return buf_; }

private:
    Bytes buf_;
};

/// Counted facade: every protocol hash, pad block and XOR goes through here
/// so the entity's tally matches what it actually computed.
class Meter {
public:
    explicit Meter(OpTally& tally) : tally_(&tally) {}

    template <class... Parts>
    Digest hash(const Parts&... parts) {
        Preimage p;
        (p.add(parts), ...);
        ++tally_->protocol_hashes;
        return sha3_256(p.view());
    }

    Bytes mask(ByteView frame, ByteView key) { return crypto::mask(frame, key, tally_); }

    IdBits xor_ids(const IdBits& a, const IdBits& b) {
        ++tally_->xor_ops;
        return a ^ b;
    }

private:
    OpTally* tally_;
};

}  // namespace lightiot::crypto
