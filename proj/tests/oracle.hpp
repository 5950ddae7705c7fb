#pragma once

// Independent SHA3-256 (OpenSSL) used to check values computed by the library.

#include <openssl/evp.h>

#include <stdexcept>

#include "lightiot/bits.hpp"
#include "lightiot/crypto.hpp"

namespace oracle {

inline lightiot::Digest sha3(lightiot::ByteView data) {
    lightiot::Digest out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha3_256(), nullptr) != 1 || len != 32)
        throw std::runtime_error("EVP_Digest failed");
    return out;
}

template <class... Parts>
lightiot::Digest hash(const Parts&... parts) {
    lightiot::crypto::Preimage p;
    (p.add(parts), ...);
    return sha3(p.view());
}

inline lightiot::IdBits high(const lightiot::Digest& d) { return lightiot::IdBits::from(lightiot::ByteView(d.bytes).first(16)); }
inline lightiot::IdBits low(const lightiot::Digest& d) { return lightiot::IdBits::from(lightiot::ByteView(d.bytes).last(16)); }

/// Counter-mode pad computed block by block with OpenSSL.
inline lightiot::Bytes pad(lightiot::ByteView key, std::size_t bytes) {
    lightiot::Bytes out;
    for (std::uint32_t ctr = 0; out.size() < bytes; ++ctr) {
        lightiot::Bytes block(key.begin(), key.end());
        for (int s = 24; s >= 0; s -= 8) block.push_back(static_cast<std::uint8_t>(ctr >> s));
        auto d = sha3(block);
        out.insert(out.end(), d.bytes.begin(), d.bytes.end());
    }
    out.resize(bytes);
    return out;
}

}  // namespace oracle
