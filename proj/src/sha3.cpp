// Keccak-f[1600] and the SHA3-256 sponge (rate 136 bytes, domain 0x06).

#include <array>
#include <cstring>

#include "lightiot/crypto.hpp"

namespace lightiot::crypto {
namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808AULL, 0x8000000080008000ULL,
    0x000000000000808BULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008AULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000AULL,
    0x000000008000808BULL, 0x800000000000008BULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800AULL, 0x800000008000000AULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rho offsets indexed by lane x + 5*y.
constexpr std::array<int, 25> kRho = {
    0,  1,  62, 28, 27,
    36, 44, 6,  55, 20,
    3,  10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2,  61, 56, 14,
};

constexpr std::size_t kRate = 136;

inline std::uint64_t rotl(std::uint64_t v, int n) {
    return n == 0 ? v : (v << n) | (v >> (64 - n));
}

void keccak_f1600(std::array<std::uint64_t, 25>& a) {
    for (std::uint64_t rc : kRoundConstants) {
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) a[x + y] ^= d;
        }

        // rho + pi: B[y, 2x+3y] = rot(A[x, y])
        std::array<std::uint64_t, 25> b{};
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y) b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], kRho[x + 5 * y]);

        for (int y = 0; y < 25; y += 5)
            for (int x = 0; x < 5; ++x) a[x + y] = b[x + y] ^ (~b[(x + 1) % 5 + y] & b[(x + 2) % 5 + y]);

        a[0] ^= rc;
    }
}

void absorb_block(std::array<std::uint64_t, 25>& state, const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate; ++i) state[i / 8] ^= std::uint64_t{block[i]} << (8 * (i % 8));
    keccak_f1600(state);
}

}  // namespace

Digest sha3_256(ByteView data) {
    std::array<std::uint64_t, 25> state{};
    std::size_t pos = 0;
    for (; pos + kRate <= data.size(); pos += kRate) absorb_block(state, data.data() + pos);

    std::array<std::uint8_t, kRate> last{};
    const std::size_t rem = data.size() - pos;
    if (rem > 0) std::memcpy(last.data(), data.data() + pos, rem);
    last[rem] ^= 0x06;
    last[kRate - 1] ^= 0x80;
    absorb_block(state, last.data());

    Digest out;
    for (std::size_t i = 0; i < Digest::kBytes; ++i) out.bytes[i] = static_cast<std::uint8_t>(state[i / 8] >> (8 * (i % 8)));
    return out;
}

}  // namespace lightiot::crypto
