#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lightiot/sim.hpp"

namespace lightiot::metrics {

using sim::Party;
using wire::MessageKind;

struct PhaseCounters {
    crypto::OpTally ops;
    std::uint64_t frames_sent = 0;
    std::uint64_t bits_sent = 0;
};

struct RoleCounters {
    PhaseCounters pairing;
    PhaseCounters authentication;

    std::uint64_t frames_sent() const { return pairing.frames_sent + authentication.frames_sent; }
    std::uint64_t bits_sent() const { return pairing.bits_sent + authentication.bits_sent; }
};

struct KindRow {
    MessageKind kind;
    std::uint64_t frames = 0;
    std::uint64_t bits = 0;
    std::size_t expected_bits_per_frame = 0;
    /// Every frame of this kind had the expected length.
    bool exact = true;
};

/// Authentication-phase operations per completed handshake against the
/// published figures.
struct ComparisonRow {
    std::string role;
    std::optional<double> hashes;
    unsigned published_hashes = 0;
    std::optional<double> xors;
    unsigned published_xors = 0;
    /// Ledger item explaining a non-zero hash delta; empty when exact.
    std::string cause;

    std::optional<double> hash_delta() const {
        return hashes ? std::optional<double>(*hashes - published_hashes) : std::nullopt;
    }
};

struct ReplayAudit {
    std::uint64_t replays_delivered = 0;
    /// Replayed copies an honest receiver accepted (within the freshness window).
    std::uint64_t replays_accepted = 0;
};

struct OverheadReport {
    std::array<RoleCounters, 3> roles;  // indexed by Party
    std::vector<KindRow> kinds;
    std::uint64_t total_frames = 0;
    std::uint64_t total_bits = 0;
    std::uint64_t client_bits = 0;
    std::uint64_t pairings_attempted = 0;
    std::uint64_t pairings_completed = 0;
    std::uint64_t auths_attempted = 0;
    std::uint64_t auths_completed = 0;
    std::vector<ComparisonRow> computation;
    ReplayAudit replay;

    const RoleCounters& role(Party p) const { return roles[static_cast<std::size_t>(p)]; }
};

inline constexpr unsigned kPublishedHashes[] = {5, 4, 8};  // client, gateway, server
inline constexpr unsigned kPublishedXors[] = {2, 2, 1};
inline constexpr unsigned kPublishedTotalHashes = 17;
inline constexpr unsigned kPublishedTotalXors = 5;
inline constexpr unsigned kPublishedHandshakeBits = 3424;
inline constexpr unsigned kPublishedClientBits = 1088;
inline constexpr unsigned kPublishedMessages = 6;

OverheadReport snapshot(const sim::Transcript& t);

nlohmann::ordered_json to_json(const OverheadReport& r);
std::string render_text(const OverheadReport& r);

}  // namespace lightiot::metrics
