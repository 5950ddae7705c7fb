#include "lightiot/metrics.hpp"

#include <cstdio>
#include <sstream>

namespace lightiot::metrics {
namespace {

using nlohmann::ordered_json;

const char* const kRoleNames[] = {"client", "gateway", "server"};

// Ledger items behind the hash deltas that the implementation cannot avoid.
const char* const kCause[] = {
    "m6-keying: C3 is recomputed to unmask M6 before C5 and C6 can be checked",
    "server-authenticator: K_S and C4 are recomputed to authenticate the server",
    "",
};

ordered_json ops_json(const crypto::OpTally& t) {
    return {{"protocol_hashes", t.protocol_hashes}, {"pad_hashes", t.pad_hashes}, {"xor_ops", t.xor_ops}};
}

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string fmt(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string fmt_delta(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", *v);
    return buf;
}

}  // namespace

OverheadReport snapshot(const sim::Transcript& t) {
    OverheadReport r;
    for (auto k : wire::kAllKinds) r.kinds.push_back({k, 0, 0, wire::frame_bits(k), true});

    for (const auto& f : t.frames) {
        // A replayed copy is the adversary's transmission, not an honest send.
        if (f.origin == "replayed") {
            ++r.replay.replays_delivered;
            if (f.verdict == "accepted") ++r.replay.replays_accepted;
            continue;
        }
        const std::size_t bits = wire::frame_bits(f.kind);
        auto& role = r.roles[static_cast<std::size_t>(f.from)];
        auto& phase = sim::phase_of(f.kind) == protocol::Phase::Pairing ? role.pairing : role.authentication;
        ++phase.frames_sent;
        phase.bits_sent += bits;

        auto& row = r.kinds[static_cast<std::size_t>(f.kind) - 1];
        ++row.frames;
        row.bits += bits;
        if (f.origin != "injected" && f.bits() != bits) row.exact = false;

        ++r.total_frames;
        r.total_bits += bits;
        if (f.from == Party::Client) r.client_bits += bits;
    }

    for (const auto& c : t.counters) {
        auto& role = r.roles[static_cast<std::size_t>(c.party)];
        role.pairing.ops += c.tally.pairing;
        role.authentication.ops += c.tally.authentication;
    }

    for (const auto& s : t.sessions) {
        const bool done = s.result == sim::SessionResult::Completed;
        if (s.phase == protocol::Phase::Pairing) {
            ++r.pairings_attempted;
            r.pairings_completed += done;
        } else {
            ++r.auths_attempted;
            r.auths_completed += done;
        }
    }

    const auto per_handshake = [&](std::uint64_t v) -> std::optional<double> {
        if (r.auths_completed == 0) return std::nullopt;
        return static_cast<double>(v) / static_cast<double>(r.auths_completed);
    };
    std::uint64_t total_h = 0, total_x = 0;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto& ops = r.roles[p].authentication.ops;
        total_h += ops.protocol_hashes;
        total_x += ops.xor_ops;
        ComparisonRow row{kRoleNames[p], per_handshake(ops.protocol_hashes), kPublishedHashes[p],
                          per_handshake(ops.xor_ops), kPublishedXors[p], ""};
        if (auto d = row.hash_delta(); d && *d != 0.0) row.cause = kCause[p];
        r.computation.push_back(row);
    }
    ComparisonRow total{"total", per_handshake(total_h), kPublishedTotalHashes, per_handshake(total_x), kPublishedTotalXors,
                        ""};
    if (auto d = total.hash_delta(); d && *d != 0.0) total.cause = "sum of the per-role deltas";
    r.computation.push_back(total);
    return r;
}

ordered_json to_json(const OverheadReport& r) {
    ordered_json j;
    ordered_json roles = ordered_json::object();
    for (std::size_t p = 0; p < 3; ++p) {
        const auto& rc = r.roles[p];
        roles[kRoleNames[p]] = {
            {"pairing", {{"ops", ops_json(rc.pairing.ops)}, {"frames_sent", rc.pairing.frames_sent}, {"bits_sent", rc.pairing.bits_sent}}},
            {"authentication",
             {{"ops", ops_json(rc.authentication.ops)},
              {"frames_sent", rc.authentication.frames_sent},
              {"bits_sent", rc.authentication.bits_sent}}},
        };
    }
    j["roles"] = roles;

    ordered_json kinds = ordered_json::array();
    for (const auto& k : r.kinds)
        kinds.push_back({{"kind", wire::to_string(k.kind)},
                         {"frames", k.frames},
                         {"bits", k.bits},
                         {"expected_bits_per_frame", k.expected_bits_per_frame},
                         {"exact", k.exact}});
    j["messages"] = kinds;
    j["communication"] = {{"total_frames", r.total_frames},
                          {"total_bits", r.total_bits},
                          {"client_bits", r.client_bits},
                          {"published_messages_per_handshake", kPublishedMessages},
                          {"published_bits_per_handshake", kPublishedHandshakeBits},
                          {"published_client_bits_per_handshake", kPublishedClientBits}};
    j["handshakes"] = {{"pairings_attempted", r.pairings_attempted},
                       {"pairings_completed", r.pairings_completed},
                       {"authentications_attempted", r.auths_attempted},
                       {"authentications_completed", r.auths_completed}};

    ordered_json comp = ordered_json::array();
    for (const auto& c : r.computation)
        comp.push_back({{"role", c.role},
                        {"hashes_per_handshake", opt(c.hashes)},
                        {"published_hashes", c.published_hashes},
                        {"hash_delta", opt(c.hash_delta())},
                        {"xors_per_handshake", opt(c.xors)},
                        {"published_xors", c.published_xors},
                        {"cause", c.cause.empty() ? ordered_json(nullptr) : ordered_json(c.cause)}});
    j["computation"] = comp;
    j["replay_audit"] = {{"replays_delivered", r.replay.replays_delivered},
                         {"replays_accepted", r.replay.replays_accepted},
                         {"note", "accepted replays arrived inside the freshness window; no nonce cache is kept"}};
    return j;
}

std::string render_text(const OverheadReport& r) {
    std::ostringstream out;
    char line[256];

    out << "Communication\n";
    std::snprintf(line, sizeof line, "  %-4s %8s %10s %14s %6s\n", "msg", "frames", "bits", "bits/frame", "exact");
    out << line;
    for (const auto& k : r.kinds) {
        std::snprintf(line, sizeof line, "  %-4s %8llu %10llu %14zu %6s\n", std::string(wire::to_string(k.kind)).c_str(),
                      static_cast<unsigned long long>(k.frames), static_cast<unsigned long long>(k.bits),
                      k.expected_bits_per_frame, k.exact ? "yes" : "NO");
        out << line;
    }
    std::snprintf(line, sizeof line, "  total: %llu messages, %llu bits (client %llu); one handshake = %u messages, %u bits (client %u)\n",
                  static_cast<unsigned long long>(r.total_frames), static_cast<unsigned long long>(r.total_bits),
                  static_cast<unsigned long long>(r.client_bits), kPublishedMessages, kPublishedHandshakeBits, kPublishedClientBits);
    out << line;

    std::snprintf(line, sizeof line, "\nHandshakes: pairing %llu/%llu, authentication %llu/%llu completed\n",
                  static_cast<unsigned long long>(r.pairings_completed), static_cast<unsigned long long>(r.pairings_attempted),
                  static_cast<unsigned long long>(r.auths_completed), static_cast<unsigned long long>(r.auths_attempted));
    out << line;

    out << "\nComputation (authentication phase, per completed handshake)\n";
    std::snprintf(line, sizeof line, "  %-8s %8s %6s %7s %8s %6s  %s\n", "role", "T_h", "published", "delta", "T_XOR",
                  "published", "cause");
    out << line;
    for (const auto& c : r.computation) {
        std::snprintf(line, sizeof line, "  %-8s %8s %6u %7s %8s %6u  %s\n", c.role.c_str(), fmt(c.hashes).c_str(),
                      c.published_hashes, fmt_delta(c.hash_delta()).c_str(), fmt(c.xors).c_str(), c.published_xors,
                      c.cause.c_str());
        out << line;
    }

    out << "\nOperation totals (protocol hashes / pad hashes / xor)\n";
    for (std::size_t p = 0; p < 3; ++p) {
        const auto& a = r.roles[p].pairing.ops;
        const auto& b = r.roles[p].authentication.ops;
        std::snprintf(line, sizeof line, "  %-8s pairing %llu/%llu/%llu  authentication %llu/%llu/%llu\n", kRoleNames[p],
                      static_cast<unsigned long long>(a.protocol_hashes), static_cast<unsigned long long>(a.pad_hashes),
                      static_cast<unsigned long long>(a.xor_ops), static_cast<unsigned long long>(b.protocol_hashes),
                      static_cast<unsigned long long>(b.pad_hashes), static_cast<unsigned long long>(b.xor_ops));
        out << line;
    }

    if (r.replay.replays_delivered) {
        std::snprintf(line, sizeof line, "\nReplays: %llu delivered, %llu accepted inside the freshness window\n",
                      static_cast<unsigned long long>(r.replay.replays_delivered),
                      static_cast<unsigned long long>(r.replay.replays_accepted));
        out << line;
    }
    return out.str();
}

}  // namespace lightiot::metrics
