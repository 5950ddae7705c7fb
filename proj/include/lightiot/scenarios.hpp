#pragma once

#include <optional>
#include <string>

#include "lightiot/sim.hpp"

namespace lightiot::scenarios {

using sim::Party;
using protocol::Phase;
using wire::MessageKind;

/// One client, one gateway, honest links; the base for every attack run.
sim::RunConfig base_config(std::uint64_t seed, protocol::Params params = {});

struct ReplayReport {
    MessageKind kind;
    std::uint64_t staleness_ms = 0;
    /// Receiver verdict on the replayed copy.
    std::string verdict;
    bool rejected() const { return verdict != "accepted"; }
    sim::RunResult run;
};

/// Lets the honest frame through and delivers a copy staleness_ms after it was sent.
ReplayReport replay(MessageKind kind, std::uint64_t staleness_ms, sim::RunConfig base);

struct TamperReport {
    MessageKind kind;
    std::size_t bit = 0;
    /// Verdict of the frame's direct recipient.
    std::string recipient_verdict;
    /// First rejection anywhere in the tampered handshake.
    std::optional<Reject> first_reject;
    std::optional<Party> rejected_by;
    /// The tampered handshake completed at the client.
    bool completed = false;
    /// Completed, yet the two ends disagree (session keys, or pseudo-identity for pairing).
    bool mismatched = false;
    sim::RunResult run;

    bool rejected_by_recipient() const { return recipient_verdict != "accepted"; }
};

/// Flips one bit of the first frame of `kind` in flight.
TamperReport tamper(MessageKind kind, std::size_t bit, sim::RunConfig base);

struct BlockReport {
    MessageKind kind;
    bool blocked_failed = false;
    /// The follow-up handshake completed with matching keys, without re-provisioning.
    bool recovered = false;
    sim::RunResult run;
};

/// Drops M2, M5 or M6 once, then runs a follow-up handshake.
BlockReport block(MessageKind kind, sim::RunConfig base);

struct TraceReport {
    std::size_t sessions = 0;
    /// Byte-aligned 128-bit windows of on-wire frames equal to a real identity.
    std::size_t identity_leaks = 0;
    /// Pseudo-identities a principal held more than once.
    std::size_t pseudo_repeats = 0;
    std::size_t completed = 0;
    bool passed() const { return identity_leaks == 0 && pseudo_repeats == 0 && completed == sessions; }
    sim::RunResult run;
};

TraceReport trace(std::size_t sessions, sim::RunConfig base);

}  // namespace lightiot::scenarios
