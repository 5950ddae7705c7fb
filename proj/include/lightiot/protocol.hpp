#pragma once

#include <map>
#include <optional>

#include "lightiot/bits.hpp"
#include "lightiot/crypto.hpp"
#include "lightiot/outcome.hpp"
#include "lightiot/registry.hpp"
#include "lightiot/rng.hpp"
#include "lightiot/wire.hpp"

namespace lightiot::protocol {

inline constexpr std::uint32_t kDefaultDeltaTMs = 2000;

struct Params {
    /// Freshness window: accepted iff |receiver clock - sender stamp| < delta_t_ms.
    std::uint32_t delta_t_ms = kDefaultDeltaTMs;
};

inline bool is_fresh(Timestamp receiver_now, Timestamp stamped, const Params& p) {
    return abs_diff(receiver_now, stamped) < p.delta_t_ms;
}

enum class Phase { Pairing, Authentication };

/// Operation tallies split by protocol phase.
struct PhaseTally {
    crypto::OpTally pairing;
    crypto::OpTally authentication;

    crypto::OpTally& operator[](Phase p) { return p == Phase::Pairing ? pairing : authentication; }
    const crypto::OpTally& operator[](Phase p) const { return p == Phase::Pairing ? pairing : authentication; }
    crypto::OpTally total() const { return pairing + authentication; }
};

struct SessionKey {
    Digest key;
    /// Inputs the key was derived from: h(p_id_c || id_gw || r_c || t_s).
    struct Provenance {
        IdBits p_id_c;
        IdBits id_gw;
        IdBits r_c;
        Timestamp t_s;
        friend bool operator==(const Provenance&, const Provenance&) = default;
    } derived_from;

    friend bool operator==(const SessionKey&, const SessionKey&) = default;
};

// ---------------------------------------------------------------- client

enum class ClientPhase { Provisioned, Paired, AuthPending, SessionEstablished };

struct ClientState {
    IdBits id_c;
    IdBits lambda_c;
    IdBits p_id_c;
    std::optional<IdBits> p_id_c_prev;
    /// Pre-shared nonce bound to p_id_c; becomes R_c in the next authentication.
    std::optional<IdBits> nonce;
    std::optional<IdBits> id_gw;
    ClientPhase phase = ClientPhase::Provisioned;

    struct PairingRun {
        IdBits r_c;
        Timestamp t_c1;
    };
    struct AuthRun {
        IdBits r_c;
        Timestamp t_c1;
    };
    std::optional<PairingRun> pairing_run;
    std::optional<AuthRun> auth_run;
    std::optional<SessionKey> session_key;
};

class Client {
public:
    Client(const IdBits& id_c, const IdBits& lambda_c, const IdBits& p_id_c, Params params = {});

    /// Resumes a client that has already paired (e.g. rebuilt from a registry file).
    static Client paired(const IdBits& id_c, const IdBits& lambda_c, const IdBits& p_id_c, const IdBits& nonce,
                         const IdBits& id_gw, Params params = {});

    /// Masked M1. Allowed from any phase; re-pairing replaces the pseudo-identity.
    Bytes start_pairing(Timestamp now, Rng& rng);
    Status finish_pairing(ByteView m2_wire, Timestamp now);

    /// Masked M3, or NotPaired.
    Outcome<Bytes> start_auth(Timestamp now);
    Outcome<SessionKey> handle_m6(ByteView m6_wire, Timestamp now);

    const ClientState& state() const { return state_; }
    const PhaseTally& tally() const { return tally_; }

private:
    ClientState state_;
    Params params_;
    PhaseTally tally_;
};

// --------------------------------------------------------------- gateway

enum class GatewayPhase { Idle, AwaitingServer, SessionEstablished };

struct GatewayState {
    IdBits id_gw;
    IdBits lambda_gw;
    IdBits p_id_gw;
    std::optional<IdBits> p_id_gw_prev;
    /// Pre-shared nonce bound to p_id_gw; becomes R_gw in the next relay.
    IdBits nonce;
    GatewayPhase phase = GatewayPhase::Idle;

    struct Relay {
        IdBits r_c;
        IdBits p_id_c;
        IdBits r_gw;
        Timestamp t_c1;
    };
    std::optional<Relay> pending;
    std::optional<SessionKey> session_key;
};

class Gateway {
public:
    Gateway(const IdBits& id_gw, const IdBits& lambda_gw, const IdBits& p_id_gw, const IdBits& nonce,
            Params params = {});

    /// Masked M4, or StaleTimestamp.
    Outcome<Bytes> handle_m3(ByteView m3_wire, Timestamp now);

    struct Completion {
        Bytes m6_wire;
        SessionKey key;
    };
    Outcome<Completion> handle_m5(ByteView m5_wire, Timestamp now);

    const GatewayState& state() const { return state_; }
    const PhaseTally& tally() const { return tally_; }

private:
    GatewayState state_;
    Params params_;
    PhaseTally tally_;
};

// ---------------------------------------------------------------- server

class Server {
public:
    Server(CredentialRegistry registry, Params params = {});

    /// Binds a client to the gateway whose identity it receives during pairing.
    void assign(const IdBits& client_real_id, const IdBits& gateway_real_id);

    /// Plain M2, or a reject.
    Outcome<Bytes> handle_m1(ByteView m1_wire, Timestamp now);
    /// Plain M5, or a reject.
    Outcome<Bytes> handle_m4(ByteView m4_wire, Timestamp now);

    const CredentialRegistry& registry() const { return registry_; }
    const PhaseTally& tally() const { return tally_; }
    const Params& params() const { return params_; }

private:
    std::optional<IdBits> gateway_for(const IdBits& client_real_id) const;

    CredentialRegistry registry_;
    Params params_;
    std::map<IdBits, IdBits> assignment_;
    PhaseTally tally_;
};

}  // namespace lightiot::protocol
