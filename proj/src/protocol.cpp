#include "lightiot/protocol.hpp"

#include <algorithm>

namespace lightiot::protocol {

using crypto::Meter;
using crypto::low_half;
using crypto::truncate_id;
using wire::FrameM1;
using wire::FrameM2;
using wire::FrameM3;
using wire::FrameM4;
using wire::FrameM5;
using wire::FrameM6;

namespace {

// D2 = (ID_GW xor mask128) || tag128
struct D2Parts {
    IdBits masked_id_gw;
    IdBits tag;
};

Digest pack_d2(const D2Parts& p) {
    Digest d;
    std::copy(p.masked_id_gw.bytes.begin(), p.masked_id_gw.bytes.end(), d.bytes.begin());
    std::copy(p.tag.bytes.begin(), p.tag.bytes.end(), d.bytes.begin() + IdBits::kBytes);
    return d;
}

D2Parts unpack_d2(const Digest& d) { return {truncate_id(d), low_half(d)}; }

// M6 keeps its timestamps in clear; only C5||C6 is masked, under C3.
Bytes mask_m6_region(Meter& m, Bytes frame, const Digest& c3) {
    ByteView region(frame.data(), FrameM6::kMaskedBytes);
    Bytes masked = m.mask(region, c3.view());
    std::copy(masked.begin(), masked.end(), frame.begin());
    return frame;
}

}  // namespace

// ================================================================ Client

Client::Client(const IdBits& id_c, const IdBits& lambda_c, const IdBits& p_id_c, Params params)
    : params_(params) {
    state_.id_c = id_c;
    state_.lambda_c = lambda_c;
    state_.p_id_c = p_id_c;
}

Client Client::paired(const IdBits& id_c, const IdBits& lambda_c, const IdBits& p_id_c, const IdBits& nonce,
                      const IdBits& id_gw, Params params) {
    Client c(id_c, lambda_c, p_id_c, params);
    c.state_.nonce = nonce;
    c.state_.id_gw = id_gw;
    c.state_.phase = ClientPhase::Paired;
    return c;
}

Bytes Client::start_pairing(Timestamp now, Rng& rng) {
    Meter m(tally_[Phase::Pairing]);
    FrameM1 f;
    f.id_c = state_.id_c;
    f.r_c = rng.next_id();
    f.t_c1 = now;
    f.d1 = m.hash(state_.p_id_c, f.r_c, state_.lambda_c);
    state_.pairing_run = ClientState::PairingRun{f.r_c, f.t_c1};
    return m.mask(wire::encode(f), state_.p_id_c.view());
}

Status Client::finish_pairing(ByteView m2_wire, Timestamp now) {
    auto decoded = wire::decode_as<FrameM2>(m2_wire);
    if (!decoded) return decoded.error();
    const FrameM2& f = decoded.value();
    if (!is_fresh(now, f.t_s, params_)) return Reject::StaleTimestamp;
    if (!state_.pairing_run) return Reject::NoPendingRun;

    Meter m(tally_[Phase::Pairing]);
    const auto& run = *state_.pairing_run;
    const Digest refreshed = m.hash(state_.id_c, run.r_c, run.t_c1, f.t_s);
    const IdBits p_new = truncate_id(refreshed);
    const D2Parts d2 = unpack_d2(f.d2);
    const IdBits id_gw = m.xor_ids(d2.masked_id_gw, truncate_id(m.hash(p_new, f.t_s)));
    if (truncate_id(m.hash(id_gw, p_new, f.t_s)) != d2.tag) return Reject::BadAuthenticator;

    state_.p_id_c_prev = state_.p_id_c;
    state_.p_id_c = p_new;
    state_.nonce = low_half(refreshed);
    state_.id_gw = id_gw;
    state_.pairing_run.reset();
    state_.auth_run.reset();
    state_.session_key.reset();
    state_.phase = ClientPhase::Paired;
    return accepted();
}

Outcome<Bytes> Client::start_auth(Timestamp now) {
    if (!state_.id_gw || !state_.nonce) return Reject::NotPaired;
    Meter m(tally_[Phase::Authentication]);
    FrameM3 f;
    f.r_c = *state_.nonce;
    f.t_c1 = now;
    f.c1 = m.hash(state_.id_c, state_.lambda_c, f.r_c);
    f.p_id_c = state_.p_id_c;
    state_.auth_run = ClientState::AuthRun{f.r_c, f.t_c1};
    state_.session_key.reset();
    state_.phase = ClientPhase::AuthPending;
    return m.mask(wire::encode(f), state_.id_gw->view());
}

Outcome<SessionKey> Client::handle_m6(ByteView m6_wire, Timestamp now) {
    if (m6_wire.size() != wire::frame_bytes(wire::MessageKind::M6)) return Reject::LengthMismatch;
    // Timestamps sit in the clear tail; read them before unmasking.
    const auto clear = wire::decode_as<FrameM6>(m6_wire).value();
    if (!is_fresh(now, clear.t_gw2, params_)) return Reject::StaleTimestamp;
    if (!state_.auth_run || !state_.id_gw) return Reject::NoPendingRun;

    Meter m(tally_[Phase::Authentication]);
    const auto& run = *state_.auth_run;
    const Digest c3 = m.hash(state_.id_c, run.t_c1, clear.t_s);
    Bytes plain = mask_m6_region(m, Bytes(m6_wire.begin(), m6_wire.end()), c3);
    const FrameM6 f = wire::decode_as<FrameM6>(plain).value();

    if (m.hash(c3, run.r_c) != f.c5) return Reject::BadAuthenticator;
    const Digest refreshed = m.hash(state_.id_c, state_.lambda_c, run.r_c, run.t_c1, f.t_s);
    SessionKey key{m.hash(state_.p_id_c, *state_.id_gw, run.r_c, f.t_s),
                   {state_.p_id_c, *state_.id_gw, run.r_c, f.t_s}};
    if (m.hash(key.key, c3, f.t_gw2) != f.c6) return Reject::KeyConfirmFailed;

    state_.p_id_c_prev = state_.p_id_c;
    state_.p_id_c = truncate_id(refreshed);
    state_.nonce = low_half(refreshed);
    state_.auth_run.reset();
    state_.session_key = key;
    state_.phase = ClientPhase::SessionEstablished;
    return key;
}

// =============================================================== Gateway

Gateway::Gateway(const IdBits& id_gw, const IdBits& lambda_gw, const IdBits& p_id_gw, const IdBits& nonce,
                 Params params)
    : params_(params) {
    state_.id_gw = id_gw;
    state_.lambda_gw = lambda_gw;
    state_.p_id_gw = p_id_gw;
    state_.nonce = nonce;
}

Outcome<Bytes> Gateway::handle_m3(ByteView m3_wire, Timestamp now) {
    if (m3_wire.size() != wire::frame_bytes(wire::MessageKind::M3)) return Reject::LengthMismatch;
    Meter m(tally_[Phase::Authentication]);
    const Bytes plain = m.mask(m3_wire, state_.id_gw.view());
    const FrameM3 in = wire::decode_as<FrameM3>(plain).value();
    if (!is_fresh(now, in.t_c1, params_)) return Reject::StaleTimestamp;

    const IdBits r_gw = state_.nonce;
    FrameM4 out;
    out.c1 = in.c1;
    out.c2 = m.hash(state_.id_gw, state_.lambda_gw, r_gw);
    out.p_id_c = in.p_id_c;
    out.t_gw1 = in.t_c1;

    state_.pending = GatewayState::Relay{in.r_c, in.p_id_c, r_gw, in.t_c1};
    state_.session_key.reset();
    state_.phase = GatewayPhase::AwaitingServer;
    return m.mask(wire::encode(out), state_.p_id_gw.view());
}

Outcome<Gateway::Completion> Gateway::handle_m5(ByteView m5_wire, Timestamp now) {
    auto decoded = wire::decode_as<FrameM5>(m5_wire);
    if (!decoded) return decoded.error();
    const FrameM5& in = decoded.value();
    const Timestamp t_gw2 = now;
    if (!is_fresh(t_gw2, in.t_s, params_)) return Reject::StaleTimestamp;
    if (!state_.pending) return Reject::NoPendingRun;

    Meter m(tally_[Phase::Authentication]);
    const auto& relay = *state_.pending;
    const Digest refreshed = m.hash(state_.id_gw, state_.lambda_gw, relay.r_gw, relay.t_c1, in.t_s);
    const IdBits p_new = truncate_id(refreshed);
    const Digest k_s = m.hash(state_.id_gw, state_.lambda_gw, relay.r_gw, p_new, in.t_s);
    if (m.hash(k_s, in.c3, p_new) != in.c4) return Reject::BadServerAuthenticator;

    SessionKey key{m.hash(relay.p_id_c, state_.id_gw, relay.r_c, in.t_s),
                   {relay.p_id_c, state_.id_gw, relay.r_c, in.t_s}};
    FrameM6 out;
    out.c5 = in.c5;
    out.c6 = m.hash(key.key, in.c3, t_gw2);
    out.t_s = in.t_s;
    out.t_gw2 = t_gw2;
    Bytes wire_out = mask_m6_region(m, wire::encode(out), in.c3);

    state_.p_id_gw_prev = state_.p_id_gw;
    state_.p_id_gw = p_new;
    state_.nonce = low_half(refreshed);
    state_.pending.reset();
    state_.session_key = key;
    state_.phase = GatewayPhase::SessionEstablished;
    return Completion{std::move(wire_out), key};
}

// ================================================================ Server

Server::Server(CredentialRegistry registry, Params params) : registry_(std::move(registry)), params_(params) {}

void Server::assign(const IdBits& client_real_id, const IdBits& gateway_real_id) {
    assignment_[client_real_id] = gateway_real_id;
}

std::optional<IdBits> Server::gateway_for(const IdBits& client_real_id) const {
    if (auto it = assignment_.find(client_real_id); it != assignment_.end()) return it->second;
    auto gateways = registry_.tuples(Role::Gateway);
    if (gateways.size() == 1) return gateways.front().real_id;
    return std::nullopt;
}

Outcome<Bytes> Server::handle_m1(ByteView m1_wire, Timestamp now) {
    if (m1_wire.size() != wire::frame_bytes(wire::MessageKind::M1)) return Reject::LengthMismatch;
    auto& tally = tally_[Phase::Pairing];
    // A candidate key is right when the recovered ID_C is the tuple's own.
    auto match = registry_.find_by_trial_unmask(
        Role::Client, m1_wire, wire::MessageKind::M1,
        [](const CredentialTuple& t, Slot, ByteView plain) {
            return IdBits::from(plain.first(IdBits::kBytes)) == t.real_id;
        },
        &tally);
    if (!match) return Reject::UnknownClient;

    const FrameM1 in = wire::decode_as<FrameM1>(match->unmasked).value();
    const Timestamp t_s = now;
    if (!is_fresh(t_s, in.t_c1, params_)) return Reject::StaleTimestamp;

    Meter m(tally);
    const CredentialTuple& client = match->tuple;
    const IdBits used_pseudo = *client.pseudo(match->slot);
    if (m.hash(used_pseudo, in.r_c, client.secret) != in.d1) return Reject::BadAuthenticator;
    const auto id_gw = gateway_for(client.real_id);
    if (!id_gw) return Reject::UnknownGateway;

    const Digest refreshed = m.hash(client.real_id, in.r_c, in.t_c1, t_s);
    const IdBits p_new = truncate_id(refreshed);
    D2Parts d2;
    d2.masked_id_gw = m.xor_ids(*id_gw, truncate_id(m.hash(p_new, t_s)));
    d2.tag = truncate_id(m.hash(*id_gw, p_new, t_s));

    registry_.stage_and_commit_pseudo(Role::Client, client.real_id, p_new, low_half(refreshed), match->slot);
    return wire::encode(FrameM2{pack_d2(d2), t_s});
}

Outcome<Bytes> Server::handle_m4(ByteView m4_wire, Timestamp now) {
    if (m4_wire.size() != wire::frame_bytes(wire::MessageKind::M4)) return Reject::LengthMismatch;
    auto& tally = tally_[Phase::Authentication];
    // A gateway key is right when the relayed P_ID_c is a registered client pseudo.
    auto gw_match = registry_.find_by_trial_unmask(
        Role::Gateway, m4_wire, wire::MessageKind::M4,
        [this](const CredentialTuple&, Slot, ByteView plain) {
            const auto& span = wire::layout(wire::MessageKind::M4)[2];
            const IdBits carried = IdBits::from(plain.subspan(span.offset_bits / 8, IdBits::kBytes));
            return registry_.find_by_pseudo(Role::Client, carried).has_value();
        },
        &tally);
    if (!gw_match) return Reject::UnknownGateway;

    const FrameM4 in = wire::decode_as<FrameM4>(gw_match->unmasked).value();
    const Timestamp t_s = now;
    if (!is_fresh(t_s, in.t_gw1, params_)) return Reject::StaleTimestamp;

    auto client_match = registry_.find_by_pseudo(Role::Client, in.p_id_c);
    if (!client_match) return Reject::UnknownClient;
    const CredentialTuple& gw = gw_match->tuple;
    const CredentialTuple& client = client_match->tuple;
    const auto r_gw = gw.nonce(gw_match->slot);
    const auto r_c = client.nonce(client_match->slot);
    if (!r_gw) return Reject::UnknownGateway;
    if (!r_c) return Reject::UnknownClient;

    Meter m(tally);
    if (m.hash(gw.real_id, gw.secret, *r_gw) != in.c2) return Reject::BadAuthenticator;
    if (m.hash(client.real_id, client.secret, *r_c) != in.c1) return Reject::BadAuthenticator;

    const Digest client_refresh = m.hash(client.real_id, client.secret, *r_c, in.t_gw1, t_s);
    const Digest gw_refresh = m.hash(gw.real_id, gw.secret, *r_gw, in.t_gw1, t_s);
    const IdBits p_gw_new = truncate_id(gw_refresh);

    FrameM5 out;
    out.t_s = t_s;
    out.c3 = m.hash(client.real_id, in.t_gw1, t_s);
    const Digest k_s = m.hash(gw.real_id, gw.secret, *r_gw, p_gw_new, t_s);
    out.c4 = m.hash(k_s, out.c3, p_gw_new);
    out.c5 = m.hash(out.c3, *r_c);

    registry_.stage_and_commit_pseudo(Role::Client, client.real_id, truncate_id(client_refresh),
                                      low_half(client_refresh), client_match->slot);
    registry_.stage_and_commit_pseudo(Role::Gateway, gw.real_id, p_gw_new, low_half(gw_refresh), gw_match->slot);
    return wire::encode(out);
}

}  // namespace lightiot::protocol
