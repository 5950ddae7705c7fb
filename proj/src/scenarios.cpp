#include "lightiot/scenarios.hpp"

#include <algorithm>
#include <set>

namespace lightiot::scenarios {
namespace {

using sim::ScriptRule;
using sim::ScriptedAdversary;

const sim::SessionRecord* find_record(const sim::RunResult& run, Phase phase, std::size_t session) {
    for (const auto& r : run.sessions)
        if (r.event.phase == phase && r.event.session == session) return &r;
    return nullptr;
}

bool completed(const sim::SessionRecord* r) {
    return r && r->event.result == sim::SessionResult::Completed;
}

const sim::FrameEvent* find_frame(const sim::RunResult& run, MessageKind kind, std::string_view origin) {
    for (const auto& f : run.transcript.frames)
        if (f.kind == kind && f.origin == origin) return &f;
    return nullptr;
}

/// Runs just far enough to exercise a frame of `kind` in session 0.
sim::RunConfig focus(sim::RunConfig cfg, MessageKind kind) {
    cfg.clients = 1;
    cfg.gateways = 1;
    cfg.pairing_attempts = 1;
    cfg.sessions = sim::phase_of(kind) == Phase::Pairing ? 0 : 1;
    return cfg;
}

sim::RunResult run_with(const sim::RunConfig& cfg, ScriptRule rule) {
    ScriptedAdversary adv({std::move(rule)});
    return sim::run_scenario(cfg, &adv);
}

}  // namespace

sim::RunConfig base_config(std::uint64_t seed, protocol::Params params) {
    sim::RunConfig cfg;
    cfg.seed = seed;
    cfg.params = params;
    return cfg;
}

ReplayReport replay(MessageKind kind, std::uint64_t staleness_ms, sim::RunConfig base) {
    auto cfg = focus(std::move(base), kind);
    // The copy must land before the harness gives up on the handshake.
    cfg.timeout_ms = std::max<std::uint64_t>(cfg.effective_timeout(), staleness_ms + 1000);
    ReplayReport rep{kind, staleness_ms, "", {}};
    rep.run = run_with(cfg, {0, kind, sim::Replay{staleness_ms}, std::nullopt});
    const auto* copy = find_frame(rep.run, kind, "replayed");
    rep.verdict = copy ? copy->verdict : "not-sent";
    return rep;
}

TamperReport tamper(MessageKind kind, std::size_t bit, sim::RunConfig base) {
    auto cfg = focus(std::move(base), kind);
    TamperReport rep{kind, bit, "", {}, {}, false, false, {}};
    rep.run = run_with(cfg, {0, kind, sim::Tamper{{bit}}, std::nullopt});
    const auto* f = find_frame(rep.run, kind, "tampered");
    rep.recipient_verdict = f ? f->verdict : "not-sent";

    const auto* rec = find_record(rep.run, sim::phase_of(kind), 0);
    if (rec) {
        rep.first_reject = rec->event.first_reject;
        rep.rejected_by = rec->event.rejected_by;
        rep.completed = completed(rec);
    }
    if (rep.completed) {
        if (sim::phase_of(kind) == Phase::Pairing) {
            const auto tuple = rep.run.registry.find(Role::Client, rep.run.clients[0].real_id);
            rep.mismatched = !tuple || tuple->pseudo_current != rep.run.client_states[0].p_id_c;
        } else {
            rep.mismatched = !rec->keys_match();
        }
    }
    return rep;
}

BlockReport block(MessageKind kind, sim::RunConfig base) {
    auto cfg = std::move(base);
    cfg.clients = 1;
    cfg.gateways = 1;
    BlockReport rep{kind, false, false, {}};
    if (kind == MessageKind::M2) {
        cfg.pairing_attempts = 2;
        cfg.sessions = 1;
        rep.run = run_with(cfg, {0, kind, sim::Drop{}, std::nullopt});
        rep.blocked_failed = !completed(find_record(rep.run, Phase::Pairing, 0));
        const auto* auth = find_record(rep.run, Phase::Authentication, 0);
        rep.recovered = completed(find_record(rep.run, Phase::Pairing, 1)) && completed(auth) && auth->keys_match();
    } else {
        cfg.sessions = 2;
        rep.run = run_with(cfg, {0, kind, sim::Drop{}, std::nullopt});
        rep.blocked_failed = !completed(find_record(rep.run, Phase::Authentication, 0));
        const auto* next = find_record(rep.run, Phase::Authentication, 1);
        rep.recovered = completed(next) && next->keys_match();
    }
    return rep;
}

TraceReport trace(std::size_t sessions, sim::RunConfig base) {
    auto cfg = std::move(base);
    cfg.sessions = sessions;
    TraceReport rep;
    rep.sessions = sessions * std::max<std::size_t>(cfg.clients, 1);
    rep.run = sim::run_scenario(cfg);

    std::vector<IdBits> secrets;
    for (const auto& p : rep.run.clients) secrets.push_back(p.real_id);
    for (const auto& p : rep.run.gateways) secrets.push_back(p.real_id);
    for (const auto& f : rep.run.transcript.frames) {
        auto raw = from_hex(f.hex).value_or(Bytes{});
        for (std::size_t off = 0; off + IdBits::kBytes <= raw.size(); ++off) {
            const auto window = IdBits::from(ByteView(raw).subspan(off, IdBits::kBytes));
            rep.identity_leaks += std::count(secrets.begin(), secrets.end(), window);
        }
    }

    std::vector<std::set<IdBits>> client_seen(rep.run.clients.size());
    std::vector<std::set<IdBits>> gateway_seen(rep.run.gateways.size());
    for (const auto& r : rep.run.sessions) {
        if (r.event.phase == Phase::Authentication && completed(&r)) ++rep.completed;
        if (!completed(&r)) continue;
        if (!client_seen[r.event.client].insert(r.client_pseudo).second) ++rep.pseudo_repeats;
        if (r.event.phase == Phase::Authentication && !gateway_seen[r.event.gateway].insert(r.gateway_pseudo).second)
            ++rep.pseudo_repeats;
    }
    return rep;
}

}  // namespace lightiot::scenarios
