#include "lightiot/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <queue>
#include <thread>

namespace lightiot::sim {

using protocol::Client;
using protocol::Gateway;
using protocol::Server;
using protocol::SessionKey;

std::string_view to_string(Link l) {
    switch (l) {
        case Link::ClientServer: return "client-server";
        case Link::ClientGateway: return "client-gateway";
        case Link::GatewayServer: return "gateway-server";
    }
    return "?";
}

std::string_view to_string(Party p) {
    switch (p) {
        case Party::Client: return "client";
        case Party::Gateway: return "gateway";
        case Party::Server: return "server";
    }
    return "?";
}

std::string_view to_string(Phase p) { return p == Phase::Pairing ? "pairing" : "authentication"; }

std::string_view to_string(SessionResult r) {
    switch (r) {
        case SessionResult::Completed: return "completed";
        case SessionResult::Rejected: return "rejected";
        case SessionResult::TimedOut: return "timeout";
    }
    return "?";
}

Link link_of(MessageKind k) {
    switch (k) {
        case MessageKind::M1:
        case MessageKind::M2: return Link::ClientServer;
        case MessageKind::M3:
        case MessageKind::M6: return Link::ClientGateway;
        case MessageKind::M4:
        case MessageKind::M5: return Link::GatewayServer;
    }
    return Link::ClientServer;
}

Party sender_of(MessageKind k) {
    switch (k) {
        case MessageKind::M1:
        case MessageKind::M3: return Party::Client;
        case MessageKind::M4:
        case MessageKind::M6: return Party::Gateway;
        case MessageKind::M2:
        case MessageKind::M5: return Party::Server;
    }
    return Party::Client;
}

Party receiver_of(MessageKind k) {
    switch (k) {
        case MessageKind::M2:
        case MessageKind::M6: return Party::Client;
        case MessageKind::M3:
        case MessageKind::M5: return Party::Gateway;
        case MessageKind::M1:
        case MessageKind::M4: return Party::Server;
    }
    return Party::Server;
}

Phase phase_of(MessageKind k) {
    return k == MessageKind::M1 || k == MessageKind::M2 ? Phase::Pairing : Phase::Authentication;
}

DelaySpec DelaySpec::parse(std::string_view text) {
    auto number = [&](std::string_view s) {
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            throw ConfigError("bad delay '" + std::string(text) + "'");
        return v;
    };
    if (auto dash = text.find('-'); dash != std::string_view::npos) {
        DelaySpec d{number(text.substr(0, dash)), number(text.substr(dash + 1))};
        if (d.min_ms > d.max_ms) throw ConfigError("delay range is reversed: " + std::string(text));
        return d;
    }
    return fixed(number(text));
}

void RunConfig::validate() const {
    if (!registry) {
        if (clients == 0) throw ConfigError("need at least one client");
        if (gateways == 0) throw ConfigError("need at least one gateway");
    }
    if (params.delta_t_ms == 0) throw ConfigError("delta_t must be positive");
    if (pairing_attempts == 0) throw ConfigError("pairing_attempts must be positive");
    if (effective_timeout() == 0) throw ConfigError("timeout must be positive");
    for (const LinkConfig* l : {&client_gateway, &gateway_server, &client_server}) {
        if (!(l->loss_prob >= 0.0 && l->loss_prob <= 1.0)) throw ConfigError("loss probability outside [0,1]");
        if (l->delay.min_ms > l->delay.max_ms) throw ConfigError("delay range is reversed");
    }
    auto check_skews = [&](const std::vector<std::int32_t>& skews) {
        for (auto s : skews)
            if (static_cast<std::int64_t>(start_ms) + s < 0) throw ConfigError("clock skew underflows start time");
    };
    check_skews(client_skew_ms);
    check_skews(gateway_skew_ms);
    check_skews({server_skew_ms});
}

std::vector<const SessionRecord*> RunResult::records(Phase phase) const {
    std::vector<const SessionRecord*> out;
    for (const auto& r : sessions)
        if (r.event.phase == phase) out.push_back(&r);
    return out;
}

namespace {

constexpr std::uint64_t kLinkStream = 1;
constexpr std::uint64_t kClientStream = 100;
constexpr std::uint64_t kGatewayStream = 10'000;

IdBits fresh_pseudo(Rng& rng, const IdBits& real_id) {
    IdBits p = rng.next_id();
    while (p == real_id) p = rng.next_id();
    return p;
}

void flip_bits(Bytes& frame, const std::vector<std::size_t>& bits) {
    for (auto b : bits) {
        if (b >= frame.size() * 8) throw ConfigError("tamper bit " + std::to_string(b) + " outside frame");
        frame[b / 8] ^= static_cast<std::uint8_t>(0x80u >> (b % 8));
    }
}

class Engine {
public:
    Engine(const RunConfig& cfg, Interceptor* adversary) : cfg_(cfg), adversary_(adversary) {
        cfg_.validate();
        for (std::uint64_t l = 0; l < 3; ++l) link_rng_.push_back(Rng::stream(cfg_.seed, kLinkStream + l));
        if (cfg_.registry)
            resume(*cfg_.registry);
        else
            provision();
    }

    RunResult run() {
        if (cfg_.run_pairing)
            for (std::size_t i = 0; i < clients_.size(); ++i) {
                if (clients_[i].state().phase != protocol::ClientPhase::Provisioned) continue;
                for (unsigned attempt = 0; attempt < cfg_.pairing_attempts; ++attempt)
                    if (run_job(i, Phase::Pairing, attempt)) break;
            }
        for (std::size_t s = 0; s < cfg_.sessions; ++s)
            for (std::size_t i = 0; i < clients_.size(); ++i) run_job(i, Phase::Authentication, s);

        for (std::size_t i = 0; i < clients_.size(); ++i)
            result_.transcript.counters.push_back({Party::Client, i, clients_[i].tally()});
        for (std::size_t j = 0; j < gateways_.size(); ++j)
            result_.transcript.counters.push_back({Party::Gateway, j, gateways_[j].tally()});
        result_.transcript.counters.push_back({Party::Server, 0, server_->tally()});

        for (const auto& c : clients_) result_.client_states.push_back(c.state());
        for (const auto& g : gateways_) result_.gateway_states.push_back(g.state());
        result_.registry = server_->registry();
        return std::move(result_);
    }

private:
    struct Pending {
        std::uint64_t time;
        std::uint64_t seq;
        Envelope env;
        std::string origin;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    struct Job {
        std::size_t client;
        std::size_t gateway;
        std::size_t session;
        Phase phase;
        std::optional<std::uint64_t> completed_at;
        std::optional<Reject> first_reject;
        std::optional<Party> rejected_by;
        std::optional<SessionKey> client_key;
        std::optional<SessionKey> gateway_key;
    };

    void provision() {
        CredentialRegistry reg;
        std::vector<Rng> gw_rngs;
        for (std::size_t j = 0; j < cfg_.gateways; ++j) {
            Rng rng = Rng::stream(cfg_.seed, kGatewayStream + j);
            Principal p{rng.next_id(), rng.next_id()};
            IdBits pseudo = fresh_pseudo(rng, p.real_id);
            IdBits nonce = rng.next_id();
            reg.provision(Role::Gateway, p.real_id, p.secret, pseudo, nonce);
            gateways_.emplace_back(p.real_id, p.secret, pseudo, nonce, cfg_.params);
            result_.gateways.push_back(p);
        }
        for (std::size_t i = 0; i < cfg_.clients; ++i) {
            Rng rng = Rng::stream(cfg_.seed, kClientStream + i);
            Principal p{rng.next_id(), rng.next_id()};
            IdBits pseudo = fresh_pseudo(rng, p.real_id);
            reg.provision(Role::Client, p.real_id, p.secret, pseudo);
            clients_.emplace_back(p.real_id, p.secret, pseudo, cfg_.params);
            client_rngs_.push_back(std::move(rng));
            result_.clients.push_back(p);
        }
        start_server(std::move(reg));
    }

    void resume(const CredentialRegistry& reg) {
        auto gws = reg.tuples(Role::Gateway);
        auto cls = reg.tuples(Role::Client);
        if (gws.empty() || cls.empty()) throw ConfigError("registry needs at least one client and one gateway");
        for (std::size_t j = 0; j < gws.size(); ++j) {
            const auto& t = gws[j];
            if (!t.nonce_current) throw ConfigError("gateway tuple without a nonce");
            gateways_.emplace_back(t.real_id, t.secret, t.pseudo_current, *t.nonce_current, cfg_.params);
            result_.gateways.push_back({t.real_id, t.secret});
        }
        for (std::size_t i = 0; i < cls.size(); ++i) {
            const auto& t = cls[i];
            const IdBits& id_gw = gws[i % gws.size()].real_id;
            if (t.nonce_current)
                clients_.push_back(Client::paired(t.real_id, t.secret, t.pseudo_current, *t.nonce_current, id_gw,
                                                  cfg_.params));
            else
                clients_.emplace_back(t.real_id, t.secret, t.pseudo_current, cfg_.params);
            // Resumed runs draw pairing nonces from a stream that provisioning never used.
            client_rngs_.push_back(Rng::stream(cfg_.seed ^ 0x5eed'0000'0000'0000ull, kClientStream + i));
            result_.clients.push_back({t.real_id, t.secret});
        }
        start_server(reg);
    }

    void start_server(CredentialRegistry reg) {
        server_.emplace(std::move(reg), cfg_.params);
        for (std::size_t i = 0; i < clients_.size(); ++i)
            server_->assign(clients_[i].state().id_c, gateways_[gateway_of(i)].state().id_gw);
    }

    std::size_t gateway_of(std::size_t client) const { return client % gateways_.size(); }

    Timestamp clock(Party who, std::size_t index) const {
        std::int64_t skew = 0;
        if (who == Party::Client && index < cfg_.client_skew_ms.size()) skew = cfg_.client_skew_ms[index];
        if (who == Party::Gateway && index < cfg_.gateway_skew_ms.size()) skew = cfg_.gateway_skew_ms[index];
        if (who == Party::Server) skew = cfg_.server_skew_ms;
        return Timestamp{static_cast<std::uint32_t>(static_cast<std::int64_t>(cfg_.start_ms) +
                                                    static_cast<std::int64_t>(now_) + skew)};
    }

    const LinkConfig& link_config(Link l) const {
        switch (l) {
            case Link::ClientGateway: return cfg_.client_gateway;
            case Link::GatewayServer: return cfg_.gateway_server;
            case Link::ClientServer: break;
        }
        return cfg_.client_server;
    }

    void record(const Envelope& env, const std::string& origin, std::string verdict, const crypto::OpTally& tally) {
        FrameEvent ev;
        ev.time = now_;
        ev.sent_at = env.sent_at;
        ev.kind = env.kind;
        ev.from = sender_of(env.kind);
        ev.to = receiver_of(env.kind);
        ev.client = env.client;
        ev.gateway = env.gateway;
        ev.session = env.session;
        ev.origin = origin;
        ev.verdict = std::move(verdict);
        ev.hex = to_hex(env.wire);
        ev.receiver_tally = tally;
        result_.transcript.frames.push_back(std::move(ev));
    }

    void schedule(std::uint64_t at, Envelope env, std::string origin) {
        queue_.push(Pending{at, seq_++, std::move(env), std::move(origin)});
    }

    void send(MessageKind kind, Bytes wire) {
        Envelope env{kind, job_->client, job_->gateway, job_->session, std::move(wire), now_};
        const Link link = link_of(kind);
        const LinkConfig& lc = link_config(link);
        Rng& rng = link_rng_[static_cast<std::size_t>(link)];
        const std::uint64_t delay = rng.uniform(lc.delay.min_ms, lc.delay.max_ms);
        const bool lost = rng.bernoulli(lc.loss_prob);

        AdversaryAction action = adversary_ ? adversary_->intercept(env) : AdversaryAction{Pass{}};
        if (std::holds_alternative<Drop>(action)) {
            record(env, "honest", "dropped", {});
            return;
        }
        if (lost) {
            record(env, "honest", "lost", {});
            return;
        }
        const std::uint64_t arrive = now_ + delay;
        std::visit(
            [&](auto& a) {
                using A = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<A, Pass>) {
                    schedule(arrive, std::move(env), "honest");
                } else if constexpr (std::is_same_v<A, Delay>) {
                    schedule(arrive + a.ms, std::move(env), "delayed");
                } else if constexpr (std::is_same_v<A, Tamper>) {
                    flip_bits(env.wire, a.bits);
                    schedule(arrive, std::move(env), "tampered");
                } else if constexpr (std::is_same_v<A, Replay>) {
                    schedule(arrive, env, "honest");
                    schedule(env.sent_at + a.after_ms, std::move(env), "replayed");
                } else if constexpr (std::is_same_v<A, Inject>) {
                    env.wire = a.frame;
                    schedule(arrive, std::move(env), "injected");
                }
            },
            action);
    }

    void note_reject(Reject r, Party by) {
        if (!job_->first_reject) {
            job_->first_reject = r;
            job_->rejected_by = by;
        }
    }

    template <class T>
    bool settle(const Pending& p, const Outcome<T>& out, Party receiver, const crypto::OpTally& tally) {
        if (out.ok()) {
            record(p.env, p.origin, "accepted", tally);
            return true;
        }
        record(p.env, p.origin, std::string(to_string(out.error())), tally);
        note_reject(out.error(), receiver);
        return false;
    }

    void deliver(const Pending& p) {
        const Envelope& env = p.env;
        Client& client = clients_[env.client];
        Gateway& gateway = gateways_[env.gateway];
        switch (env.kind) {
            case MessageKind::M1: {
                auto out = server_->handle_m1(env.wire, clock(Party::Server, 0));
                if (settle(p, out, Party::Server, server_->tally().total())) send(MessageKind::M2, out.value());
                break;
            }
            case MessageKind::M2: {
                auto out = client.finish_pairing(env.wire, clock(Party::Client, env.client));
                if (settle(p, out, Party::Client, client.tally().total()) && !job_->completed_at)
                    job_->completed_at = now_;
                break;
            }
            case MessageKind::M3: {
                auto out = gateway.handle_m3(env.wire, clock(Party::Gateway, env.gateway));
                if (settle(p, out, Party::Gateway, gateway.tally().total())) send(MessageKind::M4, out.value());
                break;
            }
            case MessageKind::M4: {
                auto out = server_->handle_m4(env.wire, clock(Party::Server, 0));
                if (settle(p, out, Party::Server, server_->tally().total())) send(MessageKind::M5, out.value());
                break;
            }
            case MessageKind::M5: {
                auto out = gateway.handle_m5(env.wire, clock(Party::Gateway, env.gateway));
                if (settle(p, out, Party::Gateway, gateway.tally().total())) {
                    job_->gateway_key = out.value().key;
                    send(MessageKind::M6, out.value().m6_wire);
                }
                break;
            }
            case MessageKind::M6: {
                auto out = client.handle_m6(env.wire, clock(Party::Client, env.client));
                if (settle(p, out, Party::Client, client.tally().total()) && !job_->completed_at) {
                    job_->client_key = out.value();
                    job_->completed_at = now_;
                }
                break;
            }
        }
    }

    bool run_job(std::size_t client, Phase phase, std::size_t session) {
        Job job{client, gateway_of(client), session, phase, {}, {}, {}, {}, {}};
        job_ = &job;
        const std::uint64_t t0 = now_;
        const std::uint64_t deadline = t0 + cfg_.effective_timeout();

        Client& c = clients_[client];
        if (phase == Phase::Pairing) {
            send(MessageKind::M1, c.start_pairing(clock(Party::Client, client), client_rngs_[client]));
        } else {
            auto m3 = c.start_auth(clock(Party::Client, client));
            if (m3)
                send(MessageKind::M3, m3.value());
            else
                note_reject(m3.error(), Party::Client);
        }

        bool expired = false;
        while (!queue_.empty()) {
            Pending p = queue_.top();
            queue_.pop();
            if (p.time > deadline) {
                now_ = std::max(now_, deadline);
                record(p.env, p.origin, "expired", {});
                expired = true;
                continue;
            }
            now_ = p.time;
            deliver(p);
        }
        if (!job.completed_at || expired) now_ = std::max(now_, deadline);

        SessionRecord rec;
        SessionEvent& ev = rec.event;
        ev.client = client;
        ev.gateway = job.gateway;
        ev.session = session;
        ev.phase = phase;
        ev.first_reject = job.first_reject;
        ev.rejected_by = job.rejected_by;
        ev.started_at = t0;
        ev.ended_at = job.completed_at.value_or(deadline);
        if (job.completed_at) {
            ev.result = SessionResult::Completed;
            ev.latency_ms = *job.completed_at - t0;
        } else {
            ev.result = job.first_reject ? SessionResult::Rejected : SessionResult::TimedOut;
        }
        rec.client_key = job.client_key;
        rec.gateway_key = job.gateway_key;
        rec.client_pseudo = c.state().p_id_c;
        rec.gateway_pseudo = gateways_[job.gateway].state().p_id_gw;
        result_.transcript.sessions.push_back(ev);
        result_.sessions.push_back(std::move(rec));
        job_ = nullptr;
        return job.completed_at.has_value();
    }

    RunConfig cfg_;
    Interceptor* adversary_;
    std::vector<Rng> link_rng_;
    std::vector<Rng> client_rngs_;
    std::vector<Client> clients_;
    std::vector<Gateway> gateways_;
    std::optional<Server> server_;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    std::uint64_t now_ = 0;
    std::uint64_t seq_ = 0;
    Job* job_ = nullptr;
    RunResult result_;
};

}  // namespace

RunResult run_scenario(const RunConfig& config, Interceptor* adversary) { return Engine(config, adversary).run(); }

std::vector<RunResult> run_batch(const std::vector<RunConfig>& configs, const InterceptorFactory& adversary,
                                 unsigned threads) {
    std::vector<std::optional<RunResult>> slots(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < configs.size(); k = next++) {
            try {
                auto adv = adversary ? adversary() : nullptr;
                slots[k] = run_scenario(configs[k], adv.get());
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<RunResult> out;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        if (errors[k]) std::rethrow_exception(errors[k]);
        out.push_back(std::move(*slots[k]));
    }
    return out;
}

}  // namespace lightiot::sim
