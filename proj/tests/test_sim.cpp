#include <catch_amalgamated.hpp>

#include <sstream>

#include "lightiot/sim.hpp"

using namespace lightiot;
using namespace lightiot::sim;

namespace {

RunConfig fixed_links(std::uint32_t cg, std::uint32_t gs, std::uint32_t cs) {
    RunConfig cfg;
    cfg.seed = 1;
    cfg.client_gateway = {DelaySpec::fixed(cg)};
    cfg.gateway_server = {DelaySpec::fixed(gs)};
    cfg.client_server = {DelaySpec::fixed(cs)};
    return cfg;
}

std::size_t sends(const Transcript& t) {
    std::size_t n = 0;
    for (const auto& f : t.frames) n += f.origin != "replayed";
    return n;
}

}  // namespace

TEST_CASE("one honest session is exactly six frames") {
    RunConfig cfg;
    cfg.seed = 7;
    auto run = run_scenario(cfg);
    REQUIRE(run.transcript.frames.size() == 6);
    const MessageKind order[] = {MessageKind::M1, MessageKind::M2, MessageKind::M3,
                                 MessageKind::M4, MessageKind::M5, MessageKind::M6};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(run.transcript.frames[i].kind == order[i]);
        CHECK(run.transcript.frames[i].verdict == "accepted");
        CHECK(run.transcript.frames[i].bits() == wire::frame_bits(order[i]));
    }
    REQUIRE(run.sessions.size() == 2);
    CHECK(run.sessions[1].keys_match());
}

TEST_CASE("same inputs and seed give identical transcripts") {
    RunConfig cfg;
    cfg.seed = 99;
    cfg.clients = 3;
    cfg.gateways = 2;
    cfg.sessions = 4;
    cfg.client_gateway = {DelaySpec{1, 30}, 0.1};
    cfg.gateway_server = {DelaySpec{5, 50}, 0.05};
    auto a = run_scenario(cfg).transcript.to_jsonl();
    auto b = run_scenario(cfg).transcript.to_jsonl();
    CHECK(a == b);
    cfg.seed = 100;
    CHECK(run_scenario(cfg).transcript.to_jsonl() != a);
}

TEST_CASE("total loss on the client-server link times out every pairing") {
    RunConfig cfg;
    cfg.seed = 3;
    cfg.client_server.loss_prob = 1.0;
    cfg.sessions = 1;
    auto run = run_scenario(cfg);
    auto pairings = run.records(Phase::Pairing);
    REQUIRE(pairings.size() == cfg.pairing_attempts);
    for (auto* r : pairings) CHECK(r->event.result == SessionResult::TimedOut);
    auto auths = run.records(Phase::Authentication);
    REQUIRE(auths.size() == 1);
    CHECK(auths[0]->event.first_reject == Reject::NotPaired);
    CHECK(run.transcript.frames.size() == cfg.pairing_attempts);
    for (const auto& f : run.transcript.frames) CHECK(f.verdict == "lost");
}

TEST_CASE("every send is delivered, dropped or lost exactly once") {
    RunConfig cfg;
    cfg.seed = 12;
    cfg.clients = 4;
    cfg.sessions = 10;
    cfg.client_gateway.loss_prob = 0.2;
    cfg.gateway_server.loss_prob = 0.2;
    auto run = run_scenario(cfg);
    std::size_t delivered = 0, lost = 0;
    for (const auto& f : run.transcript.frames) {
        if (f.verdict == "lost")
            ++lost;
        else
            ++delivered;
    }
    CHECK(lost > 0);
    CHECK(delivered + lost == sends(run.transcript));
    // Each accepted frame produces exactly one reply, except M2 and M6 which end a run.
    std::size_t replies_expected = 0;
    for (const auto& f : run.transcript.frames)
        if (f.verdict == "accepted" && f.kind != MessageKind::M2 && f.kind != MessageKind::M6) ++replies_expected;
    const auto starts = run.sessions.size();
    std::size_t not_paired = 0;
    for (const auto& s : run.sessions) not_paired += s.event.first_reject == Reject::NotPaired;
    CHECK(run.transcript.frames.size() == starts - not_paired + replies_expected);
}

TEST_CASE("event times never go backwards") {
    RunConfig cfg;
    cfg.seed = 5;
    cfg.clients = 2;
    cfg.sessions = 5;
    cfg.client_gateway = {DelaySpec{1, 100}};
    auto run = run_scenario(cfg);
    for (std::size_t i = 1; i < run.transcript.frames.size(); ++i)
        CHECK(run.transcript.frames[i].time >= run.transcript.frames[i - 1].time);
}

TEST_CASE("handshake latency is the sum of fixed link delays") {
    for (auto [cg, gs, cs] : {std::tuple{5u, 20u, 25u}, std::tuple{1u, 1u, 1u}, std::tuple{17u, 140u, 333u}}) {
        auto cfg = fixed_links(cg, gs, cs);
        cfg.sessions = 5;
        auto run = run_scenario(cfg);
        for (const auto& r : run.sessions) {
            REQUIRE(r.event.latency_ms);
            if (r.event.phase == Phase::Pairing)
                CHECK(*r.event.latency_ms == 2 * cs);
            else
                CHECK(*r.event.latency_ms == 2 * cg + 2 * gs);
        }
    }
}

TEST_CASE("latency stays constant over a thousand sessions") {
    auto cfg = fixed_links(7, 30, 12);
    cfg.sessions = 1000;
    auto run = run_scenario(cfg);
    auto auths = run.records(Phase::Authentication);
    REQUIRE(auths.size() == 1000);
    for (auto* r : auths) REQUIRE(r->event.latency_ms == 74u);
}

TEST_CASE("skew inside the window is tolerated, beyond it is rejected") {
    RunConfig cfg;
    cfg.seed = 4;
    cfg.client_skew_ms = {1500};
    auto ok = run_scenario(cfg);
    CHECK(ok.sessions.back().keys_match());

    cfg.client_skew_ms = {-2500};
    auto bad = run_scenario(cfg);
    CHECK(bad.sessions.front().event.first_reject == Reject::StaleTimestamp);
}

TEST_CASE("multiple clients share gateways round-robin") {
    RunConfig cfg;
    cfg.seed = 8;
    cfg.clients = 5;
    cfg.gateways = 2;
    cfg.sessions = 3;
    auto run = run_scenario(cfg);
    for (const auto& r : run.sessions) {
        CHECK(r.event.result == SessionResult::Completed);
        CHECK(r.event.gateway == r.event.client % 2);
        if (r.event.phase == Phase::Authentication) CHECK(r.keys_match());
    }
}

TEST_CASE("a run resumed from its own registry keeps working") {
    RunConfig cfg;
    cfg.seed = 21;
    cfg.clients = 2;
    auto first = run_scenario(cfg);

    RunConfig again;
    again.seed = 22;
    again.registry = first.registry;
    again.run_pairing = false;
    again.sessions = 2;
    auto second = run_scenario(again);
    REQUIRE(second.sessions.size() == 4);
    for (const auto& r : second.sessions) CHECK(r.keys_match());
}

TEST_CASE("adversary script parsing") {
    std::istringstream in(R"(# comment
0 M1 replay 5000
1 m5 tamper 300,301   client=2
0 M6 drop
2 M3 delay 40
3 M2 inject 00ff
4 M4 pass
)");
    auto adv = ScriptedAdversary::parse(in);
    REQUIRE(adv.rules().size() == 6);
    CHECK(describe(adv.rules()[0].action) == "replay 5000");
    CHECK(describe(adv.rules()[1].action) == "tamper 300,301");
    CHECK(adv.rules()[1].client == 2u);
    CHECK(describe(adv.rules()[2].action) == "drop");
    CHECK(describe(adv.rules()[3].action) == "delay 40");
    CHECK(describe(adv.rules()[4].action) == "inject 00ff");

    for (const char* bad : {"0 M1", "x M1 drop", "0 M9 drop", "0 M1 explode", "0 M1 delay", "0 M1 drop 4",
                            "0 M1 tamper a", "0 M1 inject zz", "0 M1 delay 1 2 3"}) {
        std::istringstream b(bad);
        INFO(bad);
        CHECK_THROWS_AS(ScriptedAdversary::parse(b), ConfigError);
    }
}

TEST_CASE("dropping M6 is recovered by the next session") {
    RunConfig cfg;
    cfg.seed = 30;
    cfg.sessions = 2;
    ScriptedAdversary adv({{0, MessageKind::M6, Drop{}, std::nullopt}});
    auto run = run_scenario(cfg, &adv);
    auto auths = run.records(Phase::Authentication);
    CHECK(auths[0]->event.result == SessionResult::TimedOut);
    CHECK(auths[1]->keys_match());
}

TEST_CASE("delay beyond the window makes the frame stale") {
    RunConfig cfg;
    cfg.seed = 31;
    ScriptedAdversary adv({{0, MessageKind::M5, Delay{2500}, std::nullopt}});
    auto run = run_scenario(cfg, &adv);
    auto auth = run.records(Phase::Authentication)[0];
    CHECK(auth->event.first_reject == Reject::StaleTimestamp);
    CHECK(auth->event.rejected_by == Party::Gateway);
}

TEST_CASE("injected garbage is LengthMismatch") {
    RunConfig cfg;
    cfg.seed = 32;
    ScriptedAdversary adv({{0, MessageKind::M3, Inject{Bytes(10, 0xee)}, std::nullopt}});
    auto run = run_scenario(cfg, &adv);
    CHECK(run.records(Phase::Authentication)[0]->event.first_reject == Reject::LengthMismatch);
}

TEST_CASE("tamper outside the frame is a config error") {
    RunConfig cfg;
    cfg.seed = 33;
    ScriptedAdversary adv({{0, MessageKind::M2, Tamper{{288}}, std::nullopt}});
    CHECK_THROWS_AS(run_scenario(cfg, &adv), ConfigError);
}

TEST_CASE("invalid configs are rejected") {
    auto bad = [](auto mutate) {
        RunConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(run_scenario(bad([](RunConfig& c) { c.clients = 0; })), ConfigError);
    CHECK_THROWS_AS(run_scenario(bad([](RunConfig& c) { c.gateways = 0; })), ConfigError);
    CHECK_THROWS_AS(run_scenario(bad([](RunConfig& c) { c.client_gateway.loss_prob = 1.5; })), ConfigError);
    CHECK_THROWS_AS(run_scenario(bad([](RunConfig& c) { c.params.delta_t_ms = 0; })), ConfigError);
    CHECK_THROWS_AS(run_scenario(bad([](RunConfig& c) { c.client_skew_ms = {-2'000'000}; })), ConfigError);
    CHECK_THROWS_AS(DelaySpec::parse("9-3"), ConfigError);
    CHECK_THROWS_AS(DelaySpec::parse("abc"), ConfigError);
    CHECK(DelaySpec::parse("10-40").max_ms == 40);
}

TEST_CASE("transcript survives a JSON-lines round trip") {
    RunConfig cfg;
    cfg.seed = 40;
    cfg.clients = 2;
    cfg.sessions = 3;
    ScriptedAdversary adv({{1, MessageKind::M6, Drop{}, std::nullopt}, {0, MessageKind::M1, Replay{100}, 0u}});
    auto text = run_scenario(cfg, &adv).transcript.to_jsonl();
    std::istringstream in(text);
    CHECK(Transcript::read_jsonl(in).to_jsonl() == text);

    std::istringstream bad(R"({"event":"frame","time":1})");
    CHECK_THROWS_AS(Transcript::read_jsonl(bad), ConfigError);
}

TEST_CASE("batch runs match sequential runs") {
    std::vector<RunConfig> configs;
    for (std::uint64_t s = 0; s < 8; ++s) {
        RunConfig cfg;
        cfg.seed = s;
        cfg.sessions = 3;
        cfg.client_gateway = {DelaySpec{1, 20}, 0.1};
        configs.push_back(cfg);
    }
    auto batch = run_batch(configs, nullptr, 4);
    REQUIRE(batch.size() == configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i)
        CHECK(batch[i].transcript.to_jsonl() == run_scenario(configs[i]).transcript.to_jsonl());
}
