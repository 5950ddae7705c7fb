#include <catch_amalgamated.hpp>

#include <sstream>

#include "lightiot/metrics.hpp"

using namespace lightiot;
using namespace lightiot::metrics;

namespace {

OverheadReport honest(std::size_t sessions, std::uint64_t seed = 7) {
    sim::RunConfig cfg;
    cfg.seed = seed;
    cfg.sessions = sessions;
    return snapshot(sim::run_scenario(cfg).transcript);
}

}  // namespace

TEST_CASE("one honest handshake: 6 messages, 3424 bits, 1088 from the client") {
    auto r = honest(1);
    CHECK(r.total_frames == 6);
    CHECK(r.total_bits == 3424);
    CHECK(r.client_bits == 1088);
    for (const auto& k : r.kinds) {
        CHECK(k.frames == 1);
        CHECK(k.exact);
        CHECK(k.bits == k.expected_bits_per_frame);
    }
    CHECK(r.role(Party::Server).bits_sent() == 288 + 800);
    CHECK(r.role(Party::Gateway).bits_sent() == 672 + 576);
}

TEST_CASE("authentication hash counts per handshake") {
    auto r = honest(1);
    REQUIRE(r.computation.size() == 4);
    CHECK(r.computation[2].role == "server");
    CHECK(r.computation[2].hashes == 8.0);
    CHECK(r.computation[2].cause.empty());
    CHECK(r.computation[0].hashes == 6.0);
    CHECK(r.computation[1].hashes == 6.0);
    CHECK(r.computation[3].hashes == 20.0);
    for (const auto& c : r.computation) {
        CHECK(std::abs(*c.hash_delta()) <= (c.role == "total" ? 3.0 : 2.0));
        if (*c.hash_delta() != 0.0) CHECK_FALSE(c.cause.empty());
    }
}

TEST_CASE("counters add up across sessions") {
    auto one = honest(1);
    for (std::size_t n : {2u, 5u, 17u}) {
        auto many = honest(n);
        for (auto p : {Party::Client, Party::Gateway, Party::Server}) {
            const auto& a = one.role(p);
            const auto& b = many.role(p);
            CHECK(b.pairing.ops == a.pairing.ops);
            CHECK(b.authentication.ops.protocol_hashes == n * a.authentication.ops.protocol_hashes);
            CHECK(b.authentication.ops.xor_ops == n * a.authentication.ops.xor_ops);
            CHECK(b.authentication.ops.pad_hashes == n * a.authentication.ops.pad_hashes);
            CHECK(b.authentication.bits_sent == n * a.authentication.bits_sent);
        }
        CHECK(many.computation[2].hashes == 8.0);
    }
}

TEST_CASE("replayed copies are audited, not counted as sends") {
    sim::RunConfig cfg;
    cfg.seed = 3;
    cfg.timeout_ms = 20'000;
    sim::ScriptedAdversary stale({{0, MessageKind::M3, sim::Replay{5000}, std::nullopt},
                                  {0, MessageKind::M1, sim::Replay{9000}, std::nullopt}});
    auto r = snapshot(sim::run_scenario(cfg, &stale).transcript);
    CHECK(r.total_bits == 3424);
    CHECK(r.replay.replays_delivered == 2);
    CHECK(r.replay.replays_accepted == 0);

    // A fresh M3 copy is accepted and the gateway answers it with a second M4, M5, M6.
    sim::ScriptedAdversary fresh({{0, MessageKind::M3, sim::Replay{500}, std::nullopt}});
    r = snapshot(sim::run_scenario(cfg, &fresh).transcript);
    CHECK(r.replay.replays_accepted == 1);
    CHECK(r.total_bits == 3424 + 672 + 800 + 576);
}

TEST_CASE("report from a reloaded transcript is identical") {
    sim::RunConfig cfg;
    cfg.seed = 11;
    cfg.clients = 2;
    cfg.sessions = 3;
    auto t = sim::run_scenario(cfg).transcript;
    std::istringstream in(t.to_jsonl());
    auto back = sim::Transcript::read_jsonl(in);
    CHECK(to_json(snapshot(back)).dump() == to_json(snapshot(t)).dump());
    CHECK(render_text(snapshot(back)) == render_text(snapshot(t)));
}

TEST_CASE("JSON report shape") {
    auto j = to_json(honest(1));
    CHECK(j["communication"]["total_bits"] == 3424);
    CHECK(j["communication"]["client_bits"] == 1088);
    CHECK(j["messages"].size() == 6);
    CHECK(j["computation"][2]["hash_delta"] == 0.0);
    CHECK(j["computation"][0]["cause"].is_string());
    CHECK(j["computation"][2]["cause"].is_null());
}

TEST_CASE("no completed handshake gives n/a comparisons") {
    sim::RunConfig cfg;
    cfg.seed = 1;
    cfg.client_server.loss_prob = 1.0;
    auto r = snapshot(sim::run_scenario(cfg).transcript);
    CHECK_FALSE(r.computation[0].hashes.has_value());
    CHECK(render_text(r).find("n/a") != std::string::npos);
}
