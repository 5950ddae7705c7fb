#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lightiot/sim.hpp"

namespace lightiot::sim {
namespace {

using nlohmann::ordered_json;

ordered_json tally_json(const crypto::OpTally& t) {
    return {{"protocol_hashes", t.protocol_hashes}, {"pad_hashes", t.pad_hashes}, {"xor_ops", t.xor_ops}};
}

crypto::OpTally tally_from(const nlohmann::json& j) {
    return {j.at("protocol_hashes").get<std::uint64_t>(), j.at("pad_hashes").get<std::uint64_t>(),
            j.at("xor_ops").get<std::uint64_t>()};
}

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& all, const char* what) {
    for (E e : all)
        if (to_string(e) == s) return e;
    throw ConfigError(std::string("transcript: unknown ") + what + " '" + s + "'");
}

constexpr std::array kParties = {Party::Client, Party::Gateway, Party::Server};
constexpr std::array kPhases = {Phase::Pairing, Phase::Authentication};
constexpr std::array kResults = {SessionResult::Completed, SessionResult::Rejected, SessionResult::TimedOut};
constexpr std::array kRejects = {Reject::StaleTimestamp, Reject::UnknownClient,        Reject::UnknownGateway,
                                 Reject::BadAuthenticator, Reject::BadServerAuthenticator, Reject::KeyConfirmFailed,
                                 Reject::NotPaired,       Reject::NoPendingRun,           Reject::LengthMismatch};

}  // namespace

void Transcript::write_jsonl(std::ostream& out) const {
    for (const auto& f : frames) {
        ordered_json j;
        j["event"] = "frame";
        j["time"] = f.time;
        j["sent_at"] = f.sent_at;
        j["link"] = to_string(f.link());
        j["from"] = to_string(f.from);
        j["to"] = to_string(f.to);
        j["kind"] = wire::to_string(f.kind);
        j["client"] = f.client;
        j["gateway"] = f.gateway;
        j["session"] = f.session;
        j["origin"] = f.origin;
        j["verdict"] = f.verdict;
        j["bits"] = f.bits();
        j["hex"] = f.hex;
        j["receiver_ops"] = tally_json(f.receiver_tally);
        out << j.dump() << '\n';
    }
    for (const auto& s : sessions) {
        ordered_json j;
        j["event"] = "session";
        j["client"] = s.client;
        j["gateway"] = s.gateway;
        j["session"] = s.session;
        j["phase"] = to_string(s.phase);
        j["result"] = to_string(s.result);
        j["reject"] = s.first_reject ? ordered_json(to_string(*s.first_reject)) : ordered_json(nullptr);
        j["rejected_by"] = s.rejected_by ? ordered_json(to_string(*s.rejected_by)) : ordered_json(nullptr);
        j["started_at"] = s.started_at;
        j["ended_at"] = s.ended_at;
        j["latency_ms"] = s.latency_ms ? ordered_json(*s.latency_ms) : ordered_json(nullptr);
        out << j.dump() << '\n';
    }
    for (const auto& c : counters) {
        ordered_json j;
        j["event"] = "counters";
        j["party"] = to_string(c.party);
        j["index"] = c.index;
        j["pairing"] = tally_json(c.tally.pairing);
        j["authentication"] = tally_json(c.tally.authentication);
        out << j.dump() << '\n';
    }
}

std::string Transcript::to_jsonl() const {
    std::ostringstream out;
    write_jsonl(out);
    return out.str();
}

Transcript Transcript::read_jsonl(std::istream& in) {
    Transcript t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            const auto event = j.at("event").get<std::string>();
            if (event == "frame") {
                FrameEvent f;
                f.time = j.at("time");
                f.sent_at = j.at("sent_at");
                auto kind = wire::parse_kind(j.at("kind").get<std::string>());
                if (!kind) throw ConfigError("transcript: unknown kind");
                f.kind = *kind;
                f.from = parse_enum(j.at("from").get<std::string>(), kParties, "party");
                f.to = parse_enum(j.at("to").get<std::string>(), kParties, "party");
                f.client = j.at("client");
                f.gateway = j.at("gateway");
                f.session = j.at("session");
                f.origin = j.at("origin");
                f.verdict = j.at("verdict");
                f.hex = j.at("hex");
                f.receiver_tally = tally_from(j.at("receiver_ops"));
                t.frames.push_back(std::move(f));
            } else if (event == "session") {
                SessionEvent s;
                s.client = j.at("client");
                s.gateway = j.at("gateway");
                s.session = j.at("session");
                s.phase = parse_enum(j.at("phase").get<std::string>(), kPhases, "phase");
                s.result = parse_enum(j.at("result").get<std::string>(), kResults, "result");
                if (!j.at("reject").is_null())
                    s.first_reject = parse_enum(j.at("reject").get<std::string>(), kRejects, "reject");
                if (!j.at("rejected_by").is_null())
                    s.rejected_by = parse_enum(j.at("rejected_by").get<std::string>(), kParties, "party");
                s.started_at = j.at("started_at");
                s.ended_at = j.at("ended_at");
                if (!j.at("latency_ms").is_null()) s.latency_ms = j.at("latency_ms").get<std::uint64_t>();
                t.sessions.push_back(s);
            } else if (event == "counters") {
                CounterEvent c;
                c.party = parse_enum(j.at("party").get<std::string>(), kParties, "party");
                c.index = j.at("index");
                c.tally.pairing = tally_from(j.at("pairing"));
                c.tally.authentication = tally_from(j.at("authentication"));
                t.counters.push_back(c);
            } else {
                throw ConfigError("transcript: unknown event '" + event + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("transcript line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("transcript line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return t;
}

}  // namespace lightiot::sim
