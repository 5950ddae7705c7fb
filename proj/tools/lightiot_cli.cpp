// lightiot: provision credentials, run simulated handshakes and attacks, print overhead reports.
//
// Exit codes: 0 success, 1 protocol-property violation, 2 usage or config error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lightiot/metrics.hpp"
#include "lightiot/scenarios.hpp"
#include "lightiot/sim.hpp"

namespace {

using namespace lightiot;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;

struct NetOptions {
    std::uint32_t delta_t = protocol::kDefaultDeltaTMs;
    std::string delay_cg = "5";
    std::string delay_gs = "20";
    std::string delay_cs = "25";
    double loss_cg = 0.0;
    double loss_gs = 0.0;
    double loss_cs = 0.0;
    std::optional<std::uint32_t> timeout;

    void attach(CLI::App* app) {
        app->add_option("--delta-t", delta_t, "Freshness window in ms")->capture_default_str();
        app->add_option("--delay-cg", delay_cg, "Client-gateway delay in ms, N or MIN-MAX")->capture_default_str();
        app->add_option("--delay-gs", delay_gs, "Gateway-server delay in ms, N or MIN-MAX")->capture_default_str();
        app->add_option("--delay-cs", delay_cs, "Client-server delay in ms, N or MIN-MAX")->capture_default_str();
        app->add_option("--loss-cg", loss_cg, "Client-gateway loss probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--loss-gs", loss_gs, "Gateway-server loss probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--loss-cs", loss_cs, "Client-server loss probability")->check(CLI::Range(0.0, 1.0));
        app->add_option("--timeout", timeout, "Handshake timeout in ms (default 10 x delta-t)");
    }

    void apply(sim::RunConfig& cfg) const {
        cfg.params.delta_t_ms = delta_t;
        cfg.client_gateway = {sim::DelaySpec::parse(delay_cg), loss_cg};
        cfg.gateway_server = {sim::DelaySpec::parse(delay_gs), loss_gs};
        cfg.client_server = {sim::DelaySpec::parse(delay_cs), loss_cs};
        cfg.timeout_ms = timeout;
    }
};

struct Output {
    std::string format = "text";
    std::string report_path;
    std::string transcript_path;

    void attach(CLI::App* app, bool with_transcript = true) {
        app->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
        app->add_option("--report", report_path, "Write the report here instead of stdout");
        if (with_transcript) app->add_option("--transcript", transcript_path, "Write the JSON-lines transcript here");
    }

    void emit(const std::string& text) const {
        if (report_path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) throw sim::ConfigError("cannot write " + report_path);
        out << text;
    }

    void write_transcript(const sim::Transcript& t) const {
        if (transcript_path.empty()) return;
        std::ofstream out(transcript_path, std::ios::trunc);
        if (!out) throw sim::ConfigError("cannot write " + transcript_path);
        t.write_jsonl(out);
    }
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

/// Handshake outcomes and latency; used in run reports.
ordered_json session_summary(const sim::RunResult& run) {
    std::uint64_t mismatched = 0, completed = 0;
    std::map<std::string, std::uint64_t> rejects;
    std::optional<std::uint64_t> lat_min, lat_max;
    std::uint64_t lat_sum = 0, lat_n = 0;
    for (const auto& r : run.sessions) {
        if (r.event.first_reject) ++rejects[std::string(to_string(*r.event.first_reject))];
        if (r.event.result != sim::SessionResult::Completed) continue;
        ++completed;
        if (r.event.phase == protocol::Phase::Authentication && !r.keys_match()) ++mismatched;
        if (r.event.phase == protocol::Phase::Authentication && r.event.latency_ms) {
            const auto l = *r.event.latency_ms;
            lat_min = lat_min ? std::min(*lat_min, l) : l;
            lat_max = lat_max ? std::max(*lat_max, l) : l;
            lat_sum += l;
            ++lat_n;
        }
    }
    ordered_json rj = ordered_json::object();
    for (const auto& [k, v] : rejects) rj[k] = v;
    auto opt = [](const std::optional<std::uint64_t>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    return {{"handshakes", run.sessions.size()},
            {"completed", completed},
            {"key_mismatches", mismatched},
            {"first_rejects", rj},
            {"auth_latency_ms",
             {{"min", opt(lat_min)},
              {"max", opt(lat_max)},
              {"mean", lat_n ? ordered_json(static_cast<double>(lat_sum) / static_cast<double>(lat_n)) : ordered_json(nullptr)}}}};
}

/// Honest frames with the wrong length or completed handshakes whose keys differ.
bool violates_properties(const sim::RunResult& run) {
    for (const auto& f : run.transcript.frames)
        if (f.origin == "honest" && f.bits() != wire::frame_bits(f.kind)) return true;
    for (const auto& r : run.sessions)
        if (r.event.phase == protocol::Phase::Authentication && r.client_key && !r.keys_match()) return true;
    return false;
}

std::string render_run(const std::vector<sim::RunResult>& runs, const std::vector<std::uint64_t>& seeds,
                       const std::string& format) {
    if (format == "json") {
        ordered_json all = ordered_json::array();
        for (std::size_t k = 0; k < runs.size(); ++k) {
            ordered_json j;
            j["seed"] = seeds[k];
            j["sessions"] = session_summary(runs[k]);
            j["overhead"] = metrics::to_json(metrics::snapshot(runs[k].transcript));
            all.push_back(j);
        }
        return dump(runs.size() == 1 ? all[0] : all);
    }
    std::ostringstream out;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto s = session_summary(runs[k]);
        out << "seed " << seeds[k] << ": " << s["completed"] << "/" << s["handshakes"] << " handshakes completed, "
            << s["key_mismatches"] << " key mismatches\n";
        out << metrics::render_text(metrics::snapshot(runs[k].transcript));
        if (k + 1 < runs.size()) out << "\n";
    }
    return out.str();
}

CredentialRegistry load_registry(const std::string& path) {
    try {
        return CredentialRegistry::load(path);
    } catch (const RegistryError& e) {
        throw sim::ConfigError(e.what());
    }
}

// The config file belongs to the root app; CLI11 only reads it before the
// subcommand's required options are checked if it comes first.
std::vector<std::string> config_first(int argc, char** argv) {
    std::vector<std::string> front, rest;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            front.push_back(a);
            front.push_back(argv[++i]);
        } else if (a.rfind("--config=", 0) == 0) {
            front.push_back(a);
        } else {
            rest.push_back(a);
        }
    }
    front.insert(front.end(), rest.begin(), rest.end());
    // CLI11 takes the vector form in reverse order.
    return {front.rbegin(), front.rend()};
}

wire::MessageKind parse_message(const std::string& s) {
    auto k = wire::parse_kind(s);
    if (!k) throw sim::ConfigError("unknown message kind '" + s + "'");
    return *k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LightIoT protocol simulator"};
    app.set_config("--config", "", "Read options from a key=value file");
    app.require_subcommand(1);

    // provision
    std::size_t n_clients = 1, n_gateways = 1, n_sessions = 1;
    std::optional<std::uint64_t> seed;
    std::string registry_path;
    auto* provision = app.add_subcommand("provision", "Create a registry with fresh credentials");
    provision->add_option("--clients", n_clients)->check(CLI::PositiveNumber)->capture_default_str();
    provision->add_option("--gateways", n_gateways)->check(CLI::PositiveNumber)->capture_default_str();
    provision->add_option("--seed", seed)->required();
    provision->add_option("--registry", registry_path, "Registry file to create")->envname("LIGHTIOT_REGISTRY")->required();

    // pair / auth
    NetOptions net;
    Output output;
    auto* pair = app.add_subcommand("pair", "Pair every unpaired client in a registry and save it");
    pair->add_option("--registry", registry_path)->envname("LIGHTIOT_REGISTRY")->required();
    pair->add_option("--seed", seed)->required();
    net.attach(pair);
    output.attach(pair);

    auto* auth = app.add_subcommand("auth", "Run authentication sessions for a paired registry and save it");
    auth->add_option("--registry", registry_path)->envname("LIGHTIOT_REGISTRY")->required();
    auth->add_option("--seed", seed)->required();
    auth->add_option("--sessions", n_sessions)->check(CLI::PositiveNumber)->capture_default_str();
    net.attach(auth);
    output.attach(auth);

    // simulate
    std::string script_path;
    unsigned batch = 1, threads = 1;
    auto* simulate = app.add_subcommand("simulate", "Provision, pair and authenticate in one simulated run");
    simulate->add_option("--clients", n_clients)->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--gateways", n_gateways)->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--sessions", n_sessions)->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--seed", seed)->required();
    simulate->add_option("--script", script_path, "Adversary script")->check(CLI::ExistingFile);
    simulate->add_option("--batch", batch, "Independent runs with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
    simulate->add_option("--threads", threads, "Worker threads for --batch")->check(CLI::PositiveNumber);
    net.attach(simulate);
    output.attach(simulate);

    // attack
    std::string scenario, message = "M1";
    std::uint64_t staleness = 5000;
    std::size_t bit = 0;
    auto* attack = app.add_subcommand("attack", "Run one adversary scenario and check its expected outcome");
    attack->add_option("--scenario", scenario)->required()->check(CLI::IsMember({"replay", "tamper", "block", "trace"}));
    attack->add_option("--message", message, "Target message M1..M6")->capture_default_str();
    attack->add_option("--staleness", staleness, "Replay delay in ms")->capture_default_str();
    attack->add_option("--bit", bit, "Bit to flip for tamper")->capture_default_str();
    attack->add_option("--sessions", n_sessions, "Sessions for trace")->check(CLI::PositiveNumber);
    attack->add_option("--seed", seed)->required();
    net.attach(attack);
    output.attach(attack);

    // report
    std::string transcript_in;
    auto* report = app.add_subcommand("report", "Overhead report for a saved transcript");
    report->add_option("--transcript", transcript_in, "JSON-lines transcript")->required()->check(CLI::ExistingFile);
    Output report_out;
    report_out.attach(report, false);

    try {
        app.parse(config_first(argc, argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*provision) {
            sim::RunConfig cfg;
            cfg.clients = n_clients;
            cfg.gateways = n_gateways;
            cfg.seed = *seed;
            cfg.sessions = 0;
            cfg.run_pairing = false;
            auto run = sim::run_scenario(cfg);
            run.registry.save(registry_path);
            std::cout << "provisioned " << n_clients << " clients and " << n_gateways << " gateways into "
                      << registry_path << "\n";
            return kOk;
        }

        if (*pair || *auth) {
            sim::RunConfig cfg;
            cfg.seed = *seed;
            cfg.registry = load_registry(registry_path);
            cfg.run_pairing = static_cast<bool>(*pair);
            cfg.sessions = *pair ? 0 : n_sessions;
            net.apply(cfg);
            auto run = sim::run_scenario(cfg);
            output.write_transcript(run.transcript);
            run.registry.save(registry_path);
            output.emit(render_run({run}, {*seed}, output.format));
            bool all_done = true;
            for (const auto& r : run.sessions) all_done &= r.event.result == sim::SessionResult::Completed;
            return violates_properties(run) ? kViolation : (all_done ? kOk : kViolation);
        }

        if (*simulate) {
            sim::RunConfig cfg;
            cfg.clients = n_clients;
            cfg.gateways = n_gateways;
            cfg.sessions = n_sessions;
            net.apply(cfg);
            std::optional<sim::ScriptedAdversary> script;
            if (!script_path.empty()) script = sim::ScriptedAdversary::load(script_path);

            std::vector<sim::RunConfig> configs;
            std::vector<std::uint64_t> seeds;
            for (unsigned b = 0; b < batch; ++b) {
                cfg.seed = *seed + b;
                cfg.validate();
                configs.push_back(cfg);
                seeds.push_back(cfg.seed);
            }
            sim::InterceptorFactory factory;
            if (script) factory = [&] { return std::make_unique<sim::ScriptedAdversary>(*script); };
            auto runs = sim::run_batch(configs, factory, threads);

            if (runs.size() == 1) output.write_transcript(runs[0].transcript);
            output.emit(render_run(runs, seeds, output.format));

            // Without an adversary or loss every handshake has to complete.
            const bool benign = !script && net.loss_cg == 0.0 && net.loss_gs == 0.0 && net.loss_cs == 0.0;
            for (const auto& run : runs) {
                if (violates_properties(run)) return kViolation;
                if (benign)
                    for (const auto& r : run.sessions)
                        if (r.event.result != sim::SessionResult::Completed) return kViolation;
            }
            return kOk;
        }

        if (*attack) {
            auto base = scenarios::base_config(*seed);
            net.apply(base);
            base.validate();
            const auto kind = parse_message(message);
            ordered_json j;
            j["scenario"] = scenario;
            j["seed"] = *seed;
            j["delta_t_ms"] = net.delta_t;
            bool pass = false;
            const sim::Transcript* transcript = nullptr;
            std::optional<scenarios::ReplayReport> rep_replay;
            std::optional<scenarios::TamperReport> rep_tamper;
            std::optional<scenarios::BlockReport> rep_block;
            std::optional<scenarios::TraceReport> rep_trace;

            if (scenario == "replay") {
                rep_replay = scenarios::replay(kind, staleness, base);
                const bool must_reject = staleness >= net.delta_t;
                j["message"] = wire::to_string(kind);
                j["staleness_ms"] = staleness;
                j["verdict"] = rep_replay->verdict;
                j["expected"] = must_reject ? "rejected" : "accepted inside the freshness window";
                pass = must_reject ? rep_replay->rejected() : true;
                if (!must_reject && !rep_replay->rejected()) j["note"] = "within-window replay accepted; no nonce cache is kept";
                transcript = &rep_replay->run.transcript;
            } else if (scenario == "tamper") {
                if (bit >= wire::frame_bits(kind)) throw sim::ConfigError("--bit is outside the frame");
                rep_tamper = scenarios::tamper(kind, bit, base);
                j["message"] = wire::to_string(kind);
                j["bit"] = bit;
                j["recipient_verdict"] = rep_tamper->recipient_verdict;
                j["first_reject"] = rep_tamper->first_reject ? ordered_json(to_string(*rep_tamper->first_reject)) : ordered_json(nullptr);
                j["rejected_by"] = rep_tamper->rejected_by ? ordered_json(sim::to_string(*rep_tamper->rejected_by)) : ordered_json(nullptr);
                j["handshake_completed"] = rep_tamper->completed;
                j["key_mismatch"] = rep_tamper->mismatched;
                pass = !rep_tamper->completed && !rep_tamper->mismatched;
                transcript = &rep_tamper->run.transcript;
            } else if (scenario == "block") {
                if (kind != wire::MessageKind::M2 && kind != wire::MessageKind::M5 && kind != wire::MessageKind::M6)
                    throw sim::ConfigError("block applies to M2, M5 or M6");
                rep_block = scenarios::block(kind, base);
                j["message"] = wire::to_string(kind);
                j["blocked_handshake_failed"] = rep_block->blocked_failed;
                j["recovered"] = rep_block->recovered;
                pass = rep_block->blocked_failed && rep_block->recovered;
                transcript = &rep_block->run.transcript;
            } else {
                rep_trace = scenarios::trace(n_sessions, base);
                j["sessions"] = rep_trace->sessions;
                j["completed"] = rep_trace->completed;
                j["identity_leaks"] = rep_trace->identity_leaks;
                j["pseudo_repeats"] = rep_trace->pseudo_repeats;
                pass = rep_trace->passed();
                transcript = &rep_trace->run.transcript;
            }
            j["pass"] = pass;
            output.write_transcript(*transcript);

            if (output.format == "json") {
                output.emit(dump(j));
            } else {
                std::ostringstream out;
                for (const auto& [k, v] : j.items()) out << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
                output.emit(out.str());
            }
            return pass ? kOk : kViolation;
        }

        if (*report) {
            std::ifstream in(transcript_in);
            auto t = sim::Transcript::read_jsonl(in);
            auto r = metrics::snapshot(t);
            report_out.emit(report_out.format == "json" ? dump(metrics::to_json(r)) : metrics::render_text(r));
            return kOk;
        }
    } catch (const sim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const RegistryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
