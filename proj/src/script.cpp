#include <charconv>
#include <fstream>
#include <sstream>

#include "lightiot/sim.hpp"

namespace lightiot::sim {
namespace {

template <class T>
T parse_number(const std::string& s, std::size_t lineno, const char* what) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("script line " + std::to_string(lineno) + ": bad " + what + " '" + s + "'");
    return v;
}

std::vector<std::size_t> parse_bit_list(const std::string& s, std::size_t lineno) {
    std::vector<std::size_t> bits;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        bits.push_back(parse_number<std::size_t>(item, lineno, "bit position"));
    if (bits.empty()) throw ConfigError("script line " + std::to_string(lineno) + ": tamper needs bit positions");
    return bits;
}

}  // namespace

std::string describe(const AdversaryAction& a) {
    return std::visit(
        [](const auto& x) -> std::string {
            using A = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<A, Pass>) return "pass";
            if constexpr (std::is_same_v<A, Drop>) return "drop";
            if constexpr (std::is_same_v<A, Delay>) return "delay " + std::to_string(x.ms);
            if constexpr (std::is_same_v<A, Replay>) return "replay " + std::to_string(x.after_ms);
            if constexpr (std::is_same_v<A, Inject>) return "inject " + to_hex(x.frame);
            if constexpr (std::is_same_v<A, Tamper>) {
                std::string out = "tamper ";
                for (std::size_t i = 0; i < x.bits.size(); ++i) out += (i ? "," : "") + std::to_string(x.bits[i]);
                return out;
            }
        },
        a);
}

ScriptedAdversary ScriptedAdversary::parse(std::istream& in) {
    std::vector<ScriptRule> rules;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        ScriptRule rule;
        if (!tok.empty() && tok.back().rfind("client=", 0) == 0) {
            rule.client = parse_number<std::size_t>(tok.back().substr(7), lineno, "client index");
            tok.pop_back();
        }
        if (tok.size() < 3) throw ConfigError("script line " + std::to_string(lineno) + ": expected <session> <kind> <action>");
        rule.session = parse_number<std::size_t>(tok[0], lineno, "session");
        auto kind = wire::parse_kind(tok[1]);
        if (!kind) throw ConfigError("script line " + std::to_string(lineno) + ": unknown message kind '" + tok[1] + "'");
        rule.kind = *kind;

        const std::string& act = tok[2];
        const bool has_param = tok.size() == 4;
        if (tok.size() > 4) throw ConfigError("script line " + std::to_string(lineno) + ": too many fields");
        auto need_param = [&] {
            if (!has_param) throw ConfigError("script line " + std::to_string(lineno) + ": '" + act + "' needs a parameter");
            return tok[3];
        };
        if (act == "pass" || act == "drop") {
            if (has_param) throw ConfigError("script line " + std::to_string(lineno) + ": '" + act + "' takes no parameter");
            rule.action = act == "pass" ? AdversaryAction{Pass{}} : AdversaryAction{Drop{}};
        } else if (act == "delay") {
            rule.action = Delay{parse_number<std::uint64_t>(need_param(), lineno, "delay")};
        } else if (act == "replay") {
            rule.action = Replay{parse_number<std::uint64_t>(need_param(), lineno, "staleness")};
        } else if (act == "tamper") {
            rule.action = Tamper{parse_bit_list(need_param(), lineno)};
        } else if (act == "inject") {
            auto raw = from_hex(need_param());
            if (!raw || raw->empty()) throw ConfigError("script line " + std::to_string(lineno) + ": bad inject hex");
            rule.action = Inject{*raw};
        } else {
            throw ConfigError("script line " + std::to_string(lineno) + ": unknown action '" + act + "'");
        }
        rules.push_back(std::move(rule));
    }
    return ScriptedAdversary(std::move(rules));
}

ScriptedAdversary ScriptedAdversary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read adversary script " + path);
    return parse(in);
}

AdversaryAction ScriptedAdversary::intercept(const Envelope& env) {
    for (const auto& r : rules_) {
        if (r.session != env.session || r.kind != env.kind) continue;
        if (r.client && *r.client != env.client) continue;
        return r.action;
    }
    return Pass{};
}

}  // namespace lightiot::sim
