#include "lightiot/registry.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace lightiot {
namespace {

constexpr int kFormatVersion = 1;

nlohmann::ordered_json hex_or_null(const std::optional<IdBits>& v) {
    return v ? nlohmann::ordered_json(to_hex(*v)) : nlohmann::ordered_json(nullptr);
}

IdBits required_id(const nlohmann::json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j[key].is_string())
        throw RegistryError(RegistryErrc::Malformed, "registry line " + std::to_string(line) + ": missing " + key);
    auto v = parse_fixed_hex<IdBits>(j[key].get<std::string>());
    if (!v) throw RegistryError(RegistryErrc::Malformed, "registry line " + std::to_string(line) + ": bad hex in " + key);
    return *v;
}

std::optional<IdBits> optional_id(const nlohmann::json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return required_id(j, key, line);
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::Client ? "client" : "gateway"; }
std::string_view to_string(Slot s) { return s == Slot::Current ? "current" : "previous"; }

void CredentialRegistry::provision(Role role, const IdBits& real_id, const IdBits& secret, const IdBits& pseudo,
                                   std::optional<IdBits> nonce) {
    if (locate(role, real_id)) throw RegistryError(RegistryErrc::DuplicateIdentity, "identity already provisioned");
    if (pseudo == real_id)
        throw RegistryError(RegistryErrc::InvariantViolation, "pseudo-identity equals the real identity");
    tuples_.push_back(CredentialTuple{role, real_id, secret, pseudo, std::nullopt, nonce, std::nullopt});
}

CredentialTuple* CredentialRegistry::locate(Role role, const IdBits& real_id) {
    for (auto& t : tuples_)
        if (t.role == role && t.real_id == real_id) return &t;
    return nullptr;
}

std::optional<CredentialTuple> CredentialRegistry::find(Role role, const IdBits& real_id) const {
    for (const auto& t : tuples_)
        if (t.role == role && t.real_id == real_id) return t;
    return std::nullopt;
}

std::optional<CredentialRegistry::PseudoMatch> CredentialRegistry::find_by_pseudo(Role role,
                                                                                   const IdBits& pseudo) const {
    for (const auto& t : tuples_) {
        if (t.role != role) continue;
        if (t.pseudo_current == pseudo) return PseudoMatch{t, Slot::Current};
        if (t.pseudo_previous == pseudo) return PseudoMatch{t, Slot::Previous};
    }
    return std::nullopt;
}

std::optional<CredentialRegistry::TrialMatch> CredentialRegistry::find_by_trial_unmask(
    Role role, ByteView masked, wire::MessageKind kind, const TrialCheck& check, crypto::OpTally* tally) const {
    if (masked.size() != wire::frame_bytes(kind)) return std::nullopt;
    for (const auto& t : tuples_) {
        if (t.role != role) continue;
        for (Slot slot : {Slot::Current, Slot::Previous}) {
            auto key = t.pseudo(slot);
            if (!key) continue;
            Bytes plain = crypto::mask(masked, key->view(), tally);
            if (check(t, slot, plain)) return TrialMatch{t, slot, std::move(plain)};
        }
    }
    return std::nullopt;
}

void CredentialRegistry::stage_and_commit_pseudo(Role role, const IdBits& real_id, const IdBits& new_pseudo,
                                                 std::optional<IdBits> new_nonce, Slot anchor) {
    CredentialTuple* t = locate(role, real_id);
    if (!t) throw RegistryError(RegistryErrc::UnknownIdentity, "no tuple for identity");
    if (new_pseudo == t->pseudo_current || new_pseudo == real_id || new_pseudo == t->pseudo_previous)
        throw RegistryError(RegistryErrc::InvariantViolation, "pseudo-identity must change");
    if (anchor == Slot::Previous && t->pseudo_previous) {
        // The principal still holds `previous`; keep it as the fallback.
    } else {
        t->pseudo_previous = t->pseudo_current;
        t->nonce_previous = t->nonce_current;
    }
    t->pseudo_current = new_pseudo;
    t->nonce_current = new_nonce;
}

std::vector<CredentialTuple> CredentialRegistry::tuples(Role role) const {
    std::vector<CredentialTuple> out;
    for (const auto& t : tuples_)
        if (t.role == role) out.push_back(t);
    return out;
}

void CredentialRegistry::write_jsonl(std::ostream& out) const {
    for (const auto& t : tuples_) {
        nlohmann::ordered_json j;
        j["v"] = kFormatVersion;
        j["role"] = to_string(t.role);
        j["real_id"] = to_hex(t.real_id);
        j["secret"] = to_hex(t.secret);
        j["pseudo_current"] = to_hex(t.pseudo_current);
        j["pseudo_previous"] = hex_or_null(t.pseudo_previous);
        j["nonce_current"] = hex_or_null(t.nonce_current);
        j["nonce_previous"] = hex_or_null(t.nonce_previous);
        out << j.dump() << '\n';
    }
}

CredentialRegistry CredentialRegistry::read_jsonl(std::istream& in) {
    CredentialRegistry reg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw RegistryError(RegistryErrc::Malformed, "registry line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.value("v", 0) != kFormatVersion)
            throw RegistryError(RegistryErrc::Malformed, "registry line " + std::to_string(lineno) + ": unsupported version");
        const std::string role = j.value("role", "");
        if (role != "client" && role != "gateway")
            throw RegistryError(RegistryErrc::Malformed, "registry line " + std::to_string(lineno) + ": bad role");

        CredentialTuple t;
        t.role = role == "client" ? Role::Client : Role::Gateway;
        t.real_id = required_id(j, "real_id", lineno);
        t.secret = required_id(j, "secret", lineno);
        t.pseudo_current = required_id(j, "pseudo_current", lineno);
        t.pseudo_previous = optional_id(j, "pseudo_previous", lineno);
        t.nonce_current = optional_id(j, "nonce_current", lineno);
        t.nonce_previous = optional_id(j, "nonce_previous", lineno);
        if (reg.locate(t.role, t.real_id)) throw RegistryError(RegistryErrc::DuplicateIdentity, "duplicate identity in file");
        reg.tuples_.push_back(t);
    }
    return reg;
}

void CredentialRegistry::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RegistryError(RegistryErrc::Malformed, "cannot write " + path);
    write_jsonl(out);
}

CredentialRegistry CredentialRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RegistryError(RegistryErrc::Malformed, "cannot read " + path);
    return read_jsonl(in);
}

}  // namespace lightiot
