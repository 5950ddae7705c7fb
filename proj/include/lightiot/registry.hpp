#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lightiot/bits.hpp"
#include "lightiot/crypto.hpp"
#include "lightiot/wire.hpp"

namespace lightiot {

enum class Role { Client, Gateway };
enum class Slot { Current, Previous };

std::string_view to_string(Role r);
std::string_view to_string(Slot s);

/// One principal as the server knows it. Each pseudo-identity slot carries
/// the pre-shared nonce derived alongside it (absent for a client that has
/// never paired).
struct CredentialTuple {
    Role role = Role::Client;
    IdBits real_id;
    IdBits secret;
    IdBits pseudo_current;
    std::optional<IdBits> pseudo_previous;
    std::optional<IdBits> nonce_current;
    std::optional<IdBits> nonce_previous;

    std::optional<IdBits> pseudo(Slot s) const {
        return s == Slot::Current ? std::optional<IdBits>(pseudo_current) : pseudo_previous;
    }
    std::optional<IdBits> nonce(Slot s) const { return s == Slot::Current ? nonce_current : nonce_previous; }

    friend bool operator==(const CredentialTuple&, const CredentialTuple&) = default;
};

enum class RegistryErrc { DuplicateIdentity, UnknownIdentity, InvariantViolation, Malformed };

class RegistryError : public std::runtime_error {
public:
    RegistryError(RegistryErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    RegistryErrc code() const { return code_; }

private:
    RegistryErrc code_;
};

/// Server-side credential store with one-deep pseudo-identity history.
class CredentialRegistry {
public:
    struct PseudoMatch {
        CredentialTuple tuple;
        Slot slot;
    };
    struct TrialMatch {
        CredentialTuple tuple;
        Slot slot;
        Bytes unmasked;
    };
    /// Kind-specific acceptance test for a trial-unmasked frame.
    using TrialCheck = std::function<bool(const CredentialTuple&, Slot, ByteView unmasked)>;

    void provision(Role role, const IdBits& real_id, const IdBits& secret, const IdBits& pseudo,
                   std::optional<IdBits> nonce = std::nullopt);

    std::optional<CredentialTuple> find(Role role, const IdBits& real_id) const;
    std::optional<PseudoMatch> find_by_pseudo(Role role, const IdBits& pseudo) const;

    /// Tries every tuple of `role`, current pseudo then previous, as the
    /// mask key and returns the first candidate `check` accepts.
    std::optional<TrialMatch> find_by_trial_unmask(Role role, ByteView masked, wire::MessageKind kind,
                                                   const TrialCheck& check, crypto::OpTally* tally = nullptr) const;

    /// Rotates the pseudo-identity. With anchor == Current the old current
    /// becomes previous; with anchor == Previous the retained previous value
    /// (the one the principal still holds) stays and current is replaced.
    void stage_and_commit_pseudo(Role role, const IdBits& real_id, const IdBits& new_pseudo,
                                 std::optional<IdBits> new_nonce = std::nullopt, Slot anchor = Slot::Current);

    std::vector<CredentialTuple> tuples(Role role) const;
    const std::vector<CredentialTuple>& all() const { return tuples_; }
    std::size_t size() const { return tuples_.size(); }

    void write_jsonl(std::ostream& out) const;
    static CredentialRegistry read_jsonl(std::istream& in);
    void save(const std::string& path) const;
    static CredentialRegistry load(const std::string& path);

    friend bool operator==(const CredentialRegistry&, const CredentialRegistry&) = default;

private:
    CredentialTuple* locate(Role role, const IdBits& real_id);

    std::vector<CredentialTuple> tuples_;
};

}  // namespace lightiot
