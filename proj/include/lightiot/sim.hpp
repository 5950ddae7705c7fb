#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lightiot/protocol.hpp"
#include "lightiot/registry.hpp"
#include "lightiot/wire.hpp"

namespace lightiot::sim {

using protocol::Phase;
using wire::MessageKind;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Link { ClientServer, ClientGateway, GatewayServer };
enum class Party { Client, Gateway, Server };

std::string_view to_string(Link l);
std::string_view to_string(Party p);
std::string_view to_string(Phase p);

/// Link for each message kind, and who sends / receives it.
Link link_of(MessageKind k);
Party sender_of(MessageKind k);
Party receiver_of(MessageKind k);
Phase phase_of(MessageKind k);

struct DelaySpec {
    std::uint32_t min_ms = 0;
    std::uint32_t max_ms = 0;

    static DelaySpec fixed(std::uint32_t ms) { return {ms, ms}; }
    bool is_fixed() const { return min_ms == max_ms; }
    /// "25" or "10-40".
    static DelaySpec parse(std::string_view text);
};

struct LinkConfig {
    DelaySpec delay;
    double loss_prob = 0.0;
};

struct RunConfig {
    std::size_t clients = 1;
    std::size_t gateways = 1;
    /// Authentication sessions per client after pairing.
    std::size_t sessions = 1;
    std::uint64_t seed = 0;
    protocol::Params params;

    LinkConfig client_gateway{DelaySpec::fixed(5)};
    LinkConfig gateway_server{DelaySpec::fixed(20)};
    LinkConfig client_server{DelaySpec::fixed(25)};

    /// Constant per-entity clock offsets; missing entries are zero.
    std::vector<std::int32_t> client_skew_ms;
    std::vector<std::int32_t> gateway_skew_ms;
    std::int32_t server_skew_ms = 0;

    std::uint32_t start_ms = 1'000'000;
    /// Defaults to 10 x delta_t.
    std::optional<std::uint32_t> timeout_ms;
    unsigned pairing_attempts = 3;
    bool run_pairing = true;

    /// Start from an existing registry instead of provisioning fresh
    /// credentials. Clients whose tuple carries a nonce resume as paired.
    std::optional<CredentialRegistry> registry;

    /// Throws ConfigError.
    void validate() const;
    std::uint32_t effective_timeout() const { return timeout_ms.value_or(10 * params.delta_t_ms); }
};

// ------------------------------------------------------------- adversary

/// A frame on the wire plus routing metadata that is not part of the protocol bits.
struct Envelope {
    MessageKind kind;
    std::size_t client = 0;
    std::size_t gateway = 0;
    /// Pairing attempt index or authentication session index.
    std::size_t session = 0;
    Bytes wire;
    std::uint64_t sent_at = 0;

    Link link() const { return link_of(kind); }
    Phase phase() const { return phase_of(kind); }
};

struct Pass {};
struct Drop {};
struct Delay {
    std::uint64_t ms = 0;
};
/// Flips the listed bit positions (0 = most significant bit of byte 0).
struct Tamper {
    std::vector<std::size_t> bits;
};
/// The original is delivered as usual; a copy arrives after_ms after it was sent.
struct Replay {
    std::uint64_t after_ms = 0;
};
/// The original is dropped and `frame` is delivered in its place.
struct Inject {
    Bytes frame;
};
using AdversaryAction = std::variant<Pass, Drop, Delay, Tamper, Replay, Inject>;

std::string describe(const AdversaryAction& a);

class Interceptor {
public:
    virtual ~Interceptor() = default;
    virtual AdversaryAction intercept(const Envelope& env) = 0;
};

struct ScriptRule {
    std::size_t session = 0;
    MessageKind kind = MessageKind::M1;
    AdversaryAction action;
    /// Restrict to one client; all clients when absent.
    std::optional<std::size_t> client;
};

/// Applies the first rule matching (client, session, kind); Pass otherwise.
class ScriptedAdversary : public Interceptor {
public:
    ScriptedAdversary() = default;
    explicit ScriptedAdversary(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {}

    /// One rule per line: `<session> <kind> <action> [param] [client=<i>]`, with
    /// actions pass, drop, delay <ms>, tamper <bit>[,<bit>...], replay <ms>,
    /// inject <hex>. Blank lines and `#` comments are ignored. Throws ConfigError.
    static ScriptedAdversary parse(std::istream& in);
    static ScriptedAdversary load(const std::string& path);

    AdversaryAction intercept(const Envelope& env) override;
    const std::vector<ScriptRule>& rules() const { return rules_; }

private:
    std::vector<ScriptRule> rules_;
};

// ------------------------------------------------------------ transcript

struct FrameEvent {
    std::uint64_t time = 0;
    std::uint64_t sent_at = 0;
    MessageKind kind = MessageKind::M1;
    Party from = Party::Client;
    Party to = Party::Server;
    std::size_t client = 0;
    std::size_t gateway = 0;
    std::size_t session = 0;
    /// honest, tampered, delayed, replayed, injected.
    std::string origin;
    /// accepted, a reject name, dropped (adversary), lost (link) or expired (after timeout).
    std::string verdict;
    std::string hex;
    /// Receiver's cumulative operation tally after handling the frame.
    crypto::OpTally receiver_tally;

    Link link() const { return link_of(kind); }
    std::size_t bits() const { return hex.size() * 4; }
    bool delivered() const { return verdict != "dropped" && verdict != "lost" && verdict != "expired"; }
};

enum class SessionResult { Completed, Rejected, TimedOut };
std::string_view to_string(SessionResult r);

struct SessionEvent {
    std::size_t client = 0;
    std::size_t gateway = 0;
    std::size_t session = 0;
    Phase phase = Phase::Pairing;
    SessionResult result = SessionResult::TimedOut;
    std::optional<Reject> first_reject;
    std::optional<Party> rejected_by;
    std::uint64_t started_at = 0;
    std::uint64_t ended_at = 0;
    std::optional<std::uint64_t> latency_ms;
};

struct CounterEvent {
    Party party = Party::Client;
    std::size_t index = 0;
    protocol::PhaseTally tally;
};

struct Transcript {
    std::vector<FrameEvent> frames;
    std::vector<SessionEvent> sessions;
    std::vector<CounterEvent> counters;

    /// One JSON object per line: frames, then sessions, then counters.
    void write_jsonl(std::ostream& out) const;
    std::string to_jsonl() const;
    /// Throws ConfigError on malformed input.
    static Transcript read_jsonl(std::istream& in);
};

// ---------------------------------------------------------------- result

struct SessionRecord {
    SessionEvent event;
    std::optional<protocol::SessionKey> client_key;
    std::optional<protocol::SessionKey> gateway_key;
    /// Pseudo-identities held after the session.
    IdBits client_pseudo;
    IdBits gateway_pseudo;

    bool completed_both_ends() const { return client_key && gateway_key; }
    bool keys_match() const { return client_key && gateway_key && client_key->key == gateway_key->key; }
};

struct Principal {
    IdBits real_id;
    IdBits secret;
};

struct RunResult {
    Transcript transcript;
    std::vector<SessionRecord> sessions;
    std::vector<Principal> clients;
    std::vector<Principal> gateways;
    std::vector<protocol::ClientState> client_states;
    std::vector<protocol::GatewayState> gateway_states;
    CredentialRegistry registry;

    std::vector<const SessionRecord*> records(Phase phase) const;
};

/// Runs pairing for every client (unless already paired), then `sessions`
/// authentication rounds. Throws ConfigError for an invalid config.
RunResult run_scenario(const RunConfig& config, Interceptor* adversary = nullptr);

using InterceptorFactory = std::function<std::unique_ptr<Interceptor>()>;

/// Runs independent configs on up to `threads` OS threads; results keep input order.
std::vector<RunResult> run_batch(const std::vector<RunConfig>& configs, const InterceptorFactory& adversary,
                                 unsigned threads);

}  // namespace lightiot::sim
