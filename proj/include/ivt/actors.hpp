#pragma once

// Actor state machines for the firmware-update protocol: manufacturer, smart
// inverter (with wallet), owner, and update server, exchanging messages over a
// captured simulated network.  Each actor is a sequential state machine; the
// whole exchange is deterministic given a seeded RNG.

#include <functional>
#include <memory>
#include <variant>

#include "ivt/ledger.hpp"
#include "ivt/trust.hpp"

namespace ivt::actors {

// Dotted-numeric version ordering; an optional leading 'v' is ignored and
// missing segments count as zero ("v2.0" > "v1.8.3").
bool version_less(const std::string& a, const std::string& b);

struct CaptureRecord {
    Timestamp time;
    std::string from;
    std::string to;
    std::string kind;
    Bytes payload;  // kept for in-process assertions, not emitted to JSONL
};

class SimNetwork {
public:
    using TamperFn = std::function<Bytes(const Bytes&)>;

    // Records the message and returns the (possibly tampered) delivered bytes.
    Bytes send(Timestamp now, const std::string& from, const std::string& to,
               const std::string& kind, Bytes payload);

    // Tamper hook for one directed link; applied to every payload on it.
    void set_tamper(const std::string& from, const std::string& to, TamperFn fn);
    void clear_tamper(const std::string& from, const std::string& to);

    const std::vector<CaptureRecord>& capture() const { return capture_; }
    // One JSON object per line: {time, from, to, kind, payload_digest, payload_size}.
    std::string capture_jsonl() const;

private:
    std::vector<CaptureRecord> capture_;
    std::map<std::pair<std::string, std::string>, TamperFn> tamper_;
};

class UpdateServer {
public:
    void store(const std::string& uri, Bytes binary);
    std::optional<Bytes> fetch(const std::string& uri) const;
    static constexpr const char* kName = "update-server";

private:
    std::map<std::string, Bytes> binaries_;
};

// Shared simulation substrate handed to every actor.
struct World {
    explicit World(std::uint64_t seed) : rng(seed) {}
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    crypto::Rng rng;
    did::Registry registry;
    ledger::UpdateLedger ledger{registry};
    UpdateServer server;
    SimNetwork network;

    // Capture addressing: actor name per registered did.
    std::map<std::string, std::string> actor_names;
    std::string name_of(const did::Did& d) const {
        auto it = actor_names.find(d.rendered());
        return it == actor_names.end() ? d.rendered() : it->second;
    }
};

struct FirmwareImage {
    std::vector<std::string> model_list;
    std::string version;
    Bytes binary;
    crypto::Digest binary_digest;  // must equal sha256(binary)

    static FirmwareImage make(std::vector<std::string> models, std::string version, Bytes binary);
};

struct ProofValue {
    std::string version;
    Timestamp install_timestamp;
    bool reset = false;
    crypto::Digest mac;

    nlohmann::ordered_json to_json() const;
    static ProofValue from_json(const nlohmann::ordered_json& j);
};

// HMAC(device_secret, version | binary_digest | timestamp | kind).
crypto::Digest proof_mac(ByteView device_secret, const std::string& version,
                         const crypto::Digest& binary_digest, Timestamp installed_at, bool reset);

struct Wallet {
    crypto::KeyPair keys;
    did::Did owner_did;  // the inverter's own did
    // At most one live inverter credential, keyed by credential id.
    std::map<std::string, vc::InverterCredential> inverter_credentials;
    std::map<std::string, vc::FirmwareCredential> firmware_credentials;

    const vc::InverterCredential* current_credential() const;
};

enum class InstallOutcome { Installed, IgnoredModel, IgnoredVersion, HashMismatch, BadIssuer, FetchFailed };

const char* to_string(InstallOutcome o);

enum class Rejection {
    DecryptFailed,
    MalformedRequest,
    BadSignature,
    NotOwner,
    UnknownInverter,
    StaleCredential,
    InvalidCredential,
    InvalidProof,
    ProofReplayed,
    VersionNotNewer,
};

const char* to_string(Rejection r);

class Manufacturer;

class Inverter {
public:
    const did::Did& did() const { return did_; }
    const std::string& name() const { return name_; }
    const std::string& model() const { return model_; }
    const std::string& installed_version() const { return installed_version_; }
    const std::vector<vc::HistoryEntry>& install_log() const { return install_log_; }
    const Wallet& wallet() const { return wallet_; }
    const did::Did& manufacturer_did() const { return manufacturer_did_; }
    ByteView device_secret() const { return device_secret_; }

    // Drains the contract subscription and handles each event in order.
    std::vector<InstallOutcome> poll_updates(World& world, Timestamp now);
    InstallOutcome handle_update_event(World& world, const ledger::UpdateEvent& event,
                                       Timestamp now);
    // Offline path: binary and credential injected directly, same hash and
    // issuer checks, no network fetch.
    InstallOutcome install_offline(World& world, const Bytes& binary,
                                   const vc::FirmwareCredential& update_vc, Timestamp now);

    // Reverts to the factory version, clears the install log, and produces a
    // reset proof for the next credential renewal.
    ProofValue factory_reset(Timestamp now);

    // Consumes the pending proof for a renewal request.
    std::optional<std::pair<ProofValue, vc::InverterCredential>> take_renewal_material();
    bool has_pending_proof() const { return pending_proof_.has_value(); }

    // Accepts a renewed credential after the issuer check; replaces any old
    // wallet credential.
    bool store_new_credential(const vc::InverterCredential& credential);

private:
    friend class Manufacturer;
    Inverter() = default;

    std::string name_;
    did::Did did_;
    std::string model_;
    std::string serial_;
    std::string factory_version_;
    std::string installed_version_;
    std::vector<vc::HistoryEntry> install_log_;
    Bytes device_secret_;
    Wallet wallet_;
    did::Did manufacturer_did_;
    std::string contract_id_;
    std::optional<ProofValue> pending_proof_;
};

class Manufacturer {
public:
    Manufacturer(World& world, std::string name, Timestamp now);

    const did::Did& did() const { return did_; }
    const std::string& name() const { return name_; }
    const crypto::KeyPair& keypair() const { return kp_; }
    const std::string& contract_id() const { return contract_id_; }

    // The initial credential names `initial_owner` when given (a sale at the
    // factory gate), otherwise the manufacturer itself.
    std::unique_ptr<Inverter> manufacture_inverter(World& world, const std::string& model,
                                                   const std::string& serial, Timestamp now,
                                                   const did::Did* initial_owner = nullptr);

    // Sets the inverter document's controller to the owner; only the current
    // controller (the manufacturer, pre-sale) can do this.
    did::DIDDocument transfer_ownership(World& world, const Inverter& inverter,
                                        const did::Did& owner, Timestamp now);

    std::pair<vc::FirmwareCredential, ledger::UpdateEvent> publish_firmware(
        World& world, const FirmwareImage& image, vc::UpdateType update_type,
        std::vector<std::string> cves, Timestamp now);

    // Full renewal server side: decrypt, authenticate, check ownership and
    // credential freshness, validate the one-time proof, issue, revoke, reply.
    std::variant<Bytes, Rejection> handle_vc_request(World& world, const Bytes& envelope_raw,
                                                     Timestamp now);

    std::optional<crypto::Digest> published_digest(const std::string& version) const;
    std::string update_link(const std::string& version) const;

private:
    vc::InverterCredential issue_for(World& world, const Inverter* inverter_ptr,
                                     const did::Did& inverter_did, const did::Did& owner,
                                     vc::HistoryEntry head, const vc::InverterCredential* previous,
                                     std::vector<Timestamp> reset_history, Timestamp now);
    void revoke(World& world, const std::string& credential_id);

    std::string name_;
    crypto::KeyPair kp_;
    did::Did did_;
    std::string contract_id_;
    std::set<std::string> serials_;
    std::map<std::string, Bytes> device_secrets_;        // inverter did -> secret
    std::map<std::string, vc::InverterCredential> latest_credential_;  // inverter did -> vc
    std::map<std::string, std::pair<std::string, std::string>> inverter_meta_;  // did -> (model, serial)
    struct PublishedInfo {
        crypto::Digest digest;
        Timestamp released;
        std::vector<std::string> models;
    };
    std::map<std::string, PublishedInfo> published_;     // version -> release record
    std::set<std::string> consumed_proofs_;              // proof mac hex
    std::uint64_t vc_counter_ = 0;
};

enum class InstallVcOutcome { Ok, DecryptFailed, MalformedResponse, BadSignature, ReplayAlarm, WrongIssuer };

const char* to_string(InstallVcOutcome o);

class Owner {
public:
    Owner(World& world, std::string name, Timestamp now);

    const did::Did& did() const { return did_; }
    const std::string& name() const { return name_; }
    const crypto::KeyPair& keypair() const { return kp_; }

    // Builds the encrypted renewal request (consumes the inverter's pending
    // proof).  Throws std::runtime_error when no proof is pending.
    Bytes request_new_vc(World& world, Inverter& inverter, const did::Did& manufacturer_did,
                         Timestamp now);

    // Decrypts and validates the response; on success uploads the credential
    // to the inverter (encrypted for its wallet key).
    InstallVcOutcome install_vc(World& world, Inverter& inverter, const Bytes& response_raw,
                                Timestamp now);

    // Enrollment presentation over the credential currently in the wallet,
    // sealed for the operator's key.
    Bytes present_for_enrollment(World& world, const Inverter& inverter,
                                 const crypto::VerificationKey& operator_key, Timestamp now);

private:
    std::string name_;
    crypto::KeyPair kp_;
    did::Did did_;
    std::map<std::string, crypto::Nonce> pending_;  // inverter did -> outstanding nonce
};

}  // namespace ivt::actors
