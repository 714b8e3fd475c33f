#pragma once

// Credential data model for the two credential kinds, canonical byte-exact
// serialization, issuance, verification, and the compact JWT-style wire form.
// Credentials are immutable values once issued.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ivt/did.hpp"

namespace ivt::vc {

inline const std::vector<std::string> kDefaultContext = {
    "https://www.w3.org/2018/credentials/v1",
    "https://schema.inverter-trust.example/credentials/firmware/v1",
};

enum class UpdateType { Security, Bug, Feature };

const char* to_string(UpdateType t);
std::optional<UpdateType> update_type_from_string(const std::string& s);

struct FirmwareInfo {
    std::string version;
    crypto::Digest binary_hash;
    UpdateType update_type = UpdateType::Security;

    bool operator==(const FirmwareInfo&) const = default;
};

struct FirmwareCredential {
    std::string id;
    std::vector<std::string> context = kDefaultContext;
    std::vector<std::string> type_tags = {"VerifiableCredential", "FirmwareVC"};
    did::Did issuer;
    Timestamp issuance_date;

    did::Did manufacturer;
    Timestamp released_date;
    std::string link;
    FirmwareInfo firmware_info;
    std::vector<std::string> associated_cves;
    std::vector<std::string> supporting_models;

    std::optional<crypto::Signature> proof;

    bool operator==(const FirmwareCredential&) const = default;
};

struct HistoryEntry {
    std::string version;
    Timestamp installed_at;

    bool operator==(const HistoryEntry&) const = default;
};

enum class InverterStatus { Active, Inactive };

struct InverterCredential {
    std::string id;
    std::vector<std::string> context = kDefaultContext;
    std::vector<std::string> type_tags = {"VerifiableCredential", "InverterVC"};
    did::Did issuer;
    Timestamp issuance_date;

    struct Immutable {
        did::Did inverter_id;
        std::string serial_no;
        Timestamp manufactured_date;

        bool operator==(const Immutable&) const = default;
    } immutable;

    struct Updatable {
        did::Did owner;
        InverterStatus status = InverterStatus::Active;
        std::string software_version;
        bool timely_updated = true;
        bool missing_updates = false;

        bool operator==(const Updatable&) const = default;
    } updatable;

    // Newest first, matching the published credential layout.
    std::vector<HistoryEntry> firmware_history;
    // Newest first.
    std::vector<Timestamp> reset_history;

    std::optional<crypto::Signature> proof;

    bool operator==(const InverterCredential&) const = default;
};

enum class VerificationStatus { Valid, BadSignature, Revoked, UnknownIssuer, SchemaViolation };

const char* to_string(VerificationStatus s);

struct VerificationResult {
    VerificationStatus status = VerificationStatus::SchemaViolation;
    std::string detail;

    bool valid() const { return status == VerificationStatus::Valid; }
};

// JSON forms use the exact published field names ("credentialSubject",
// "firmwareHistory", "resetHistory", "supportingModels", "associatedCVEs");
// key order is the fixed order documented in schemas/.
nlohmann::ordered_json to_json(const FirmwareCredential& vc, bool include_proof = true);
nlohmann::ordered_json to_json(const InverterCredential& vc, bool include_proof = true);
FirmwareCredential firmware_from_json(const nlohmann::ordered_json& j);  // throws vc_error
InverterCredential inverter_from_json(const nlohmann::ordered_json& j);  // throws vc_error

class vc_error : public std::runtime_error {
public:
    explicit vc_error(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic signing input: compact JSON dump, proof excluded.
Bytes canonical_bytes(const FirmwareCredential& vc);
Bytes canonical_bytes(const InverterCredential& vc);

// Structural checks only (no registry access).
std::optional<std::string> schema_violation(const FirmwareCredential& vc);
std::optional<std::string> schema_violation(const InverterCredential& vc);

struct FirmwareMetadata {
    std::string version;
    crypto::Digest binary_hash;
    UpdateType update_type = UpdateType::Security;
    Timestamp released_date;
    std::string link;
    std::vector<std::string> associated_cves;
    std::vector<std::string> supporting_models;
};

FirmwareCredential issue_firmware_credential(const crypto::KeyPair& issuer_kp,
                                             const did::Did& issuer, std::string credential_id,
                                             Timestamp issuance_date,
                                             const FirmwareMetadata& metadata);  // throws vc_error

struct InverterStateFields {
    did::Did inverter_id;
    std::string serial_no;
    Timestamp manufactured_date;
    did::Did owner;
    InverterStatus status = InverterStatus::Active;
    bool timely_updated = true;
    bool missing_updates = false;
};

// With `previous`, the new history is `previous` plus one new head entry; the
// new install must be strictly newer than the previous head and its version
// must not already appear.  The caller is responsible for revoking `previous`.
InverterCredential issue_inverter_credential(const crypto::KeyPair& issuer_kp,
                                             const did::Did& issuer, std::string credential_id,
                                             Timestamp issuance_date,
                                             const InverterStateFields& state,
                                             HistoryEntry new_install,
                                             const InverterCredential* previous,
                                             std::vector<Timestamp> reset_history = {});

// Check order: schema -> issuer resolvable -> proof signature -> revocation.
VerificationResult verify_credential(const FirmwareCredential& vc, const did::Registry& registry);
VerificationResult verify_credential(const InverterCredential& vc, const did::Registry& registry);

// Compact token: base64url(header).base64url(payload).base64url(signature).
std::string compact_encoding(const FirmwareCredential& vc);  // throws vc_error if unsigned
std::string compact_encoding(const InverterCredential& vc);
FirmwareCredential decode_firmware(const std::string& token);  // throws vc_error
InverterCredential decode_inverter(const std::string& token);

}  // namespace ivt::vc
