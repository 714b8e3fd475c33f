#pragma once

// Emulated verifiable data registry: DIDs, DID documents, controlled updates,
// issuer-scoped credential revocation, and JSON file persistence.  Stands in
// for the consortium chain; the protocol only needs authenticated, available
// resolution.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ivt/crypto.hpp"

namespace ivt::did {

struct Did {
    std::string method;
    std::string method_specific_id;

    auto operator<=>(const Did&) const = default;

    std::string rendered() const { return "did:" + method + ":" + method_specific_id; }
    static std::optional<Did> parse(const std::string& rendered);
};

enum class KeyPurpose { Authentication, Assertion, KeyAgreement };

const char* to_string(KeyPurpose p);
std::optional<KeyPurpose> key_purpose_from_string(const std::string& s);

struct VerificationMethod {
    std::string key_id;
    KeyPurpose purpose;
    crypto::VerificationKey key{};  // Ed25519 for auth/assertion, X25519 for keyAgreement

    bool operator==(const VerificationMethod&) const = default;
};

enum class ServiceType { UpdateServer, VCIssuance, UpdateList };

const char* to_string(ServiceType t);
std::optional<ServiceType> service_type_from_string(const std::string& s);

struct ServiceEndpoint {
    ServiceType type;
    std::string uri;

    bool operator==(const ServiceEndpoint&) const = default;
};

struct DIDDocument {
    Did id;
    std::vector<VerificationMethod> verification_methods;
    std::optional<Did> controller;
    std::vector<ServiceEndpoint> services;
    std::uint64_t version = 1;

    bool operator==(const DIDDocument&) const = default;

    std::optional<crypto::VerificationKey> key_for(KeyPurpose purpose) const;
    std::optional<crypto::VerificationKey> key_by_id(const std::string& key_id,
                                                     KeyPurpose purpose) const;

    nlohmann::ordered_json to_json() const;
    static DIDDocument from_json(const nlohmann::ordered_json& j);  // throws on bad shape
    // Byte-stable form signed by document update authorizers.
    Bytes canonical_bytes() const;

    // Standard document for one keypair: authentication + assertion entries for
    // the Ed25519 key and a derived keyAgreement entry.
    static DIDDocument for_keypair(const Did& id, const crypto::KeyPair& kp,
                                   std::vector<ServiceEndpoint> services);
};

enum class RegistryError {
    DuplicateDid,
    UnknownDid,
    Unauthorized,
    StaleVersion,
    BadDocument,
};

const char* to_string(RegistryError e);

class registry_error : public std::runtime_error {
public:
    registry_error(RegistryError reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    RegistryError reason() const { return reason_; }

private:
    RegistryError reason_;
};

class Registry {
public:
    // Registers a fresh document (version forced to 1).
    void register_document(DIDDocument doc);  // throws DuplicateDid

    // Convenience: mint a Did with a random 16-byte hex identifier, build the
    // standard document for kp, and register it.
    std::pair<Did, DIDDocument> create_did(const std::string& method, const crypto::KeyPair& kp,
                                           std::vector<ServiceEndpoint> services,
                                           crypto::Rng& rng);

    const DIDDocument& resolve(const Did& did) const;  // throws UnknownDid
    bool contains(const Did& did) const;

    // new_doc.version must equal current + 1; authorizer_sig must verify over
    // new_doc.canonical_bytes() under the controller's authentication key, or
    // the document's own authentication key when no controller is set.
    const DIDDocument& update_document(const Did& did, DIDDocument new_doc,
                                       const crypto::Signature& authorizer_sig);

    // issuer_sig is over sha256("revoke:" + credential_id) under the issuer's
    // assertion key.
    void revoke_credential(const Did& issuer, const std::string& credential_id,
                           const crypto::Signature& issuer_sig);
    bool is_revoked(const Did& issuer, const std::string& credential_id) const;

    nlohmann::ordered_json to_json() const;
    static Registry from_json(const nlohmann::ordered_json& j);
    void save(const std::string& path) const;
    static Registry load(const std::string& path);

    size_t document_count() const { return documents_.size(); }

private:
    std::map<std::string, DIDDocument> documents_;           // rendered Did -> doc
    std::map<std::string, std::set<std::string>> revocations_;  // issuer -> credential ids
};

}  // namespace ivt::did
