#include "ivt/did.hpp"

#include <fstream>

namespace ivt::did {

using nlohmann::ordered_json;

std::optional<Did> Did::parse(const std::string& rendered) {
    if (rendered.rfind("did:", 0) != 0) return std::nullopt;
    size_t sep = rendered.find(':', 4);
    if (sep == std::string::npos || sep == 4 || sep + 1 >= rendered.size()) return std::nullopt;
    return Did{rendered.substr(4, sep - 4), rendered.substr(sep + 1)};
}

const char* to_string(KeyPurpose p) {
    switch (p) {
        case KeyPurpose::Authentication: return "authentication";
        case KeyPurpose::Assertion: return "assertion";
        case KeyPurpose::KeyAgreement: return "keyAgreement";
    }
    return "?";
}

std::optional<KeyPurpose> key_purpose_from_string(const std::string& s) {
    if (s == "authentication") return KeyPurpose::Authentication;
    if (s == "assertion") return KeyPurpose::Assertion;
    if (s == "keyAgreement") return KeyPurpose::KeyAgreement;
    return std::nullopt;
}

const char* to_string(ServiceType t) {
    switch (t) {
        case ServiceType::UpdateServer: return "UpdateServer";
        case ServiceType::VCIssuance: return "VCIssuance";
        case ServiceType::UpdateList: return "UpdateList";
    }
    return "?";
}

std::optional<ServiceType> service_type_from_string(const std::string& s) {
    if (s == "UpdateServer") return ServiceType::UpdateServer;
    if (s == "VCIssuance") return ServiceType::VCIssuance;
    if (s == "UpdateList") return ServiceType::UpdateList;
    return std::nullopt;
}

std::optional<crypto::VerificationKey> DIDDocument::key_for(KeyPurpose purpose) const {
    for (const auto& vm : verification_methods) {
        if (vm.purpose == purpose) return vm.key;
    }
    return std::nullopt;
}

std::optional<crypto::VerificationKey> DIDDocument::key_by_id(const std::string& key_id,
                                                              KeyPurpose purpose) const {
    for (const auto& vm : verification_methods) {
        if (vm.purpose == purpose && vm.key_id == key_id) return vm.key;
    }
    return std::nullopt;
}

ordered_json DIDDocument::to_json() const {
    ordered_json j;
    j["id"] = id.rendered();
    j["version"] = version;
    if (controller) j["controller"] = controller->rendered();
    ordered_json keys = ordered_json::array();
    for (const auto& vm : verification_methods) {
        keys.push_back({{"keyId", vm.key_id},
                        {"purpose", to_string(vm.purpose)},
                        {"publicKeyHex", hex_encode(vm.key)}});
    }
    j["verificationMethod"] = keys;
    ordered_json svcs = ordered_json::array();
    for (const auto& se : services) {
        svcs.push_back({{"type", to_string(se.type)}, {"serviceEndpoint", se.uri}});
    }
    j["service"] = svcs;
    return j;
}

DIDDocument DIDDocument::from_json(const ordered_json& j) {
    DIDDocument doc;
    auto id = Did::parse(j.at("id").get<std::string>());
    if (!id) throw registry_error(RegistryError::BadDocument, "bad did in document");
    doc.id = *id;
    doc.version = j.at("version").get<std::uint64_t>();
    if (j.contains("controller")) {
        auto c = Did::parse(j.at("controller").get<std::string>());
        if (!c) throw registry_error(RegistryError::BadDocument, "bad controller did");
        doc.controller = *c;
    }
    for (const auto& k : j.at("verificationMethod")) {
        VerificationMethod vm;
        vm.key_id = k.at("keyId").get<std::string>();
        auto purpose = key_purpose_from_string(k.at("purpose").get<std::string>());
        if (!purpose) throw registry_error(RegistryError::BadDocument, "bad key purpose");
        vm.purpose = *purpose;
        Bytes raw = hex_decode(k.at("publicKeyHex").get<std::string>());
        if (raw.size() != vm.key.size()) {
            throw registry_error(RegistryError::BadDocument, "bad key length");
        }
        std::copy(raw.begin(), raw.end(), vm.key.begin());
        doc.verification_methods.push_back(vm);
    }
    for (const auto& s : j.at("service")) {
        auto type = service_type_from_string(s.at("type").get<std::string>());
        if (!type) throw registry_error(RegistryError::BadDocument, "bad service type");
        doc.services.push_back({*type, s.at("serviceEndpoint").get<std::string>()});
    }
    return doc;
}

Bytes DIDDocument::canonical_bytes() const {
    return to_bytes(to_json().dump());
}

DIDDocument DIDDocument::for_keypair(const Did& id, const crypto::KeyPair& kp,
                                     std::vector<ServiceEndpoint> services) {
    DIDDocument doc;
    doc.id = id;
    doc.version = 1;
    doc.services = std::move(services);
    doc.verification_methods = {
        {kp.key_id(), KeyPurpose::Authentication, kp.verification_key()},
        {kp.key_id(), KeyPurpose::Assertion, kp.verification_key()},
        {kp.key_id() + "-x", KeyPurpose::KeyAgreement, crypto::to_encryption_key(kp.verification_key())},
    };
    return doc;
}

const char* to_string(RegistryError e) {
    switch (e) {
        case RegistryError::DuplicateDid: return "DuplicateDid";
        case RegistryError::UnknownDid: return "UnknownDid";
        case RegistryError::Unauthorized: return "Unauthorized";
        case RegistryError::StaleVersion: return "StaleVersion";
        case RegistryError::BadDocument: return "BadDocument";
    }
    return "?";
}

void Registry::register_document(DIDDocument doc) {
    if (!doc.key_for(KeyPurpose::Authentication)) {
        throw registry_error(RegistryError::BadDocument, "document lacks an authentication key");
    }
    std::string key = doc.id.rendered();
    if (documents_.contains(key)) {
        throw registry_error(RegistryError::DuplicateDid, "did already registered: " + key);
    }
    doc.version = 1;
    documents_.emplace(std::move(key), std::move(doc));
}

std::pair<Did, DIDDocument> Registry::create_did(const std::string& method,
                                                 const crypto::KeyPair& kp,
                                                 std::vector<ServiceEndpoint> services,
                                                 crypto::Rng& rng) {
    if (method.empty()) throw registry_error(RegistryError::BadDocument, "empty did method");
    Did id{method, rng.random_hex(16)};
    DIDDocument doc = DIDDocument::for_keypair(id, kp, std::move(services));
    register_document(doc);
    return {id, resolve(id)};
}

const DIDDocument& Registry::resolve(const Did& did) const {
    auto it = documents_.find(did.rendered());
    if (it == documents_.end()) {
        throw registry_error(RegistryError::UnknownDid, "unknown did: " + did.rendered());
    }
    return it->second;
}

bool Registry::contains(const Did& did) const {
    return documents_.contains(did.rendered());
}

const DIDDocument& Registry::update_document(const Did& did, DIDDocument new_doc,
                                             const crypto::Signature& authorizer_sig) {
    auto it = documents_.find(did.rendered());
    if (it == documents_.end()) {
        throw registry_error(RegistryError::UnknownDid, "unknown did: " + did.rendered());
    }
    const DIDDocument& current = it->second;
    if (new_doc.id != did) {
        throw registry_error(RegistryError::BadDocument, "document id mismatch");
    }
    if (!new_doc.key_for(KeyPurpose::Authentication)) {
        throw registry_error(RegistryError::BadDocument, "document lacks an authentication key");
    }
    if (new_doc.version != current.version + 1) {
        throw registry_error(RegistryError::StaleVersion, "expected version " +
                                                              std::to_string(current.version + 1));
    }

    std::optional<crypto::VerificationKey> auth_key;
    if (current.controller) {
        auth_key = resolve(*current.controller).key_for(KeyPurpose::Authentication);
    } else {
        auth_key = current.key_for(KeyPurpose::Authentication);
    }
    if (!auth_key || !crypto::verify(new_doc.canonical_bytes(), authorizer_sig, *auth_key)) {
        throw registry_error(RegistryError::Unauthorized, "document update not authorized");
    }
    it->second = std::move(new_doc);
    return it->second;
}

void Registry::revoke_credential(const Did& issuer, const std::string& credential_id,
                                 const crypto::Signature& issuer_sig) {
    const DIDDocument& doc = resolve(issuer);
    auto key = doc.key_for(KeyPurpose::Assertion);
    Bytes msg = to_bytes("revoke:" + credential_id);
    auto digest = crypto::sha256(msg);
    if (!key || !crypto::verify(digest.bytes, issuer_sig, *key)) {
        throw registry_error(RegistryError::Unauthorized, "revocation not authorized");
    }
    revocations_[issuer.rendered()].insert(credential_id);
}

bool Registry::is_revoked(const Did& issuer, const std::string& credential_id) const {
    auto it = revocations_.find(issuer.rendered());
    return it != revocations_.end() && it->second.contains(credential_id);
}

ordered_json Registry::to_json() const {
    ordered_json docs = ordered_json::array();
    for (const auto& [_, doc] : documents_) docs.push_back(doc.to_json());
    ordered_json revs = ordered_json::array();
    for (const auto& [issuer, ids] : revocations_) {
        revs.push_back({{"issuer", issuer}, {"credentialIds", ids}});
    }
    return {{"documents", docs}, {"revocations", revs}};
}

Registry Registry::from_json(const ordered_json& j) {
    Registry r;
    for (const auto& d : j.at("documents")) {
        DIDDocument doc = DIDDocument::from_json(d);
        std::uint64_t version = doc.version;
        r.register_document(doc);
        r.documents_.at(doc.id.rendered()).version = version;
    }
    for (const auto& rev : j.at("revocations")) {
        auto& set = r.revocations_[rev.at("issuer").get<std::string>()];
        for (const auto& id : rev.at("credentialIds")) set.insert(id.get<std::string>());
    }
    return r;
}

void Registry::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << to_json().dump(2) << '\n';
}

Registry Registry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ordered_json j;
    in >> j;
    return from_json(j);
}

}  // namespace ivt::did
