#include "ivt/credentials.hpp"

namespace ivt::vc {

using nlohmann::ordered_json;

const char* to_string(UpdateType t) {
    switch (t) {
        case UpdateType::Security: return "security";
        case UpdateType::Bug: return "bug";
        case UpdateType::Feature: return "feature";
    }
    return "?";
}

std::optional<UpdateType> update_type_from_string(const std::string& s) {
    if (s == "security") return UpdateType::Security;
    if (s == "bug") return UpdateType::Bug;
    if (s == "feature") return UpdateType::Feature;
    return std::nullopt;
}

const char* to_string(VerificationStatus s) {
    switch (s) {
        case VerificationStatus::Valid: return "Valid";
        case VerificationStatus::BadSignature: return "BadSignature";
        case VerificationStatus::Revoked: return "Revoked";
        case VerificationStatus::UnknownIssuer: return "UnknownIssuer";
        case VerificationStatus::SchemaViolation: return "SchemaViolation";
    }
    return "?";
}

namespace {

ordered_json proof_json(const crypto::Signature& sig) {
    return {{"type", "Ed25519Signature2020"},
            {"verificationMethod", sig.key_id},
            {"signatureValue", hex_encode(sig.bytes)}};
}

crypto::Signature proof_from_json(const ordered_json& j) {
    crypto::Signature sig;
    sig.key_id = j.at("verificationMethod").get<std::string>();
    Bytes raw = hex_decode(j.at("signatureValue").get<std::string>());
    if (raw.size() != sig.bytes.size()) throw vc_error("bad signature length");
    std::copy(raw.begin(), raw.end(), sig.bytes.begin());
    return sig;
}

did::Did parse_did(const ordered_json& j, const char* field) {
    auto d = did::Did::parse(j.at(field).get<std::string>());
    if (!d) throw vc_error(std::string("bad did in field ") + field);
    return *d;
}

crypto::Signature sign_credential(const crypto::KeyPair& kp, ByteView canonical) {
    // Protocol rule: signatures are over the SHA-256 of the canonical bytes.
    return kp.sign(crypto::sha256(canonical).bytes);
}

template <typename Credential>
VerificationResult verify_impl(const Credential& vc, const did::Registry& registry) {
    if (auto violation = schema_violation(vc)) {
        return {VerificationStatus::SchemaViolation, *violation};
    }
    if (!registry.contains(vc.issuer)) {
        return {VerificationStatus::UnknownIssuer, "issuer not resolvable: " + vc.issuer.rendered()};
    }
    const did::DIDDocument& doc = registry.resolve(vc.issuer);
    auto key = doc.key_by_id(vc.proof->key_id, did::KeyPurpose::Assertion);
    if (!key) {
        return {VerificationStatus::BadSignature, "no assertion key " + vc.proof->key_id};
    }
    auto digest = crypto::sha256(canonical_bytes(vc));
    if (!crypto::verify(digest.bytes, *vc.proof, *key)) {
        return {VerificationStatus::BadSignature, "proof does not verify"};
    }
    if (registry.is_revoked(vc.issuer, vc.id)) {
        return {VerificationStatus::Revoked, "credential revoked: " + vc.id};
    }
    return {VerificationStatus::Valid, ""};
}

std::string encode_token(const ordered_json& payload, const crypto::Signature& sig) {
    ordered_json header = {{"alg", "EdDSA"}, {"typ", "JWT"}, {"kid", sig.key_id}};
    return base64url_encode(to_bytes(header.dump())) + "." +
           base64url_encode(to_bytes(payload.dump())) + "." + base64url_encode(sig.bytes);
}

std::pair<ordered_json, crypto::Signature> decode_token(const std::string& token) {
    size_t dot1 = token.find('.');
    size_t dot2 = token.rfind('.');
    if (dot1 == std::string::npos || dot2 == dot1) throw vc_error("malformed token");
    ordered_json header, payload;
    crypto::Signature sig;
    try {
        header = ordered_json::parse(ivt::to_string(base64url_decode(token.substr(0, dot1))));
        payload = ordered_json::parse(
            ivt::to_string(base64url_decode(token.substr(dot1 + 1, dot2 - dot1 - 1))));
        Bytes raw = base64url_decode(token.substr(dot2 + 1));
        if (raw.size() != sig.bytes.size()) throw vc_error("bad token signature length");
        std::copy(raw.begin(), raw.end(), sig.bytes.begin());
    } catch (const std::exception& e) {
        throw vc_error(std::string("malformed token: ") + e.what());
    }
    if (header.value("alg", "") != "EdDSA") throw vc_error("unsupported token alg");
    sig.key_id = header.value("kid", "");
    return {payload, sig};
}

}  // namespace

ordered_json to_json(const FirmwareCredential& vc, bool include_proof) {
    ordered_json j;
    j["@context"] = vc.context;
    j["id"] = vc.id;
    j["type"] = vc.type_tags;
    j["issuer"] = vc.issuer.rendered();
    j["issuanceDate"] = vc.issuance_date.to_string();
    ordered_json subject;
    subject["manufacturer"] = vc.manufacturer.rendered();
    subject["releasedDate"] = vc.released_date.to_string();
    subject["link"] = vc.link;
    subject["firmwareInfo"] = {{"version", vc.firmware_info.version},
                               {"binaryHash", vc.firmware_info.binary_hash.hex()},
                               {"type", to_string(vc.firmware_info.update_type)}};
    subject["associatedCVEs"] = vc.associated_cves;
    subject["supportingModels"] = vc.supporting_models;
    j["credentialSubject"] = subject;
    if (include_proof && vc.proof) j["proof"] = proof_json(*vc.proof);
    return j;
}

ordered_json to_json(const InverterCredential& vc, bool include_proof) {
    ordered_json j;
    j["@context"] = vc.context;
    j["id"] = vc.id;
    j["type"] = vc.type_tags;
    j["issuer"] = vc.issuer.rendered();
    j["issuanceDate"] = vc.issuance_date.to_string();
    ordered_json subject;
    subject["immutable"] = {{"id", vc.immutable.inverter_id.rendered()},
                            {"serialNo", vc.immutable.serial_no},
                            {"manufacturedDate", vc.immutable.manufactured_date.to_string()}};
    subject["updatable"] = {
        {"owner", vc.updatable.owner.rendered()},
        {"status", vc.updatable.status == InverterStatus::Active ? "active" : "inactive"},
        {"softwareVersion", vc.updatable.software_version},
        {"timelyUpdated", vc.updatable.timely_updated},
        {"missingUpdates", vc.updatable.missing_updates}};
    ordered_json history;  // insertion order preserved: newest first
    for (const auto& entry : vc.firmware_history) {
        history[entry.version] = entry.installed_at.to_string();
    }
    subject["firmwareHistory"] = std::move(history);
    ordered_json resets = ordered_json::array();
    for (const auto& t : vc.reset_history) resets.push_back(t.to_string());
    subject["resetHistory"] = std::move(resets);
    j["credentialSubject"] = subject;
    if (include_proof && vc.proof) j["proof"] = proof_json(*vc.proof);
    return j;
}

FirmwareCredential firmware_from_json(const ordered_json& j) {
    try {
        FirmwareCredential vc;
        vc.context = j.at("@context").get<std::vector<std::string>>();
        vc.id = j.at("id").get<std::string>();
        vc.type_tags = j.at("type").get<std::vector<std::string>>();
        vc.issuer = parse_did(j, "issuer");
        vc.issuance_date = Timestamp::parse(j.at("issuanceDate").get<std::string>());
        const auto& subject = j.at("credentialSubject");
        vc.manufacturer = parse_did(subject, "manufacturer");
        vc.released_date = Timestamp::parse(subject.at("releasedDate").get<std::string>());
        vc.link = subject.at("link").get<std::string>();
        const auto& info = subject.at("firmwareInfo");
        vc.firmware_info.version = info.at("version").get<std::string>();
        vc.firmware_info.binary_hash = crypto::Digest::from_hex(info.at("binaryHash").get<std::string>());
        auto type = update_type_from_string(info.at("type").get<std::string>());
        if (!type) throw vc_error("bad update type");
        vc.firmware_info.update_type = *type;
        vc.associated_cves = subject.at("associatedCVEs").get<std::vector<std::string>>();
        vc.supporting_models = subject.at("supportingModels").get<std::vector<std::string>>();
        if (j.contains("proof")) vc.proof = proof_from_json(j.at("proof"));
        return vc;
    } catch (const vc_error&) {
        throw;
    } catch (const std::exception& e) {
        throw vc_error(std::string("bad firmware credential json: ") + e.what());
    }
}

InverterCredential inverter_from_json(const ordered_json& j) {
    try {
        InverterCredential vc;
        vc.context = j.at("@context").get<std::vector<std::string>>();
        vc.id = j.at("id").get<std::string>();
        vc.type_tags = j.at("type").get<std::vector<std::string>>();
        vc.issuer = parse_did(j, "issuer");
        vc.issuance_date = Timestamp::parse(j.at("issuanceDate").get<std::string>());
        const auto& subject = j.at("credentialSubject");
        const auto& imm = subject.at("immutable");
        vc.immutable.inverter_id = parse_did(imm, "id");
        vc.immutable.serial_no = imm.at("serialNo").get<std::string>();
        vc.immutable.manufactured_date = Timestamp::parse(imm.at("manufacturedDate").get<std::string>());
        const auto& upd = subject.at("updatable");
        vc.updatable.owner = parse_did(upd, "owner");
        vc.updatable.status = upd.at("status").get<std::string>() == "active"
                                  ? InverterStatus::Active
                                  : InverterStatus::Inactive;
        vc.updatable.software_version = upd.at("softwareVersion").get<std::string>();
        vc.updatable.timely_updated = upd.at("timelyUpdated").get<bool>();
        vc.updatable.missing_updates = upd.at("missingUpdates").get<bool>();
        for (const auto& [version, ts] : subject.at("firmwareHistory").items()) {
            vc.firmware_history.push_back({version, Timestamp::parse(ts.get<std::string>())});
        }
        for (const auto& ts : subject.at("resetHistory")) {
            vc.reset_history.push_back(Timestamp::parse(ts.get<std::string>()));
        }
        if (j.contains("proof")) vc.proof = proof_from_json(j.at("proof"));
        return vc;
    } catch (const vc_error&) {
        throw;
    } catch (const std::exception& e) {
        throw vc_error(std::string("bad inverter credential json: ") + e.what());
    }
}

Bytes canonical_bytes(const FirmwareCredential& vc) {
    return to_bytes(to_json(vc, /*include_proof=*/false).dump());
}

Bytes canonical_bytes(const InverterCredential& vc) {
    return to_bytes(to_json(vc, /*include_proof=*/false).dump());
}

namespace {
bool has_tags(const std::vector<std::string>& tags, const char* kind) {
    bool base = false, specific = false;
    for (const auto& t : tags) {
        if (t == "VerifiableCredential") base = true;
        if (t == kind) specific = true;
    }
    return base && specific;
}
}  // namespace

std::optional<std::string> schema_violation(const FirmwareCredential& vc) {
    if (vc.id.empty()) return "missing credential id";
    if (!has_tags(vc.type_tags, "FirmwareVC")) return "missing FirmwareVC type tags";
    if (vc.issuer != vc.manufacturer) return "issuer differs from manufacturer";
    if (vc.firmware_info.version.empty()) return "missing firmware version";
    if (!vc.proof) return "missing proof";
    return std::nullopt;
}

std::optional<std::string> schema_violation(const InverterCredential& vc) {
    if (vc.id.empty()) return "missing credential id";
    if (!has_tags(vc.type_tags, "InverterVC")) return "missing InverterVC type tags";
    if (vc.firmware_history.empty()) return "empty firmware history";
    for (size_t i = 1; i < vc.firmware_history.size(); ++i) {
        if (vc.firmware_history[i - 1].installed_at <= vc.firmware_history[i].installed_at) {
            return "firmware history not strictly newest-first";
        }
    }
    if (vc.updatable.software_version != vc.firmware_history.front().version) {
        return "softwareVersion differs from firmware history head";
    }
    for (size_t i = 1; i < vc.reset_history.size(); ++i) {
        if (vc.reset_history[i - 1] <= vc.reset_history[i]) {
            return "reset history not strictly newest-first";
        }
    }
    if (!vc.proof) return "missing proof";
    return std::nullopt;
}

FirmwareCredential issue_firmware_credential(const crypto::KeyPair& issuer_kp,
                                             const did::Did& issuer, std::string credential_id,
                                             Timestamp issuance_date,
                                             const FirmwareMetadata& metadata) {
    if (metadata.version.empty()) throw vc_error("incomplete metadata: version");
    if (metadata.supporting_models.empty()) throw vc_error("incomplete metadata: supportingModels");
    if (metadata.binary_hash == crypto::Digest{}) throw vc_error("incomplete metadata: binaryHash");
    FirmwareCredential vc;
    vc.id = std::move(credential_id);
    vc.issuer = issuer;
    vc.issuance_date = issuance_date;
    vc.manufacturer = issuer;
    vc.released_date = metadata.released_date;
    vc.link = metadata.link;
    vc.firmware_info = {metadata.version, metadata.binary_hash, metadata.update_type};
    vc.associated_cves = metadata.associated_cves;
    vc.supporting_models = metadata.supporting_models;
    vc.proof = sign_credential(issuer_kp, canonical_bytes(vc));
    return vc;
}

InverterCredential issue_inverter_credential(const crypto::KeyPair& issuer_kp,
                                             const did::Did& issuer, std::string credential_id,
                                             Timestamp issuance_date,
                                             const InverterStateFields& state,
                                             HistoryEntry new_install,
                                             const InverterCredential* previous,
                                             std::vector<Timestamp> reset_history) {
    InverterCredential vc;
    vc.id = std::move(credential_id);
    vc.issuer = issuer;
    vc.issuance_date = issuance_date;
    vc.immutable = {state.inverter_id, state.serial_no, state.manufactured_date};
    vc.updatable = {state.owner, state.status, new_install.version, state.timely_updated,
                    state.missing_updates};
    if (previous) {
        if (new_install.installed_at <= previous->firmware_history.front().installed_at) {
            throw vc_error("install timestamp not newer than history head");
        }
        for (const auto& entry : previous->firmware_history) {
            if (entry.version == new_install.version) {
                throw vc_error("version already present in history: " + new_install.version);
            }
        }
        vc.firmware_history.push_back(new_install);
        vc.firmware_history.insert(vc.firmware_history.end(), previous->firmware_history.begin(),
                                   previous->firmware_history.end());
        vc.reset_history = reset_history.empty() ? previous->reset_history
                                                 : std::move(reset_history);
    } else {
        vc.firmware_history.push_back(new_install);
        vc.reset_history = std::move(reset_history);
    }
    vc.proof = sign_credential(issuer_kp, canonical_bytes(vc));
    return vc;
}

VerificationResult verify_credential(const FirmwareCredential& vc, const did::Registry& registry) {
    return verify_impl(vc, registry);
}

VerificationResult verify_credential(const InverterCredential& vc, const did::Registry& registry) {
    return verify_impl(vc, registry);
}

std::string compact_encoding(const FirmwareCredential& vc) {
    if (!vc.proof) throw vc_error("cannot encode unsigned credential");
    return encode_token(to_json(vc, /*include_proof=*/false), *vc.proof);
}

std::string compact_encoding(const InverterCredential& vc) {
    if (!vc.proof) throw vc_error("cannot encode unsigned credential");
    return encode_token(to_json(vc, /*include_proof=*/false), *vc.proof);
}

FirmwareCredential decode_firmware(const std::string& token) {
    auto [payload, sig] = decode_token(token);
    FirmwareCredential vc = firmware_from_json(payload);
    vc.proof = sig;
    return vc;
}

InverterCredential decode_inverter(const std::string& token) {
    auto [payload, sig] = decode_token(token);
    InverterCredential vc = inverter_from_json(payload);
    vc.proof = sig;
    return vc;
}

}  // namespace ivt::vc
