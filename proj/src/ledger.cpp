#include "ivt/ledger.hpp"

#include <algorithm>

namespace ivt::ledger {

using nlohmann::ordered_json;

const char* to_string(LedgerError e) {
    switch (e) {
        case LedgerError::UnknownContract: return "UnknownContract";
        case LedgerError::NotManufacturer: return "NotManufacturer";
        case LedgerError::BadSignature: return "BadSignature";
        case LedgerError::InvalidCredential: return "InvalidCredential";
        case LedgerError::ReplayedNonce: return "ReplayedNonce";
    }
    return "?";
}

Bytes SaveUpdateRequest::canonical_bytes() const {
    ordered_json j;
    j["credential"] = vc::to_json(credential);
    j["sender"] = sender.rendered();
    j["nonce"] = nonce.hex();
    return to_bytes(j.dump());
}

ContractHandle UpdateLedger::deploy_contract(const did::Did& manufacturer,
                                             const crypto::Signature& deployer_sig,
                                             Timestamp now) {
    const did::DIDDocument& doc = registry_.resolve(manufacturer);
    auto key = doc.key_for(did::KeyPurpose::Authentication);
    auto digest = crypto::sha256(to_bytes("deploy:" + manufacturer.rendered()));
    if (!key || !crypto::verify(digest.bytes, deployer_sig, *key)) {
        throw ledger_error(LedgerError::BadSignature, "deployment signature invalid");
    }
    Contract contract;
    contract.handle = {"contract-" + std::to_string(next_contract_++), manufacturer, manufacturer,
                       now};
    std::string id = contract.handle.contract_id;
    contracts_.emplace(id, std::move(contract));
    return contracts_.at(id).handle;
}

UpdateEvent UpdateLedger::save_update(const std::string& contract_id,
                                      const SaveUpdateRequest& request,
                                      const crypto::Signature& sender_sig, Timestamp now) {
    Contract& contract = find(contract_id);
    if (request.sender != contract.handle.manufacturer) {
        throw ledger_error(LedgerError::NotManufacturer, "Only manufacturer can push updates");
    }
    std::optional<crypto::VerificationKey> key;
    if (registry_.contains(request.sender)) {
        key = registry_.resolve(request.sender).key_for(did::KeyPurpose::Authentication);
    }
    auto digest = crypto::sha256(request.canonical_bytes());
    if (!key || !crypto::verify(digest.bytes, sender_sig, *key)) {
        throw ledger_error(LedgerError::BadSignature, "request signature invalid");
    }
    auto result = vc::verify_credential(request.credential, registry_);
    if (!result.valid()) {
        throw ledger_error(LedgerError::InvalidCredential,
                           "credential not valid: " + std::string(to_string(result.status)));
    }
    if (!contract.seen_nonces.insert(request.nonce.hex()).second) {
        throw ledger_error(LedgerError::ReplayedNonce, "nonce already used on this contract");
    }

    UpdateEvent event;
    event.from = request.sender;
    event.version = request.credential.firmware_info.version;
    event.model_list = request.credential.supporting_models;
    event.credential = request.credential;
    event.sequence_no = contract.entries.size() + 1;
    contract.entries.emplace_back(event, now);
    for (auto& [_, queue] : contract.subscriber_queues) queue.push_back(event);
    return event;
}

void UpdateLedger::subscribe(const std::string& contract_id, const std::string& subscriber_id,
                             std::uint64_t from_sequence) {
    Contract& contract = find(contract_id);
    auto& queue = contract.subscriber_queues[subscriber_id];
    queue.clear();
    for (const auto& [event, _] : contract.entries) {
        if (event.sequence_no > from_sequence) queue.push_back(event);
    }
}

std::vector<UpdateEvent> UpdateLedger::poll(const std::string& contract_id,
                                            const std::string& subscriber_id) {
    Contract& contract = find(contract_id);
    auto it = contract.subscriber_queues.find(subscriber_id);
    if (it == contract.subscriber_queues.end()) return {};
    std::vector<UpdateEvent> out(it->second.begin(), it->second.end());
    it->second.clear();
    return out;
}

std::vector<UpdateListEntry> UpdateLedger::get_updates_for_model(const std::string& contract_id,
                                                                 const std::string& model) const {
    const Contract& contract = find(contract_id);
    std::vector<UpdateListEntry> out;
    for (const auto& [event, _] : contract.entries) {
        const auto& models = event.credential.supporting_models;
        if (std::find(models.begin(), models.end(), model) != models.end()) {
            out.push_back({event.version, event.credential.released_date,
                           event.credential.firmware_info.update_type});
        }
    }
    return out;
}

const ContractHandle& UpdateLedger::handle(const std::string& contract_id) const {
    return find(contract_id).handle;
}

std::vector<std::pair<UpdateEvent, Timestamp>> UpdateLedger::log(
    const std::string& contract_id) const {
    return find(contract_id).entries;
}

size_t UpdateLedger::log_size(const std::string& contract_id) const {
    return find(contract_id).entries.size();
}

UpdateLedger::Contract& UpdateLedger::find(const std::string& contract_id) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) {
        throw ledger_error(LedgerError::UnknownContract, "unknown contract: " + contract_id);
    }
    return it->second;
}

const UpdateLedger::Contract& UpdateLedger::find(const std::string& contract_id) const {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) {
        throw ledger_error(LedgerError::UnknownContract, "unknown contract: " + contract_id);
    }
    return it->second;
}

}  // namespace ivt::ledger
