#pragma once

// Emulation of the ManufacturerUpdate contract: manufacturer-gated append log
// of firmware credentials, event subscriptions with catch-up delivery, and the
// model-scoped update-list query.

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ivt/credentials.hpp"

namespace ivt::ledger {

struct ContractHandle {
    std::string contract_id;
    did::Did manufacturer;
    did::Did deployer;
    Timestamp deployed_at;
};

struct UpdateEvent {
    did::Did from;
    std::string version;
    std::vector<std::string> model_list;
    vc::FirmwareCredential credential;
    std::uint64_t sequence_no = 0;

    bool operator==(const UpdateEvent&) const = default;
};

enum class LedgerError {
    UnknownContract,
    NotManufacturer,
    BadSignature,
    InvalidCredential,
    ReplayedNonce,
};

const char* to_string(LedgerError e);

class ledger_error : public std::runtime_error {
public:
    ledger_error(LedgerError reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    LedgerError reason() const { return reason_; }

private:
    LedgerError reason_;
};

struct SaveUpdateRequest {
    vc::FirmwareCredential credential;
    did::Did sender;
    crypto::Nonce nonce;

    // Signing input for the sender: sha256 of these bytes.
    Bytes canonical_bytes() const;
};

struct UpdateListEntry {
    std::string version;
    Timestamp released_date;
    vc::UpdateType update_type;
};

class UpdateLedger {
public:
    explicit UpdateLedger(const did::Registry& registry) : registry_(registry) {}

    // deployer_sig is over sha256("deploy:" + manufacturer did) under the
    // manufacturer's authentication key.  The manufacturer identity is fixed
    // for the lifetime of the contract.
    ContractHandle deploy_contract(const did::Did& manufacturer,
                                   const crypto::Signature& deployer_sig, Timestamp now);

    // Append-only publish.  Checks, in order: contract exists; sender is the
    // deployed manufacturer (rejection message "Only manufacturer can push
    // updates"); sender signature over the request; credential Valid against
    // the registry; nonce unused on this contract.
    UpdateEvent save_update(const std::string& contract_id, const SaveUpdateRequest& request,
                            const crypto::Signature& sender_sig, Timestamp now);

    // Queues all logged events with sequence_no > from_sequence, then all
    // future events, in order.  Re-subscribing resets the queue.
    void subscribe(const std::string& contract_id, const std::string& subscriber_id,
                   std::uint64_t from_sequence);

    // Drains the subscriber's pending events.
    std::vector<UpdateEvent> poll(const std::string& contract_id, const std::string& subscriber_id);

    std::vector<UpdateListEntry> get_updates_for_model(const std::string& contract_id,
                                                       const std::string& model) const;

    const ContractHandle& handle(const std::string& contract_id) const;
    std::vector<std::pair<UpdateEvent, Timestamp>> log(const std::string& contract_id) const;
    size_t log_size(const std::string& contract_id) const;

private:
    struct Contract {
        ContractHandle handle;
        std::vector<std::pair<UpdateEvent, Timestamp>> entries;
        std::set<std::string> seen_nonces;
        std::map<std::string, std::deque<UpdateEvent>> subscriber_queues;
    };

    Contract& find(const std::string& contract_id);
    const Contract& find(const std::string& contract_id) const;

    const did::Registry& registry_;
    std::map<std::string, Contract> contracts_;
    std::uint64_t next_contract_ = 1;
};

}  // namespace ivt::ledger
