#pragma once

// VPP-operator-side trust computation: the trust-state calculation over an
// inverter's update history, interaction policy, and enrollment gatekeeping.
// All functions here are pure over immutable inputs.

#include <functional>
#include <map>

#include "ivt/credentials.hpp"

namespace ivt::trust {

enum class TrustState { Trustable, SemiTrust, Distrust };

const char* to_string(TrustState s);                      // "trustable" / "semi-trust" / "distrust"
std::optional<TrustState> trust_state_from_string(const std::string& s);

enum class Permission { FullControlAndData, DataWithUncertainty, None };

const char* to_string(Permission p);

struct AvailableUpdate {
    std::string version;
    Timestamp published;
    vc::UpdateType update_type = vc::UpdateType::Security;
};

using AvailableUpdateList = std::vector<AvailableUpdate>;  // ascending by publish time

struct TrustPolicy {
    Duration threshold_security = Duration::days(14);
    Duration threshold_other = Duration::days(60);
    // Advisory window for manufacturers leaving disclosed CVEs unpatched.
    Duration manufacturer_patch_window = Duration::days(90);
    std::map<TrustState, Permission> interaction_map = {
        {TrustState::Trustable, Permission::FullControlAndData},
        {TrustState::SemiTrust, Permission::DataWithUncertainty},
        {TrustState::Distrust, Permission::None},
    };

    Duration threshold_for(vc::UpdateType t) const {
        return t == vc::UpdateType::Security ? threshold_security : threshold_other;
    }

    nlohmann::ordered_json to_json() const;
    static TrustPolicy from_json(const nlohmann::ordered_json& j);
};

// Trust-state calculation.  If the credential carries a reset history, the
// update list is first restricted to updates published strictly after the
// latest reset.  A missed update forces distrust; an update installed at or
// after published + T is not timely (strict comparison: published + T must be
// later than the install time).
TrustState compute_trust_state(const vc::InverterCredential& vc,
                               const AvailableUpdateList& updates, Duration T);

// Same calculation with a per-update-type threshold drawn from the policy.
TrustState compute_trust_state(const vc::InverterCredential& vc,
                               const AvailableUpdateList& updates, const TrustPolicy& policy);

// Operator's own timeliness recomputation, independent of the credential's
// embedded timelyUpdated flag.
bool operator_timely_updated(const vc::InverterCredential& vc, const AvailableUpdateList& updates,
                             Duration T_operator);

Permission permitted_interactions(TrustState state, const TrustPolicy& policy);

struct Presentation {
    vc::InverterCredential credential;
    did::Did presenter;
    // Over sha256(canonical_bytes(credential) || presenter did).
    crypto::Signature presenter_sig;
};

Bytes presentation_signing_bytes(const vc::InverterCredential& credential,
                                 const did::Did& presenter);

struct EnrollmentDecision {
    bool accepted = false;
    TrustState trust = TrustState::Distrust;
    Permission permission = Permission::None;
    std::vector<std::string> reasons;
};

// Disclosure times of CVEs the operator knows are still unpatched; feeds the
// advisory-only manufacturer-unresponsive flag.
struct OperatorKnowledge {
    std::vector<Timestamp> open_cve_disclosures;
};

using LedgerQuery = std::function<AvailableUpdateList(const std::string& model)>;

// Checks in order: credential Valid (covers forged/mutated and revoked
// credentials) -> presenter is the credential's owner with a valid signature
// -> trust state from the model-scoped update list.  Accepted iff the trust
// state is not distrust and the policy grants a permission.
EnrollmentDecision evaluate_enrollment(const Presentation& presentation,
                                       const did::Registry& registry, const LedgerQuery& ledger,
                                       const std::string& model, const TrustPolicy& policy,
                                       Timestamp now, const OperatorKnowledge& knowledge = {});

}  // namespace ivt::trust
