#include "ivt/trust.hpp"

#include <algorithm>

namespace ivt::trust {

using nlohmann::ordered_json;

const char* to_string(TrustState s) {
    switch (s) {
        case TrustState::Trustable: return "trustable";
        case TrustState::SemiTrust: return "semi-trust";
        case TrustState::Distrust: return "distrust";
    }
    return "?";
}

std::optional<TrustState> trust_state_from_string(const std::string& s) {
    if (s == "trustable") return TrustState::Trustable;
    if (s == "semi-trust") return TrustState::SemiTrust;
    if (s == "distrust") return TrustState::Distrust;
    return std::nullopt;
}

const char* to_string(Permission p) {
    switch (p) {
        case Permission::FullControlAndData: return "FullControlAndData";
        case Permission::DataWithUncertainty: return "DataWithUncertainty";
        case Permission::None: return "None";
    }
    return "?";
}

ordered_json TrustPolicy::to_json() const {
    ordered_json map;
    for (const auto& [state, perm] : interaction_map) map[to_string(state)] = to_string(perm);
    return {{"threshold_days_security", threshold_security.secs / 86400},
            {"threshold_days_other", threshold_other.secs / 86400},
            {"manufacturer_patch_window_days", manufacturer_patch_window.secs / 86400},
            {"interaction_map", map}};
}

TrustPolicy TrustPolicy::from_json(const ordered_json& j) {
    TrustPolicy p;
    p.threshold_security = Duration::days(j.at("threshold_days_security").get<std::int64_t>());
    p.threshold_other = Duration::days(j.at("threshold_days_other").get<std::int64_t>());
    if (j.contains("manufacturer_patch_window_days")) {
        p.manufacturer_patch_window =
            Duration::days(j.at("manufacturer_patch_window_days").get<std::int64_t>());
    }
    if (j.contains("interaction_map")) {
        for (const auto& [key, value] : j.at("interaction_map").items()) {
            auto state = trust_state_from_string(key);
            if (!state) throw std::invalid_argument("bad trust state in policy: " + key);
            const std::string v = value.get<std::string>();
            Permission perm;
            if (v == "FullControlAndData") perm = Permission::FullControlAndData;
            else if (v == "DataWithUncertainty") perm = Permission::DataWithUncertainty;
            else if (v == "None") perm = Permission::None;
            else throw std::invalid_argument("bad permission in policy: " + v);
            p.interaction_map[*state] = perm;
        }
    }
    return p;
}

namespace {

template <typename ThresholdFn>
TrustState compute(const vc::InverterCredential& vc, const AvailableUpdateList& updates,
                   ThresholdFn threshold) {
    TrustState state = TrustState::Distrust;
    bool timely_updated = true;
    bool all_updates = true;

    AvailableUpdateList list = updates;
    if (!vc.reset_history.empty()) {
        Timestamp latest_reset = vc.reset_history.front();
        std::erase_if(list, [&](const AvailableUpdate& u) { return !(u.published > latest_reset); });
    }

    for (const AvailableUpdate& available : list) {
        bool missed_update = true;
        for (const vc::HistoryEntry& installed : vc.firmware_history) {
            if (available.version == installed.version) {
                missed_update = false;
                timely_updated = timely_updated &&
                                 (available.published + threshold(available) > installed.installed_at);
                break;
            }
        }
        all_updates = all_updates && !missed_update;
        if (missed_update) break;
    }

    if (all_updates) {
        state = timely_updated ? TrustState::Trustable : TrustState::SemiTrust;
    }
    return state;
}

}  // namespace

TrustState compute_trust_state(const vc::InverterCredential& vc, const AvailableUpdateList& updates,
                               Duration T) {
    return compute(vc, updates, [T](const AvailableUpdate&) { return T; });
}

TrustState compute_trust_state(const vc::InverterCredential& vc, const AvailableUpdateList& updates,
                               const TrustPolicy& policy) {
    return compute(vc, updates,
                   [&](const AvailableUpdate& u) { return policy.threshold_for(u.update_type); });
}

bool operator_timely_updated(const vc::InverterCredential& vc, const AvailableUpdateList& updates,
                             Duration T_operator) {
    bool timely = true;
    AvailableUpdateList list = updates;
    if (!vc.reset_history.empty()) {
        Timestamp latest_reset = vc.reset_history.front();
        std::erase_if(list, [&](const AvailableUpdate& u) { return !(u.published > latest_reset); });
    }
    for (const AvailableUpdate& available : list) {
        for (const vc::HistoryEntry& installed : vc.firmware_history) {
            if (available.version == installed.version) {
                timely = timely && (available.published + T_operator > installed.installed_at);
                break;
            }
        }
    }
    return timely;
}

Permission permitted_interactions(TrustState state, const TrustPolicy& policy) {
    auto it = policy.interaction_map.find(state);
    return it == policy.interaction_map.end() ? Permission::None : it->second;
}

Bytes presentation_signing_bytes(const vc::InverterCredential& credential,
                                 const did::Did& presenter) {
    Bytes msg = vc::canonical_bytes(credential);
    Bytes suffix = to_bytes(presenter.rendered());
    msg.insert(msg.end(), suffix.begin(), suffix.end());
    return msg;
}

EnrollmentDecision evaluate_enrollment(const Presentation& presentation,
                                       const did::Registry& registry, const LedgerQuery& ledger,
                                       const std::string& model, const TrustPolicy& policy,
                                       Timestamp now, const OperatorKnowledge& knowledge) {
    EnrollmentDecision decision;

    auto result = vc::verify_credential(presentation.credential, registry);
    if (!result.valid()) {
        decision.reasons.push_back(to_string(result.status));
        if (!result.detail.empty()) decision.reasons.push_back(result.detail);
        return decision;
    }

    if (presentation.presenter != presentation.credential.updatable.owner) {
        decision.reasons.push_back("NotOwner");
        return decision;
    }
    if (!registry.contains(presentation.presenter)) {
        decision.reasons.push_back("UnknownPresenter");
        return decision;
    }
    auto presenter_key =
        registry.resolve(presentation.presenter).key_for(did::KeyPurpose::Authentication);
    auto digest =
        crypto::sha256(presentation_signing_bytes(presentation.credential, presentation.presenter));
    if (!presenter_key ||
        !crypto::verify(digest.bytes, presentation.presenter_sig, *presenter_key)) {
        decision.reasons.push_back("BadPresenterSignature");
        return decision;
    }

    AvailableUpdateList updates = ledger(model);
    decision.trust = compute_trust_state(presentation.credential, updates, policy);
    decision.permission = permitted_interactions(decision.trust, policy);
    decision.accepted =
        decision.trust != TrustState::Distrust && decision.permission != Permission::None;
    decision.reasons.push_back(std::string("trust:") + to_string(decision.trust));

    // Advisory only: a manufacturer sitting on disclosed CVEs past the policy
    // window does not change the trust state.
    for (const Timestamp& disclosed : knowledge.open_cve_disclosures) {
        if (now > disclosed + policy.manufacturer_patch_window) {
            decision.reasons.push_back("advisory:manufacturer-unpatched-cves");
            break;
        }
    }
    return decision;
}

}  // namespace ivt::trust
