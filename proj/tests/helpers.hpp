#pragma once

// Shared builders for test suites.

#include <string>
#include <vector>

#include "ivt/crypto.hpp"
#include "ivt/trust.hpp"

namespace testutil {

// Unsigned credential whose history is the given (version, install time) list,
// newest first.  Good enough for the pure trust computation.
inline ivt::vc::InverterCredential make_history_credential(
    const std::vector<ivt::vc::HistoryEntry>& history_newest_first,
    const std::vector<ivt::Timestamp>& resets_newest_first = {}) {
    ivt::vc::InverterCredential vc;
    vc.id = "vc:test:history";
    vc.issuer = {"sim", "issuer"};
    vc.immutable.inverter_id = {"sim", "inverter"};
    vc.immutable.serial_no = "SN-TEST";
    vc.updatable.owner = {"sim", "owner"};
    vc.firmware_history = history_newest_first;
    if (!history_newest_first.empty()) {
        vc.updatable.software_version = history_newest_first.front().version;
        vc.issuance_date = history_newest_first.front().installed_at;
    }
    vc.reset_history = resets_newest_first;
    return vc;
}

struct TrustInstance {
    ivt::vc::InverterCredential credential;
    ivt::trust::AvailableUpdateList updates;
    ivt::Duration T;
};

// Randomized trust-evaluation instance: up to 6 published updates with
// ascending times, a random subset installed at random offsets, optional
// resets, random threshold.
inline TrustInstance random_trust_instance(ivt::crypto::Rng& rng) {
    TrustInstance inst;
    const long long base = 1'600'000'000;
    size_t n_updates = rng.below(7);  // 0..6
    long long t = base;
    std::vector<ivt::vc::HistoryEntry> installs;
    for (size_t i = 0; i < n_updates; ++i) {
        t += 1 + static_cast<long long>(rng.below(40)) * 86400;
        std::string version = "v" + std::to_string(i + 1) + "." + std::to_string(rng.below(4));
        inst.updates.push_back(
            {version, {t}, rng.below(2) ? ivt::vc::UpdateType::Security : ivt::vc::UpdateType::Bug});
        if (rng.below(100) < 75) {  // installed with a random offset
            long long offset = static_cast<long long>(rng.below(30 * 86400)) -
                               static_cast<long long>(rng.below(3600));
            installs.push_back({version, {t + offset}});
        }
    }
    // Occasionally install something never published.
    if (rng.below(100) < 20) installs.push_back({"v0.9", {base - 1000}});
    // Newest first.
    std::sort(installs.begin(), installs.end(),
              [](const auto& a, const auto& b) { return a.installed_at > b.installed_at; });
    std::vector<ivt::Timestamp> resets;
    if (rng.below(100) < 30) {
        size_t n_resets = 1 + rng.below(3);
        for (size_t i = 0; i < n_resets; ++i) {
            resets.push_back({base + static_cast<long long>(rng.below(200 * 86400))});
        }
        std::sort(resets.begin(), resets.end(), std::greater<>());
    }
    inst.credential = make_history_credential(installs, resets);
    inst.T = ivt::Duration{static_cast<long long>(1 + rng.below(60)) * 86400};
    return inst;
}

}  // namespace testutil
