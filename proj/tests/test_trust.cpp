#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ivt/trust.hpp"

#include "trust_reference.hpp"
#include "helpers.hpp"

using namespace ivt;
using testutil::make_history_credential;

namespace {

Timestamp ts(const char* iso) { return Timestamp::parse(iso); }

// Listing-style three-entry history, newest first.
std::vector<vc::HistoryEntry> listing_history() {
    return {{"v2.0", ts("2023-04-01T08:11:12Z")},
            {"v1.8", ts("2022-11-17T16:34:20Z")},
            {"v1.0", ts("2022-01-29T02:56:43Z")}};
}

std::string run_reference(const testutil::TrustInstance& inst) {
    std::vector<std::pair<std::string, long long>> installs;
    for (const auto& e : inst.credential.firmware_history) {
        installs.emplace_back(e.version, e.installed_at.secs);
    }
    std::vector<long long> resets;
    for (const auto& r : inst.credential.reset_history) resets.push_back(r.secs);
    std::vector<std::pair<std::string, long long>> updates;
    for (const auto& u : inst.updates) updates.emplace_back(u.version, u.published.secs);
    return trust_state_reference(installs, resets, updates, inst.T.secs);
}

}  // namespace

TEST_CASE("empty update list is trustable") {
    auto vc = make_history_credential(listing_history());
    CHECK(trust::compute_trust_state(vc, {}, Duration::days(7)) == trust::TrustState::Trustable);
    // Even with an empty install history.
    auto fresh = make_history_credential({{"v1.0", ts("2022-01-29T02:56:43Z")}});
    CHECK(trust::compute_trust_state(fresh, {}, Duration::days(7)) ==
          trust::TrustState::Trustable);
}

TEST_CASE("timely installs one day after publication are trustable") {
    auto vc = make_history_credential(listing_history());
    trust::AvailableUpdateList updates = {
        {"v1.0", ts("2022-01-28T02:56:43Z"), vc::UpdateType::Security},
        {"v1.8", ts("2022-11-16T16:34:20Z"), vc::UpdateType::Security},
        {"v2.0", ts("2023-03-31T08:11:12Z"), vc::UpdateType::Security},
    };
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::Trustable);
}

TEST_CASE("an uninstalled v2.1 forces distrust") {
    auto vc = make_history_credential(listing_history());
    trust::AvailableUpdateList updates = {
        {"v1.0", ts("2022-01-28T02:56:43Z"), vc::UpdateType::Security},
        {"v1.8", ts("2022-11-16T16:34:20Z"), vc::UpdateType::Security},
        {"v2.0", ts("2023-03-31T08:11:12Z"), vc::UpdateType::Security},
        {"v2.1", ts("2023-05-01T00:00:00Z"), vc::UpdateType::Security},
    };
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::Distrust);
    // Regardless of threshold.
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(10000)) ==
          trust::TrustState::Distrust);
}

TEST_CASE("a late v1.8 install degrades to semi-trust") {
    auto vc = make_history_credential(listing_history());
    trust::AvailableUpdateList updates = {
        {"v1.0", ts("2022-01-28T02:56:43Z"), vc::UpdateType::Security},
        {"v1.8", ts("2022-10-18T16:34:20Z"), vc::UpdateType::Security},  // 30 days before install
        {"v2.0", ts("2023-03-31T08:11:12Z"), vc::UpdateType::Security},
    };
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::SemiTrust);
}

TEST_CASE("install at exactly published + T is not timely") {
    auto vc = make_history_credential({{"v1.1", ts("2023-01-08T00:00:00Z")}});
    trust::AvailableUpdateList updates = {
        {"v1.1", ts("2023-01-01T00:00:00Z"), vc::UpdateType::Security}};
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::SemiTrust);
    // One second earlier is timely.
    vc.firmware_history[0].installed_at.secs -= 1;
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::Trustable);
}

TEST_CASE("reset truncation drops pre-reset updates") {
    auto vc = make_history_credential({{"v2.0", ts("2023-03-02T00:00:00Z")}},
                                      {ts("2023-02-01T00:00:00Z")});
    trust::AvailableUpdateList updates = {
        {"v1.5", ts("2023-01-10T00:00:00Z"), vc::UpdateType::Security},  // pre-reset, never installed
        {"v2.0", ts("2023-03-01T00:00:00Z"), vc::UpdateType::Security},
    };
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::Trustable);
    // Without the reset the missing v1.5 would dominate.
    vc.reset_history.clear();
    CHECK(trust::compute_trust_state(vc, updates, Duration::days(7)) ==
          trust::TrustState::Distrust);
}

TEST_CASE("reference equivalence on randomized instances") {
    crypto::Rng rng(20230);
    size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 10000; ++i) {
        auto inst = testutil::random_trust_instance(rng);
        auto got = trust::compute_trust_state(inst.credential, inst.updates, inst.T);
        CHECK(trust::to_string(got) == run_reference(inst));
        counts[static_cast<int>(got)]++;
    }
    // The generator must exercise every state.
    CHECK(counts[0] > 0);
    CHECK(counts[1] > 0);
    CHECK(counts[2] > 0);
}

TEST_CASE("threshold monotonicity") {
    crypto::Rng rng(555);
    for (int i = 0; i < 1000; ++i) {
        auto inst = testutil::random_trust_instance(rng);
        Duration t1 = inst.T;
        Duration t2{inst.T.secs + static_cast<std::int64_t>(rng.below(90)) * 86400};
        auto s1 = trust::compute_trust_state(inst.credential, inst.updates, t1);
        auto s2 = trust::compute_trust_state(inst.credential, inst.updates, t2);
        if (s1 == trust::TrustState::Trustable) CHECK(s2 == trust::TrustState::Trustable);
        CHECK((s1 == trust::TrustState::Distrust) == (s2 == trust::TrustState::Distrust));
    }
}

TEST_CASE("missed-update dominance") {
    crypto::Rng rng(777);
    for (int i = 0; i < 1000; ++i) {
        auto inst = testutil::random_trust_instance(rng);
        auto with_extra = inst.updates;
        Timestamp late{inst.credential.reset_history.empty()
                           ? 2'000'000'000
                           : inst.credential.reset_history.front().secs + 86400};
        with_extra.push_back({"v99.9", late, vc::UpdateType::Security});
        CHECK(trust::compute_trust_state(inst.credential, with_extra, inst.T) ==
              trust::TrustState::Distrust);
    }
}

TEST_CASE("prepending pre-reset updates never changes the result") {
    crypto::Rng rng(888);
    for (int i = 0; i < 1000; ++i) {
        auto inst = testutil::random_trust_instance(rng);
        if (inst.credential.reset_history.empty()) {
            inst.credential.reset_history.push_back({1'600'000'000});
        }
        auto baseline = trust::compute_trust_state(inst.credential, inst.updates, inst.T);
        auto padded = inst.updates;
        Timestamp before{inst.credential.reset_history.front().secs -
                         1 - static_cast<std::int64_t>(rng.below(86400))};
        padded.insert(padded.begin(), {"v0.0." + std::to_string(i), before,
                                       vc::UpdateType::Security});
        CHECK(trust::compute_trust_state(inst.credential, padded, inst.T) == baseline);
    }
}

TEST_CASE("operator timeliness is independent of the embedded flag") {
    auto vc = make_history_credential({{"v1.1", ts("2023-01-10T00:00:00Z")}});
    vc.updatable.timely_updated = true;  // manufacturer's verdict under its own T
    trust::AvailableUpdateList updates = {
        {"v1.1", ts("2023-01-01T00:00:00Z"), vc::UpdateType::Security}};
    CHECK(trust::operator_timely_updated(vc, updates, Duration::days(14)));
    CHECK_FALSE(trust::operator_timely_updated(vc, updates, Duration::days(7)));
    CHECK(trust::operator_timely_updated(vc, {}, Duration::days(1)));
}

TEST_CASE("interaction policy map") {
    trust::TrustPolicy policy;
    CHECK(trust::permitted_interactions(trust::TrustState::Trustable, policy) ==
          trust::Permission::FullControlAndData);
    CHECK(trust::permitted_interactions(trust::TrustState::SemiTrust, policy) ==
          trust::Permission::DataWithUncertainty);
    CHECK(trust::permitted_interactions(trust::TrustState::Distrust, policy) ==
          trust::Permission::None);
}

TEST_CASE("policy json roundtrip") {
    trust::TrustPolicy policy;
    policy.threshold_security = Duration::days(7);
    policy.threshold_other = Duration::days(30);
    auto back = trust::TrustPolicy::from_json(policy.to_json());
    CHECK(back.threshold_security == policy.threshold_security);
    CHECK(back.threshold_other == policy.threshold_other);
    CHECK(back.interaction_map == policy.interaction_map);
}

TEST_CASE("per-type thresholds pick the security window for security updates") {
    auto vc = make_history_credential({{"v1.1", ts("2023-01-31T00:00:00Z")}});  // 30 days late
    trust::AvailableUpdateList updates = {
        {"v1.1", ts("2023-01-01T00:00:00Z"), vc::UpdateType::Security}};
    trust::TrustPolicy policy;  // 14 days security, 60 otherwise
    CHECK(trust::compute_trust_state(vc, updates, policy) == trust::TrustState::SemiTrust);
    updates[0].update_type = vc::UpdateType::Feature;
    CHECK(trust::compute_trust_state(vc, updates, policy) == trust::TrustState::Trustable);
}
