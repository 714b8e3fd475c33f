#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ivt/ledger.hpp"

using namespace ivt;

namespace {

struct Fixture {
    crypto::Rng rng{777};
    did::Registry registry;
    ledger::UpdateLedger updates{registry};
    crypto::KeyPair manufacturer_kp;
    did::Did manufacturer{"sim", "manufacturer"};
    std::string contract;

    Fixture() {
        manufacturer_kp = crypto::KeyPair::generate(rng);
        registry.register_document(
            did::DIDDocument::for_keypair(manufacturer, manufacturer_kp, {}));
        auto digest = crypto::sha256(to_bytes("deploy:" + manufacturer.rendered()));
        contract = updates
                       .deploy_contract(manufacturer, manufacturer_kp.sign(digest.bytes),
                                        Timestamp{0})
                       .contract_id;
    }

    vc::FirmwareCredential make_credential(const std::string& version, Timestamp now) {
        vc::FirmwareMetadata meta;
        meta.version = version;
        meta.binary_hash = crypto::sha256(to_bytes("binary-" + version));
        meta.released_date = now;
        meta.link = "sim://updates/" + version;
        meta.supporting_models = {"SP-PRO"};
        return vc::issue_firmware_credential(manufacturer_kp, manufacturer,
                                             "vc:fw:" + version, now, meta);
    }

    ledger::UpdateEvent publish(const std::string& version, Timestamp now) {
        ledger::SaveUpdateRequest request{make_credential(version, now), manufacturer,
                                          rng.nonce()};
        auto sig = manufacturer_kp.sign(crypto::sha256(request.canonical_bytes()).bytes);
        return updates.save_update(contract, request, sig, now);
    }
};

}  // namespace

TEST_CASE("deploy requires the manufacturer's signature") {
    Fixture f;
    auto stranger = crypto::KeyPair::generate(f.rng);
    auto digest = crypto::sha256(to_bytes("deploy:" + f.manufacturer.rendered()));
    CHECK_THROWS_AS(
        f.updates.deploy_contract(f.manufacturer, stranger.sign(digest.bytes), Timestamp{0}),
        ledger::ledger_error);
    CHECK(f.updates.handle(f.contract).manufacturer == f.manufacturer);
}

TEST_CASE("appends are sequenced without gaps") {
    Fixture f;
    for (int i = 1; i <= 5; ++i) {
        auto event = f.publish("v1." + std::to_string(i), Timestamp{i * 1000});
        CHECK(event.sequence_no == static_cast<std::uint64_t>(i));
    }
    CHECK(f.updates.log_size(f.contract) == 5);
    auto log = f.updates.log(f.contract);
    for (size_t i = 0; i < log.size(); ++i) CHECK(log[i].first.sequence_no == i + 1);
}

TEST_CASE("non-manufacturer publishes are rejected with the exact reason") {
    Fixture f;
    for (int i = 0; i < 1000; ++i) {
        auto attacker = crypto::KeyPair::generate(f.rng);
        did::Did attacker_did{"sim", "attacker" + std::to_string(i)};
        f.registry.register_document(
            did::DIDDocument::for_keypair(attacker_did, attacker, {}));
        vc::FirmwareMetadata meta;
        meta.version = "v9." + std::to_string(i);
        meta.binary_hash = crypto::sha256(to_bytes("evil"));
        meta.released_date = Timestamp{500};
        meta.supporting_models = {"SP-PRO"};
        auto credential = vc::issue_firmware_credential(attacker, attacker_did,
                                                        "vc:evil:" + std::to_string(i),
                                                        Timestamp{500}, meta);
        ledger::SaveUpdateRequest request{credential, attacker_did, f.rng.nonce()};
        auto sig = attacker.sign(crypto::sha256(request.canonical_bytes()).bytes);
        try {
            f.updates.save_update(f.contract, request, sig, Timestamp{600});
            FAIL("accepted a non-manufacturer publish");
        } catch (const ledger::ledger_error& e) {
            CHECK(e.reason() == ledger::LedgerError::NotManufacturer);
            CHECK(std::string(e.what()) == "Only manufacturer can push updates");
        }
    }
    CHECK(f.updates.log_size(f.contract) == 0);
}

TEST_CASE("bad sender signature, invalid credential, and nonce replay are rejected") {
    Fixture f;
    auto now = Timestamp{1000};

    ledger::SaveUpdateRequest request{f.make_credential("v1.1", now), f.manufacturer,
                                      f.rng.nonce()};
    auto stranger = crypto::KeyPair::generate(f.rng);
    CHECK_THROWS_AS(
        f.updates.save_update(f.contract, request,
                              stranger.sign(crypto::sha256(request.canonical_bytes()).bytes),
                              now),
        ledger::ledger_error);

    auto tampered = request;
    tampered.credential.firmware_info.version = "v6.6";  // breaks the issuer proof
    CHECK_THROWS_AS(
        f.updates.save_update(f.contract, tampered,
                              f.manufacturer_kp.sign(
                                  crypto::sha256(tampered.canonical_bytes()).bytes),
                              now),
        ledger::ledger_error);

    auto sig = f.manufacturer_kp.sign(crypto::sha256(request.canonical_bytes()).bytes);
    f.updates.save_update(f.contract, request, sig, now);
    auto replay = request;
    replay.credential = f.make_credential("v1.2", now);  // same nonce, fresh credential
    CHECK_THROWS_AS(
        f.updates.save_update(f.contract, replay,
                              f.manufacturer_kp.sign(
                                  crypto::sha256(replay.canonical_bytes()).bytes),
                              now),
        ledger::ledger_error);
    CHECK(f.updates.log_size(f.contract) == 1);

    CHECK_THROWS_AS(f.updates.save_update("contract-404", request, sig, now),
                    ledger::ledger_error);
}

TEST_CASE("subscriptions deliver catch-up plus future events in order") {
    Fixture f;
    f.publish("v1.1", Timestamp{1000});
    f.publish("v1.2", Timestamp{2000});

    f.updates.subscribe(f.contract, "late-joiner", 0);
    auto events = f.updates.poll(f.contract, "late-joiner");
    REQUIRE(events.size() == 2);
    CHECK(events[0].version == "v1.1");
    CHECK(events[1].version == "v1.2");
    CHECK(f.updates.poll(f.contract, "late-joiner").empty());

    f.publish("v1.3", Timestamp{3000});
    events = f.updates.poll(f.contract, "late-joiner");
    REQUIRE(events.size() == 1);
    CHECK(events[0].version == "v1.3");

    // Partial catch-up and re-subscribe reset.
    f.updates.subscribe(f.contract, "partial", 2);
    events = f.updates.poll(f.contract, "partial");
    REQUIRE(events.size() == 1);
    CHECK(events[0].version == "v1.3");
    f.updates.subscribe(f.contract, "partial", 0);
    CHECK(f.updates.poll(f.contract, "partial").size() == 3);
}

TEST_CASE("model-scoped update list") {
    Fixture f;
    auto now = Timestamp{1000};
    auto pro = f.make_credential("v1.1", now);
    ledger::SaveUpdateRequest r1{pro, f.manufacturer, f.rng.nonce()};
    f.updates.save_update(f.contract, r1,
                          f.manufacturer_kp.sign(crypto::sha256(r1.canonical_bytes()).bytes),
                          now);

    vc::FirmwareMetadata meta;
    meta.version = "v2.0";
    meta.binary_hash = crypto::sha256(to_bytes("other"));
    meta.released_date = Timestamp{2000};
    meta.supporting_models = {"SP-LITE"};
    auto lite = vc::issue_firmware_credential(f.manufacturer_kp, f.manufacturer, "vc:fw:lite",
                                              Timestamp{2000}, meta);
    ledger::SaveUpdateRequest r2{lite, f.manufacturer, f.rng.nonce()};
    f.updates.save_update(f.contract, r2,
                          f.manufacturer_kp.sign(crypto::sha256(r2.canonical_bytes()).bytes),
                          Timestamp{2000});

    auto pro_list = f.updates.get_updates_for_model(f.contract, "SP-PRO");
    REQUIRE(pro_list.size() == 1);
    CHECK(pro_list[0].version == "v1.1");
    auto lite_list = f.updates.get_updates_for_model(f.contract, "SP-LITE");
    REQUIRE(lite_list.size() == 1);
    CHECK(lite_list[0].version == "v2.0");
    CHECK(f.updates.get_updates_for_model(f.contract, "UNKNOWN").empty());
}
