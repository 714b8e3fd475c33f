#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ivt/actors.hpp"

using namespace ivt;
using namespace ivt::actors;

namespace {

struct Stage {
    World world{4242};
    Manufacturer manufacturer{world, "acme", Timestamp::parse("2023-01-01T00:00:00Z")};
    Owner owner{world, "olivia", Timestamp::parse("2023-01-01T00:00:00Z")};
    std::unique_ptr<Inverter> inverter;

    Stage() {
        auto owner_did = owner.did();
        inverter = manufacturer.manufacture_inverter(
            world, "SP-PRO", "SN-001", Timestamp::parse("2023-01-01T00:00:00Z"), &owner_did);
        manufacturer.transfer_ownership(world, *inverter, owner.did(),
                                        Timestamp::parse("2023-01-01T00:00:00Z"));
    }

    ledger::UpdateEvent publish(const std::string& version, Timestamp now,
                                std::vector<std::string> models = {"SP-PRO"}) {
        Bytes binary(1024);
        world.rng.fill(binary);
        auto image = FirmwareImage::make(std::move(models), version, std::move(binary));
        return manufacturer.publish_firmware(world, image, vc::UpdateType::Security, {}, now)
            .second;
    }
};

}  // namespace

TEST_CASE("version ordering") {
    CHECK(version_less("v1.0", "v1.1"));
    CHECK(version_less("v1.8.3", "v2.0"));
    CHECK(version_less("1.9", "v1.10"));
    CHECK_FALSE(version_less("v2.0", "v2.0"));
    CHECK_FALSE(version_less("v2.0", "v2"));
    CHECK(version_less("v2", "v2.0.1"));
}

TEST_CASE("proof value json roundtrip") {
    ProofValue proof{"v1.2", Timestamp::parse("2023-02-03T10:00:00Z"), true,
                     crypto::sha256(to_bytes("mac"))};
    auto back = ProofValue::from_json(proof.to_json());
    CHECK(back.version == proof.version);
    CHECK(back.install_timestamp == proof.install_timestamp);
    CHECK(back.reset == proof.reset);
    CHECK(back.mac == proof.mac);
}

TEST_CASE("publish, poll, renew: the full protocol round") {
    Stage s;
    auto t1 = Timestamp::parse("2023-01-10T09:00:00Z");
    s.publish("v1.1", t1);

    auto t2 = Timestamp::parse("2023-01-12T10:00:00Z");
    auto outcomes = s.inverter->poll_updates(s.world, t2);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0] == InstallOutcome::Installed);
    CHECK(s.inverter->installed_version() == "v1.1");
    CHECK(s.inverter->has_pending_proof());

    std::string old_id = s.inverter->wallet().current_credential()->id;
    auto request = s.owner.request_new_vc(s.world, *s.inverter, s.manufacturer.did(), t2);
    auto result = s.manufacturer.handle_vc_request(s.world, request, t2);
    REQUIRE(std::holds_alternative<Bytes>(result));
    CHECK(s.owner.install_vc(s.world, *s.inverter, std::get<Bytes>(result), t2) ==
          InstallVcOutcome::Ok);

    const auto* renewed = s.inverter->wallet().current_credential();
    REQUIRE(renewed != nullptr);
    CHECK(s.inverter->wallet().inverter_credentials.size() == 1);
    CHECK(renewed->updatable.software_version == "v1.1");
    CHECK(renewed->updatable.owner == s.owner.did());
    CHECK(renewed->firmware_history.size() == 2);
    CHECK(vc::verify_credential(*renewed, s.world.registry).valid());
    CHECK(s.world.registry.is_revoked(s.manufacturer.did(), old_id));
    CHECK_FALSE(s.inverter->has_pending_proof());

    // Replaying the response trips the nonce check.
    CHECK(s.owner.install_vc(s.world, *s.inverter, std::get<Bytes>(result), t2) ==
          InstallVcOutcome::ReplayAlarm);
    // Replaying the request trips on the now-revoked embedded credential.
    auto replayed = s.manufacturer.handle_vc_request(s.world, request, t2);
    REQUIRE(std::holds_alternative<Rejection>(replayed));
    CHECK(std::get<Rejection>(replayed) == Rejection::InvalidCredential);
    // With no pending proof, a fresh request cannot even be built.
    CHECK_THROWS_AS(s.owner.request_new_vc(s.world, *s.inverter, s.manufacturer.did(), t2),
                    std::runtime_error);
}

TEST_CASE("model and version gating on update events") {
    Stage s;
    auto t = Timestamp::parse("2023-01-10T09:00:00Z");
    auto foreign = s.publish("v3.0", t, {"OTHER-MODEL"});
    CHECK(s.inverter->handle_update_event(s.world, foreign, t) == InstallOutcome::IgnoredModel);

    auto current = s.publish("v1.1", Timestamp::parse("2023-01-11T09:00:00Z"));
    CHECK(s.inverter->handle_update_event(s.world, current,
                                          Timestamp::parse("2023-01-12T09:00:00Z")) ==
          InstallOutcome::Installed);
    // Downgrades and re-installs are ignored.
    CHECK(s.inverter->handle_update_event(s.world, current,
                                          Timestamp::parse("2023-01-13T09:00:00Z")) ==
          InstallOutcome::IgnoredVersion);
}

TEST_CASE("tampered binaries never install") {
    Stage s;
    s.world.network.set_tamper(UpdateServer::kName, s.inverter->name(), [](const Bytes& b) {
        Bytes out = b;
        out[0] ^= 0xff;
        return out;
    });
    s.publish("v1.1", Timestamp::parse("2023-01-10T09:00:00Z"));
    auto outcomes = s.inverter->poll_updates(s.world, Timestamp::parse("2023-01-11T09:00:00Z"));
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0] == InstallOutcome::HashMismatch);
    CHECK(s.inverter->installed_version() == "v1.0");
    CHECK_FALSE(s.inverter->has_pending_proof());
}

TEST_CASE("factory reset produces a usable reset proof") {
    Stage s;
    s.publish("v1.1", Timestamp::parse("2023-01-10T09:00:00Z"));
    s.inverter->poll_updates(s.world, Timestamp::parse("2023-01-11T09:00:00Z"));
    auto t_renew = Timestamp::parse("2023-01-11T10:00:00Z");
    auto request = s.owner.request_new_vc(s.world, *s.inverter, s.manufacturer.did(), t_renew);
    s.owner.install_vc(s.world, *s.inverter,
                       std::get<Bytes>(s.manufacturer.handle_vc_request(s.world, request,
                                                                        t_renew)),
                       t_renew);

    auto t_reset = Timestamp::parse("2023-02-01T08:00:00Z");
    auto proof = s.inverter->factory_reset(t_reset);
    CHECK(proof.reset);
    CHECK(s.inverter->installed_version() == "v1.0");
    CHECK(s.inverter->install_log().size() == 1);

    auto t2 = Timestamp::parse("2023-02-02T08:00:00Z");
    auto reset_request = s.owner.request_new_vc(s.world, *s.inverter, s.manufacturer.did(), t2);
    auto result = s.manufacturer.handle_vc_request(s.world, reset_request, t2);
    REQUIRE(std::holds_alternative<Bytes>(result));
    CHECK(s.owner.install_vc(s.world, *s.inverter, std::get<Bytes>(result), t2) ==
          InstallVcOutcome::Ok);
    const auto* credential = s.inverter->wallet().current_credential();
    REQUIRE(credential != nullptr);
    CHECK(credential->updatable.software_version == "v1.0");
    CHECK(credential->firmware_history.size() == 1);
    REQUIRE(credential->reset_history.size() == 1);
    CHECK(credential->reset_history.front() == t_reset);
}

TEST_CASE("offline installs feed the same renewal path") {
    Stage s;
    auto t_pub = Timestamp::parse("2023-01-10T09:00:00Z");
    auto event = s.publish("v1.1", t_pub);
    auto binary = s.world.server.fetch(s.manufacturer.update_link("v1.1"));
    REQUIRE(binary.has_value());

    auto t = Timestamp::parse("2023-01-12T09:00:00Z");
    CHECK(s.inverter->install_offline(s.world, *binary, event.credential, t) ==
          InstallOutcome::Installed);
    // A corrupted sneakernet copy is refused.
    Bytes corrupted = *binary;
    corrupted[0] ^= 1;
    CHECK(s.inverter->install_offline(s.world, corrupted, event.credential, t) ==
          InstallOutcome::IgnoredVersion);  // version gate fires first after install
    auto request = s.owner.request_new_vc(s.world, *s.inverter, s.manufacturer.did(), t);
    auto result = s.manufacturer.handle_vc_request(s.world, request, t);
    CHECK(std::holds_alternative<Bytes>(result));
}

TEST_CASE("capture jsonl carries digests, not payloads") {
    Stage s;
    s.publish("v1.1", Timestamp::parse("2023-01-10T09:00:00Z"));
    auto jsonl = s.world.network.capture_jsonl();
    CHECK(jsonl.find("payload_digest") != std::string::npos);
    CHECK(jsonl.find("payload\"") == std::string::npos);
    for (const auto& record : s.world.network.capture()) {
        auto line = nlohmann::ordered_json::parse(
            jsonl.substr(0, jsonl.find('\n')));
        CHECK(line.contains("payload_size"));
        (void)record;
        break;
    }
}

TEST_CASE("wrong-audience and garbage requests are rejected cleanly") {
    Stage s;
    auto t = Timestamp::parse("2023-01-10T09:00:00Z");
    auto garbage = s.manufacturer.handle_vc_request(s.world, Bytes(64, 0xab), t);
    REQUIRE(std::holds_alternative<Rejection>(garbage));
    CHECK(std::get<Rejection>(garbage) == Rejection::DecryptFailed);

    // A valid envelope holding junk.
    auto key = s.world.registry.resolve(s.manufacturer.did())
                   .key_for(did::KeyPurpose::Authentication);
    auto envelope = crypto::encrypt_for(*key, to_bytes("{\"msg\":\"nope\"}"), s.world.rng);
    auto malformed = s.manufacturer.handle_vc_request(s.world, envelope.serialize(), t);
    REQUIRE(std::holds_alternative<Rejection>(malformed));
    CHECK(std::get<Rejection>(malformed) == Rejection::MalformedRequest);
}
