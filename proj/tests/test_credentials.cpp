#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "ivt/credentials.hpp"

using namespace ivt;

namespace {

struct Issuer {
    crypto::KeyPair kp;
    did::Did id{"sim", "issuer"};
    did::Registry registry;

    Issuer() {
        crypto::Rng rng(31337);
        kp = crypto::KeyPair::generate(rng);
        registry.register_document(did::DIDDocument::for_keypair(id, kp, {}));
    }
};

vc::FirmwareMetadata sample_metadata() {
    vc::FirmwareMetadata meta;
    meta.version = "v2.0";
    meta.binary_hash = crypto::sha256(to_bytes("binary"));
    meta.update_type = vc::UpdateType::Security;
    meta.released_date = Timestamp::parse("2023-03-31T08:11:12Z");
    meta.link = "sim://updates/sp-pro/v2.0";
    meta.associated_cves = {"CVE-2023-1111"};
    meta.supporting_models = {"SP-PRO", "SP-LITE"};
    return meta;
}

vc::InverterStateFields sample_state() {
    vc::InverterStateFields state;
    state.inverter_id = {"sim", "inverter1"};
    state.serial_no = "SN-123";
    state.manufactured_date = Timestamp::parse("2022-01-01T00:00:00Z");
    state.owner = {"sim", "owner1"};
    return state;
}

}  // namespace

TEST_CASE("firmware credential issue, serialize, verify") {
    Issuer issuer;
    auto fw = vc::issue_firmware_credential(issuer.kp, issuer.id, "vc:fw:1",
                                            Timestamp::parse("2023-03-31T08:11:12Z"),
                                            sample_metadata());
    auto j = vc::to_json(fw);
    CHECK(j.at("issuer") == "did:sim:issuer");
    CHECK(j.at("credentialSubject").at("firmwareInfo").at("version") == "v2.0");
    CHECK(j.at("credentialSubject").at("firmwareInfo").at("type") == "security");
    CHECK(j.at("credentialSubject").at("supportingModels").size() == 2);
    CHECK(j.at("type")[1] == "FirmwareVC");
    CHECK(vc::firmware_from_json(j) == fw);
    CHECK(vc::verify_credential(fw, issuer.registry).valid());

    auto meta = sample_metadata();
    meta.version = "";
    CHECK_THROWS_AS(vc::issue_firmware_credential(issuer.kp, issuer.id, "vc:fw:2",
                                                  meta.released_date, meta),
                    vc::vc_error);
    meta = sample_metadata();
    meta.supporting_models.clear();
    CHECK_THROWS_AS(vc::issue_firmware_credential(issuer.kp, issuer.id, "vc:fw:3",
                                                  meta.released_date, meta),
                    vc::vc_error);
}

TEST_CASE("inverter credential layout matches the published field names") {
    Issuer issuer;
    auto first = vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:inv:1",
                                               Timestamp::parse("2022-01-29T02:56:43Z"),
                                               sample_state(),
                                               {"v1.0", Timestamp::parse("2022-01-29T02:56:43Z")},
                                               nullptr);
    auto j = vc::to_json(first);
    const auto& subject = j.at("credentialSubject");
    CHECK(subject.at("immutable").at("serialNo") == "SN-123");
    CHECK(subject.at("updatable").at("owner") == "did:sim:owner1");
    CHECK(subject.at("updatable").at("softwareVersion") == "v1.0");
    CHECK(subject.at("firmwareHistory").at("v1.0") == "2022-01-29T02:56:43Z");
    CHECK(subject.at("resetHistory").is_array());
    CHECK(vc::inverter_from_json(j) == first);
    CHECK(vc::verify_credential(first, issuer.registry).valid());
}

TEST_CASE("history chains stay newest-first and reject non-monotonic installs") {
    Issuer issuer;
    auto state = sample_state();
    Timestamp t = Timestamp::parse("2022-01-01T00:00:00Z");
    vc::InverterCredential current = vc::issue_inverter_credential(
        issuer.kp, issuer.id, "vc:chain:0", t, state, {"v1.0", t}, nullptr);
    for (int i = 1; i <= 20; ++i) {
        Timestamp install{t.secs + i * 86400};
        current = vc::issue_inverter_credential(issuer.kp, issuer.id,
                                                "vc:chain:" + std::to_string(i), install, state,
                                                {"v1." + std::to_string(i), install}, &current);
        CHECK(current.firmware_history.size() == static_cast<size_t>(i + 1));
        CHECK(current.firmware_history.front().version == "v1." + std::to_string(i));
        CHECK(current.updatable.software_version == current.firmware_history.front().version);
        CHECK(vc::verify_credential(current, issuer.registry).valid());
    }
    // Same version again is rejected; so is an older timestamp.
    Timestamp later{t.secs + 30 * 86400};
    CHECK_THROWS_AS(vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:chain:x", later, state,
                                                  {"v1.20", later}, &current),
                    vc::vc_error);
    CHECK_THROWS_AS(vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:chain:y", later, state,
                                                  {"v1.21", {t.secs + 86400}}, &current),
                    vc::vc_error);
}

TEST_CASE("canonical bytes are deterministic and injective over field changes") {
    Issuer issuer;
    auto base = vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:canon:1",
                                              Timestamp::parse("2022-01-29T02:56:43Z"),
                                              sample_state(),
                                              {"v1.0", Timestamp::parse("2022-01-29T02:56:43Z")},
                                              nullptr);
    CHECK(vc::canonical_bytes(base) == vc::canonical_bytes(base));
    // Proof does not feed the canonical form.
    auto unsigned_copy = base;
    unsigned_copy.proof.reset();
    CHECK(vc::canonical_bytes(unsigned_copy) == vc::canonical_bytes(base));

    crypto::Rng rng(2222);
    std::set<std::string> seen;
    seen.insert(crypto::sha256(vc::canonical_bytes(base)).hex());
    for (int i = 0; i < 10000; ++i) {
        auto mutated = base;
        switch (rng.below(6)) {
            case 0: mutated.id = "vc:canon:m" + std::to_string(i); break;
            case 1: mutated.updatable.software_version = "v" + std::to_string(i); break;
            case 2: mutated.immutable.serial_no = "SN-" + std::to_string(i); break;
            case 3: mutated.issuance_date.secs += i + 1; break;
            case 4: mutated.firmware_history[0].version = "w" + std::to_string(i); break;
            default: mutated.updatable.owner = {"sim", "owner" + std::to_string(i)}; break;
        }
        seen.insert(crypto::sha256(vc::canonical_bytes(mutated)).hex());
    }
    // Distinct contents map to distinct canonical bytes (collisions would
    // repeat within a mutation class; allow the classes to overlap at most
    // trivially).
    CHECK(seen.size() > 9990);
}

TEST_CASE("single-field mutation breaks the signature") {
    Issuer issuer;
    auto base = vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:mut:1",
                                              Timestamp::parse("2022-01-29T02:56:43Z"),
                                              sample_state(),
                                              {"v1.0", Timestamp::parse("2022-01-29T02:56:43Z")},
                                              nullptr);
    REQUIRE(vc::verify_credential(base, issuer.registry).valid());
    crypto::Rng rng(3333);
    for (int i = 0; i < 1000; ++i) {
        auto mutated = base;
        switch (rng.below(5)) {
            case 0:
                mutated.firmware_history.insert(mutated.firmware_history.begin(),
                                                {"v2." + std::to_string(i),
                                                 {mutated.issuance_date.secs + 1 + i}});
                mutated.updatable.software_version = mutated.firmware_history.front().version;
                break;
            case 1: mutated.immutable.serial_no += "x"; break;
            case 2: mutated.updatable.owner = {"sim", "mallory" + std::to_string(i)}; break;
            case 3: mutated.updatable.timely_updated = !mutated.updatable.timely_updated; break;
            default: mutated.reset_history.push_back({mutated.issuance_date.secs - 1}); break;
        }
        auto result = vc::verify_credential(mutated, issuer.registry);
        CHECK(result.status == vc::VerificationStatus::BadSignature);
    }
}

TEST_CASE("schema violations are reported before signatures") {
    Issuer issuer;
    auto base = vc::issue_inverter_credential(issuer.kp, issuer.id, "vc:schema:1",
                                              Timestamp::parse("2022-01-29T02:56:43Z"),
                                              sample_state(),
                                              {"v1.0", Timestamp::parse("2022-01-29T02:56:43Z")},
                                              nullptr);
    auto broken = base;
    broken.type_tags = {"VerifiableCredential"};
    CHECK(vc::verify_credential(broken, issuer.registry).status ==
          vc::VerificationStatus::SchemaViolation);

    broken = base;
    broken.updatable.software_version = "v9.9";  // no matching history head
    CHECK(vc::schema_violation(broken).has_value());

    broken = base;
    broken.firmware_history = {{"v1.0", Timestamp::parse("2022-01-01T00:00:00Z")},
                               {"v1.1", Timestamp::parse("2022-02-01T00:00:00Z")}};
    broken.updatable.software_version = "v1.0";
    CHECK(vc::schema_violation(broken).has_value());  // not newest-first

    auto fw = vc::issue_firmware_credential(issuer.kp, issuer.id, "vc:fw:s",
                                            Timestamp::parse("2023-03-31T08:11:12Z"),
                                            sample_metadata());
    auto fw_broken = fw;
    fw_broken.manufacturer = {"sim", "someone-else"};
    CHECK(vc::verify_credential(fw_broken, issuer.registry).status ==
          vc::VerificationStatus::SchemaViolation);
}

TEST_CASE("unknown issuer and revocation statuses") {
    Issuer issuer;
    auto credential = vc::issue_inverter_credential(
        issuer.kp, issuer.id, "vc:rev:1", Timestamp::parse("2022-01-29T02:56:43Z"),
        sample_state(), {"v1.0", Timestamp::parse("2022-01-29T02:56:43Z")}, nullptr);

    did::Registry empty;
    CHECK(vc::verify_credential(credential, empty).status ==
          vc::VerificationStatus::UnknownIssuer);

    auto digest = crypto::sha256(to_bytes("revoke:vc:rev:1"));
    issuer.registry.revoke_credential(issuer.id, "vc:rev:1", issuer.kp.sign(digest.bytes));
    CHECK(vc::verify_credential(credential, issuer.registry).status ==
          vc::VerificationStatus::Revoked);
}

TEST_CASE("compact encoding roundtrips and stays within size bounds") {
    Issuer issuer;
    auto state = sample_state();
    Timestamp t = Timestamp::parse("2022-01-01T00:00:00Z");
    vc::InverterCredential current = vc::issue_inverter_credential(
        issuer.kp, issuer.id, "vc:size:0", t, state, {"v1.0", t}, nullptr);
    for (int i = 1; i <= 12; ++i) {
        Timestamp install{t.secs + i * 86400};
        current = vc::issue_inverter_credential(issuer.kp, issuer.id,
                                                "vc:size:" + std::to_string(i), install, state,
                                                {"v1." + std::to_string(i), install}, &current);
    }
    std::string token = vc::compact_encoding(current);
    CHECK(vc::decode_inverter(token) == current);
    CHECK(token.find_first_not_of(
              "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_.") ==
          std::string::npos);
    CHECK(std::count(token.begin(), token.end(), '.') == 2);

    auto fw = vc::issue_firmware_credential(issuer.kp, issuer.id, "vc:fw:c",
                                            Timestamp::parse("2023-03-31T08:11:12Z"),
                                            sample_metadata());
    CHECK(vc::decode_firmware(vc::compact_encoding(fw)) == fw);

    auto unsigned_copy = current;
    unsigned_copy.proof.reset();
    CHECK_THROWS_AS(vc::compact_encoding(unsigned_copy), vc::vc_error);
    CHECK_THROWS_AS(vc::decode_inverter("nonsense"), vc::vc_error);
    CHECK_THROWS_AS(vc::decode_inverter("a.b.c"), vc::vc_error);

    // A tampered token fails verification after decode.
    std::string tampered = token;
    size_t payload_pos = token.find('.') + 5;
    tampered[payload_pos] = tampered[payload_pos] == 'A' ? 'B' : 'A';
    try {
        auto decoded = vc::decode_inverter(tampered);
        CHECK_FALSE(vc::verify_credential(decoded, issuer.registry).valid());
    } catch (const vc::vc_error&) {
        // Equally acceptable: the mangled payload no longer parses.
    }
}
