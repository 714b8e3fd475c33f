#include "ivt/sim.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ivt::sim {

using nlohmann::ordered_json;
using namespace ivt::actors;

bool ScenarioReport::all_passed() const {
    return std::all_of(expectations.begin(), expectations.end(),
                       [](const ExpectationResult& e) { return e.pass; });
}

ordered_json ScenarioReport::to_json() const {
    ordered_json checks = ordered_json::array();
    for (const auto& e : expectations) {
        checks.push_back({{"check", e.check}, {"pass", e.pass}, {"detail", e.detail}});
    }
    ordered_json capture = ordered_json::array();
    std::istringstream lines(capture_jsonl);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) capture.push_back(ordered_json::parse(line));
    }
    return {{"scenario", name},
            {"seed", seed},
            {"passed", all_passed()},
            {"expectations", checks},
            {"ledger", ledger},
            {"capture", capture}};
}

namespace {

struct OperatorActor {
    std::string name;
    crypto::KeyPair kp;
    did::Did id;
    trust::TrustPolicy policy;
};

struct AdversaryActor {
    std::string name;
    crypto::KeyPair kp;
    did::Did id;
};

std::string require_string(const ordered_json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw scenario_error(where + ": missing string field '" + field + "'");
    }
    return j.at(field).get<std::string>();
}

Timestamp require_time(const ordered_json& j, const char* field, const std::string& where) {
    try {
        return Timestamp::parse(require_string(j, field, where));
    } catch (const std::invalid_argument& e) {
        throw scenario_error(where + ": " + e.what());
    }
}

class Runner {
public:
    Runner(const ordered_json& doc, std::optional<std::uint64_t> seed_override)
        : doc_(doc),
          seed_(seed_override.value_or(doc.value("seed", 0ULL))),
          world_(seed_),
          clock_{Timestamp::parse(doc.value("start", "2023-01-01T00:00:00Z"))} {}

    ScenarioReport run() {
        setup_actors();
        const auto& steps = doc_.value("steps", ordered_json::array());
        for (size_t i = 0; i < steps.size(); ++i) run_step(steps[i], i);
        ScenarioReport report;
        report.name = doc_.value("name", "scenario");
        report.seed = seed_;
        const auto& expectations = doc_.value("expectations", ordered_json::array());
        for (size_t i = 0; i < expectations.size(); ++i) {
            report.expectations.push_back(evaluate(expectations[i], i));
        }
        report.capture_jsonl = world_.network.capture_jsonl();
        for (const auto& [name, man] : manufacturers_) {
            ordered_json entries = ordered_json::array();
            for (const auto& [event, logged_at] : world_.ledger.log(man->contract_id())) {
                entries.push_back({{"version", event.version},
                                   {"releasedDate", event.credential.released_date.to_string()},
                                   {"type", vc::to_string(event.credential.firmware_info.update_type)},
                                   {"models", event.model_list},
                                   {"sequenceNo", event.sequence_no},
                                   {"loggedAt", logged_at.to_string()}});
            }
            report.ledger[name] = entries;
        }
        return report;
    }

private:
    // -- setup --------------------------------------------------------------

    void setup_actors() {
        if (!doc_.contains("actors") || !doc_.at("actors").is_array()) {
            throw scenario_error("scenario: missing 'actors' array");
        }
        for (const auto& a : doc_.at("actors")) {
            std::string where = "actor '" + a.value("name", "?") + "'";
            std::string name = require_string(a, "name", "actors entry");
            std::string kind = require_string(a, "kind", where);
            if (kind == "manufacturer") {
                manufacturers_.emplace(name,
                                       std::make_unique<Manufacturer>(world_, name, clock_.now));
            } else if (kind == "owner") {
                owners_.emplace(name, std::make_unique<Owner>(world_, name, clock_.now));
            } else if (kind == "inverter") {
                auto& man = manufacturer(require_string(a, "manufacturer", where), where);
                const did::Did* initial_owner = nullptr;
                if (a.contains("owner")) {
                    initial_owner = &owner_actor(a.at("owner").get<std::string>(), where).did();
                }
                auto inverter = man.manufacture_inverter(world_, require_string(a, "model", where),
                                                         require_string(a, "serial", where),
                                                         clock_.now, initial_owner);
                inverter_manufacturer_[name] = require_string(a, "manufacturer", where);
                credential_history_[name].push_back(
                    *inverter->wallet().current_credential());
                if (initial_owner) {
                    man.transfer_ownership(world_, *inverter, *initial_owner, clock_.now);
                    inverter_owner_[name] = a.at("owner").get<std::string>();
                }
                inverters_.emplace(name, std::move(inverter));
            } else if (kind == "operator") {
                OperatorActor op;
                op.name = name;
                op.kp = crypto::KeyPair::generate(world_.rng);
                auto [id, _] = world_.registry.create_did("sim", op.kp, {}, world_.rng);
                op.id = id;
                if (a.contains("policy")) op.policy = trust::TrustPolicy::from_json(a.at("policy"));
                operators_.emplace(name, std::move(op));
            } else if (kind == "adversary") {
                AdversaryActor adv;
                adv.name = name;
                adv.kp = crypto::KeyPair::generate(world_.rng);
                auto [id, _] = world_.registry.create_did("sim", adv.kp, {}, world_.rng);
                adv.id = id;
                adversaries_.emplace(name, std::move(adv));
            } else {
                throw scenario_error(where + ": unknown kind '" + kind + "'");
            }
        }
    }

    // -- lookups ------------------------------------------------------------

    Manufacturer& manufacturer(const std::string& name, const std::string& where) {
        auto it = manufacturers_.find(name);
        if (it == manufacturers_.end()) throw scenario_error(where + ": unknown manufacturer '" + name + "'");
        return *it->second;
    }
    Owner& owner_actor(const std::string& name, const std::string& where) {
        auto it = owners_.find(name);
        if (it == owners_.end()) throw scenario_error(where + ": unknown owner '" + name + "'");
        return *it->second;
    }
    Inverter& inverter(const std::string& name, const std::string& where) {
        auto it = inverters_.find(name);
        if (it == inverters_.end()) throw scenario_error(where + ": unknown inverter '" + name + "'");
        return *it->second;
    }
    OperatorActor& op(const std::string& name, const std::string& where) {
        auto it = operators_.find(name);
        if (it == operators_.end()) throw scenario_error(where + ": unknown operator '" + name + "'");
        return it->second;
    }
    AdversaryActor& adversary(const std::string& name, const std::string& where) {
        auto it = adversaries_.find(name);
        if (it == adversaries_.end()) throw scenario_error(where + ": unknown adversary '" + name + "'");
        return it->second;
    }
    Manufacturer& manufacturer_of(const std::string& inverter_name, const std::string& where) {
        auto it = inverter_manufacturer_.find(inverter_name);
        if (it == inverter_manufacturer_.end()) {
            throw scenario_error(where + ": inverter '" + inverter_name + "' has no manufacturer");
        }
        return manufacturer(it->second, where);
    }
    Owner& owner_of(const std::string& inverter_name, const std::string& where) {
        auto it = inverter_owner_.find(inverter_name);
        if (it == inverter_owner_.end()) {
            throw scenario_error(where + ": inverter '" + inverter_name + "' has no owner");
        }
        return owner_actor(it->second, where);
    }

    // -- steps --------------------------------------------------------------

    void run_step(const ordered_json& step, size_t index) {
        std::string where = "step " + std::to_string(index);
        clock_.advance_to(require_time(step, "at", where));
        std::string actor = require_string(step, "actor", where);
        std::string action = require_string(step, "action", where);
        ordered_json params = step.value("params", ordered_json::object());
        std::string label = step.value("label", action);

        if (action == "publish_firmware") {
            records_[label] = do_publish(manufacturer(actor, where), params, where);
        } else if (action == "transfer_ownership") {
            auto& man = manufacturer(actor, where);
            auto& inv = inverter(require_string(params, "inverter", where), where);
            auto& own = owner_actor(require_string(params, "owner", where), where);
            auto updated = man.transfer_ownership(world_, inv, own.did(), clock_.now);
            inverter_owner_[require_string(params, "inverter", where)] =
                require_string(params, "owner", where);
            records_[label] = {{"version", updated.version}};
        } else if (action == "poll_updates") {
            auto outcomes = inverter(actor, where).poll_updates(world_, clock_.now);
            ordered_json list = ordered_json::array();
            for (auto o : outcomes) list.push_back(to_string(o));
            records_[label] = {{"outcomes", list}};
        } else if (action == "factory_reset") {
            auto proof = inverter(actor, where).factory_reset(clock_.now);
            records_[label] = {{"version", proof.version}, {"reset", true}};
        } else if (action == "offline_update") {
            records_[label] = do_offline_update(actor, params, where);
        } else if (action == "renew_vc") {
            records_[label] = do_renew(owner_actor(actor, where),
                                       require_string(params, "inverter", where), where);
        } else if (action == "enroll") {
            records_[label] = do_enroll(owner_actor(actor, where), params, where);
        } else if (action == "mutate_credential") {
            records_[label] = do_mutate(adversary(actor, where), params, where);
        } else if (action == "forge_signature") {
            records_[label] = do_forge(adversary(actor, where), params, where);
        } else if (action == "replay_response") {
            records_[label] = do_replay_response(adversary(actor, where), params, where);
        } else if (action == "replay_request") {
            records_[label] = do_replay_request(adversary(actor, where), params, where);
        } else if (action == "tamper_binary") {
            do_tamper(params, where);
            records_[label] = {{"tamper", params.value("enable", true)}};
        } else if (action == "enroll_foreign") {
            records_[label] = do_enroll_foreign(adversary(actor, where), params, where);
        } else if (action == "mimic_version") {
            records_[label] = do_mimic(adversary(actor, where), params, where);
        } else if (action == "downgrade_attempt") {
            records_[label] = do_downgrade(params, where);
        } else if (action == "push_update") {
            records_[label] = do_push_update(adversary(actor, where), params, where);
        } else {
            throw scenario_error(where + ": unknown action '" + action + "'");
        }
    }

    ordered_json do_publish(Manufacturer& man, const ordered_json& params,
                            const std::string& where) {
        std::string version = require_string(params, "version", where);
        if (!params.contains("models") || !params.at("models").is_array()) {
            throw scenario_error(where + ": publish_firmware needs 'models' array");
        }
        auto models = params.at("models").get<std::vector<std::string>>();
        auto type = vc::update_type_from_string(params.value("type", "security"));
        if (!type) throw scenario_error(where + ": bad update type");
        std::vector<std::string> cves = params.value("cves", std::vector<std::string>{});
        size_t size = params.value("size", 4096);
        Bytes binary(size);
        world_.rng.fill(binary);
        auto image = FirmwareImage::make(models, version, std::move(binary));
        auto [fw_vc, event] = man.publish_firmware(world_, image, *type, cves, clock_.now);
        return {{"version", event.version}, {"sequence_no", event.sequence_no}};
    }

    ordered_json do_offline_update(const std::string& inverter_name, const ordered_json& params,
                                   const std::string& where) {
        auto& inv = inverter(inverter_name, where);
        auto& man = manufacturer_of(inverter_name, where);
        std::string version = require_string(params, "version", where);
        auto binary = world_.server.fetch(man.update_link(version));
        if (!binary) throw scenario_error(where + ": no binary published for " + version);
        std::optional<vc::FirmwareCredential> fw_vc;
        for (const auto& [event, _] : world_.ledger.log(man.contract_id())) {
            if (event.version == version) fw_vc = event.credential;
        }
        if (!fw_vc) throw scenario_error(where + ": no published credential for " + version);
        auto outcome = inv.install_offline(world_, *binary, *fw_vc, clock_.now);
        return {{"outcome", to_string(outcome)}};
    }

    ordered_json do_renew(Owner& owner, const std::string& inverter_name,
                          const std::string& where) {
        auto& inv = inverter(inverter_name, where);
        auto& man = manufacturer_of(inverter_name, where);
        Bytes request;
        try {
            request = owner.request_new_vc(world_, inv, man.did(), clock_.now);
        } catch (const std::runtime_error& e) {
            return {{"rejected", true}, {"rejection", "NoPendingProof"}, {"error", e.what()}};
        }
        last_request_[inverter_name] = request;
        auto result = man.handle_vc_request(world_, request, clock_.now);
        if (auto* rejection = std::get_if<Rejection>(&result)) {
            return {{"rejected", true}, {"rejection", to_string(*rejection)}};
        }
        Bytes response = std::get<Bytes>(result);
        world_.network.send(clock_.now, man.name(), owner.name(), "vc-response", response);
        last_response_[inverter_name] = response;
        auto outcome = owner.install_vc(world_, inv, response, clock_.now);
        if (outcome == InstallVcOutcome::Ok) {
            credential_history_[inverter_name].push_back(*inv.wallet().current_credential());
        }
        return {{"rejected", false},
                {"install", to_string(outcome)},
                {"nonce_ok", outcome == InstallVcOutcome::Ok}};
    }

    trust::AvailableUpdateList updates_for(const vc::InverterCredential& credential,
                                           const std::string& fallback_model) {
        // Locate the subject inverter to scope the update list by model.
        for (const auto& [name, inv] : inverters_) {
            if (inv->did() == credential.immutable.inverter_id) {
                auto& man = manufacturer_of(name, "update lookup");
                trust::AvailableUpdateList list;
                for (const auto& e :
                     world_.ledger.get_updates_for_model(man.contract_id(), inv->model())) {
                    list.push_back({e.version, e.released_date, e.update_type});
                }
                return list;
            }
        }
        (void)fallback_model;
        return {};
    }

    ordered_json decision_json(const trust::EnrollmentDecision& decision) {
        ordered_json reasons = ordered_json::array();
        for (const auto& r : decision.reasons) reasons.push_back(r);
        return {{"accepted", decision.accepted},
                {"trust", to_string(decision.trust)},
                {"permission", to_string(decision.permission)},
                {"reasons", reasons}};
    }

    // Operator-side handling of a sealed enrollment presentation.
    ordered_json operator_evaluate(OperatorActor& op, const Bytes& raw,
                                   const std::string& where) {
        auto envelope = crypto::Envelope::deserialize(raw);
        auto plain = envelope ? crypto::decrypt(*envelope, op.kp) : std::nullopt;
        if (!plain) throw scenario_error(where + ": operator cannot open presentation");
        ordered_json p = ordered_json::parse(ivt::to_string(*plain));
        trust::Presentation presentation;
        presentation.credential = vc::decode_inverter(p.at("vc").get<std::string>());
        presentation.presenter = *did::Did::parse(p.at("presenter").get<std::string>());
        presentation.presenter_sig.key_id = p.at("sig").at("kid").get<std::string>();
        Bytes sig_raw = hex_decode(p.at("sig").at("value").get<std::string>());
        std::copy(sig_raw.begin(), sig_raw.end(), presentation.presenter_sig.bytes.begin());

        auto credential = presentation.credential;
        auto decision = trust::evaluate_enrollment(
            presentation, world_.registry,
            [&](const std::string& model) { return updates_for(credential, model); }, "",
            op.policy, clock_.now);
        return decision_json(decision);
    }

    ordered_json do_enroll(Owner& owner, const ordered_json& params, const std::string& where) {
        auto& inv = inverter(require_string(params, "inverter", where), where);
        auto& operator_actor = op(require_string(params, "operator", where), where);
        Bytes presentation = owner.present_for_enrollment(
            world_, inv, operator_actor.kp.verification_key(), clock_.now);
        return operator_evaluate(operator_actor, presentation, where);
    }

    // Seals a (possibly doctored) presentation from an arbitrary presenter.
    ordered_json present_as(const std::string& sender_name, const did::Did& presenter,
                            const crypto::KeyPair& presenter_kp,
                            const vc::InverterCredential& credential, OperatorActor& operator_actor,
                            const std::string& where) {
        crypto::Signature sig = presenter_kp.sign(
            crypto::sha256(trust::presentation_signing_bytes(credential, presenter)).bytes);
        ordered_json p = {{"vc", vc::compact_encoding(credential)},
                          {"presenter", presenter.rendered()},
                          {"sig", {{"kid", sig.key_id}, {"value", hex_encode(sig.bytes)}}}};
        crypto::Envelope sealed = crypto::encrypt_for(operator_actor.kp.verification_key(),
                                                      to_bytes(p.dump()), world_.rng);
        Bytes raw = sealed.serialize();
        world_.network.send(clock_.now, sender_name, operator_actor.name,
                            "enrollment-presentation", raw);
        return operator_evaluate(operator_actor, raw, where);
    }

    ordered_json do_mutate(AdversaryActor& adv, const ordered_json& params,
                           const std::string& where) {
        std::string inverter_name = require_string(params, "inverter", where);
        auto& inv = inverter(inverter_name, where);
        auto& operator_actor = op(require_string(params, "operator", where), where);
        auto& owner = owner_of(inverter_name, where);
        vc::InverterCredential mutated = *inv.wallet().current_credential();
        std::string field = params.value("field", "softwareVersion");
        std::string value = params.value("value", "v99.0");
        if (field == "softwareVersion") {
            // Keeping the claim self-consistent: fake a matching history head.
            mutated.firmware_history.insert(mutated.firmware_history.begin(),
                                            {value, clock_.now});
            mutated.updatable.software_version = value;
        } else if (field == "serialNo") {
            mutated.immutable.serial_no = value;
        } else if (field == "owner") {
            mutated.updatable.owner = adv.id;
        } else {
            throw scenario_error(where + ": unknown mutation field '" + field + "'");
        }
        // Presented by the (dishonest) recorded owner so the mutation itself
        // is what gets caught.
        const did::Did& presenter = field == "owner" ? adv.id : owner.did();
        const crypto::KeyPair& kp = field == "owner" ? adv.kp : owner.keypair();
        return present_as(adv.name, presenter, kp, mutated, operator_actor, where);
    }

    ordered_json do_forge(AdversaryActor& adv, const ordered_json& params,
                          const std::string& where) {
        auto& inv = inverter(require_string(params, "inverter", where), where);
        auto& operator_actor = op(require_string(params, "operator", where), where);
        vc::InverterCredential forged = *inv.wallet().current_credential();
        forged.updatable.owner = adv.id;
        forged.proof = adv.kp.sign(crypto::sha256(vc::canonical_bytes(forged)).bytes);
        return present_as(adv.name, adv.id, adv.kp, forged, operator_actor, where);
    }

    ordered_json do_replay_response(AdversaryActor& adv, const ordered_json& params,
                                    const std::string& where) {
        std::string inverter_name = require_string(params, "inverter", where);
        auto it = last_response_.find(inverter_name);
        if (it == last_response_.end()) throw scenario_error(where + ": nothing to replay");
        auto& inv = inverter(inverter_name, where);
        auto& owner = owner_of(inverter_name, where);
        world_.network.send(clock_.now, adv.name, owner.name(), "vc-response", it->second);
        auto outcome = owner.install_vc(world_, inv, it->second, clock_.now);
        return {{"install", to_string(outcome)}};
    }

    ordered_json do_replay_request(AdversaryActor& adv, const ordered_json& params,
                                   const std::string& where) {
        std::string inverter_name = require_string(params, "inverter", where);
        auto it = last_request_.find(inverter_name);
        if (it == last_request_.end()) throw scenario_error(where + ": nothing to replay");
        auto& man = manufacturer_of(inverter_name, where);
        world_.network.send(clock_.now, adv.name, man.name(), "vc-request", it->second);
        auto result = man.handle_vc_request(world_, it->second, clock_.now);
        if (auto* rejection = std::get_if<Rejection>(&result)) {
            return {{"rejected", true}, {"rejection", to_string(*rejection)}};
        }
        return {{"rejected", false}};
    }

    void do_tamper(const ordered_json& params, const std::string& where) {
        auto& inv = inverter(require_string(params, "inverter", where), where);
        if (params.value("enable", true)) {
            world_.network.set_tamper(UpdateServer::kName, inv.name(), [](const Bytes& payload) {
                Bytes tampered = payload;
                if (!tampered.empty()) tampered[0] ^= 0x01;
                return tampered;
            });
        } else {
            world_.network.clear_tamper(UpdateServer::kName, inv.name());
        }
    }

    ordered_json do_enroll_foreign(AdversaryActor& adv, const ordered_json& params,
                                   const std::string& where) {
        auto& inv = inverter(require_string(params, "inverter", where), where);
        auto& operator_actor = op(require_string(params, "operator", where), where);
        // A leaked copy of the victim's credential, presented by a non-owner.
        vc::InverterCredential stolen = *inv.wallet().current_credential();
        return present_as(adv.name, adv.id, adv.kp, stolen, operator_actor, where);
    }

    ordered_json do_mimic(AdversaryActor& adv, const ordered_json& params,
                          const std::string& where) {
        std::string inverter_name = require_string(params, "inverter", where);
        auto& operator_actor = op(require_string(params, "operator", where), where);
        auto& owner = owner_of(inverter_name, where);
        const auto& history = credential_history_[inverter_name];
        if (history.size() < 2) throw scenario_error(where + ": no superseded credential to mimic with");
        const vc::InverterCredential& stale = history[history.size() - 2];
        return present_as(adv.name, owner.did(), owner.keypair(), stale, operator_actor, where);
    }

    ordered_json do_downgrade(const ordered_json& params, const std::string& where) {
        std::string inverter_name = require_string(params, "inverter", where);
        auto& inv = inverter(inverter_name, where);
        auto& man = manufacturer_of(inverter_name, where);
        std::string version = require_string(params, "version", where);
        for (const auto& [event, _] : world_.ledger.log(man.contract_id())) {
            if (event.version == version) {
                auto outcome = inv.handle_update_event(world_, event, clock_.now);
                return {{"outcome", to_string(outcome)}};
            }
        }
        throw scenario_error(where + ": no published event for " + version);
    }

    ordered_json do_push_update(AdversaryActor& adv, const ordered_json& params,
                                const std::string& where) {
        auto& man = manufacturer(require_string(params, "manufacturer", where), where);
        std::string version = params.value("version", "v66.6");
        Bytes binary(128);
        world_.rng.fill(binary);
        vc::FirmwareMetadata meta;
        meta.version = version;
        meta.binary_hash = crypto::sha256(binary);
        meta.released_date = clock_.now;
        meta.supporting_models = {"SP-PRO"};
        vc::FirmwareCredential fake =
            vc::issue_firmware_credential(adv.kp, adv.id, "vc:fake:" + version, clock_.now, meta);
        ledger::SaveUpdateRequest request{fake, adv.id, world_.rng.nonce()};
        crypto::Signature sig = adv.kp.sign(crypto::sha256(request.canonical_bytes()).bytes);
        world_.network.send(clock_.now, adv.name, "ledger", "save-update",
                            request.canonical_bytes());
        try {
            world_.ledger.save_update(man.contract_id(), request, sig, clock_.now);
            return {{"rejected", false}};
        } catch (const ledger::ledger_error& e) {
            return {{"rejected", true},
                    {"reason", to_string(e.reason())},
                    {"message", e.what()}};
        }
    }

    // -- expectations -------------------------------------------------------

    ExpectationResult evaluate(const ordered_json& expectation, size_t index) {
        std::string where = "expectation " + std::to_string(index);
        std::string check = require_string(expectation, "check", where);
        ordered_json params = expectation.value("params", ordered_json::object());
        ExpectationResult result{check, false, ""};
        try {
            result = evaluate_check(check, params, where);
        } catch (const scenario_error&) {
            throw;
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = e.what();
        }
        return result;
    }

    const ordered_json& record(const ordered_json& params, const std::string& where) {
        std::string label = require_string(params, "label", where);
        auto it = records_.find(label);
        if (it == records_.end()) throw scenario_error(where + ": no step labeled '" + label + "'");
        return it->second;
    }

    ExpectationResult evaluate_check(const std::string& check, const ordered_json& params,
                                     const std::string& where) {
        ExpectationResult r{check, false, ""};
        if (check == "wallet_credential_count") {
            auto& inv = inverter(require_string(params, "inverter", where), where);
            size_t expected = params.at("expected").get<size_t>();
            size_t got = inv.wallet().inverter_credentials.size();
            r.pass = got == expected;
            r.detail = "expected " + std::to_string(expected) + ", got " + std::to_string(got);
        } else if (check == "wallet_software_version") {
            auto& inv = inverter(require_string(params, "inverter", where), where);
            const auto* credential = inv.wallet().current_credential();
            std::string expected = require_string(params, "expected", where);
            std::string got = credential ? credential->updatable.software_version : "<none>";
            r.pass = got == expected;
            r.detail = "expected " + expected + ", got " + got;
        } else if (check == "history_matches_install_log") {
            auto& inv = inverter(require_string(params, "inverter", where), where);
            const auto* credential = inv.wallet().current_credential();
            std::vector<vc::HistoryEntry> reversed(inv.install_log().rbegin(),
                                                   inv.install_log().rend());
            r.pass = credential && credential->firmware_history == reversed;
            r.detail = r.pass ? "history matches install log" : "history differs from install log";
        } else if (check == "installed_version") {
            auto& inv = inverter(require_string(params, "inverter", where), where);
            std::string expected = require_string(params, "expected", where);
            r.pass = inv.installed_version() == expected;
            r.detail = "expected " + expected + ", got " + inv.installed_version();
        } else if (check == "trust_state") {
            std::string inverter_name = require_string(params, "inverter", where);
            auto& inv = inverter(inverter_name, where);
            auto& operator_actor = op(require_string(params, "operator", where), where);
            const auto* credential = inv.wallet().current_credential();
            if (!credential) {
                r.detail = "inverter wallet holds no credential";
                return r;
            }
            auto state = trust::compute_trust_state(*credential, updates_for(*credential, ""),
                                                    operator_actor.policy);
            std::string expected = require_string(params, "expected", where);
            r.pass = to_string(state) == expected;
            r.detail = "expected " + expected + ", got " + to_string(state);
        } else if (check == "enrollment") {
            const auto& rec = record(params, where);
            bool expected = params.at("accepted").get<bool>();
            bool got = rec.value("accepted", false);
            r.pass = got == expected;
            r.detail = "accepted=" + std::string(got ? "true" : "false");
            if (r.pass && params.contains("reason_contains")) {
                std::string needle = params.at("reason_contains").get<std::string>();
                bool found = false;
                for (const auto& reason : rec.value("reasons", ordered_json::array())) {
                    if (reason.get<std::string>().find(needle) != std::string::npos) found = true;
                }
                r.pass = found;
                if (!found) r.detail += ", reason '" + needle + "' absent";
            }
        } else if (check == "renewal") {
            const auto& rec = record(params, where);
            r.pass = true;
            if (params.contains("rejected")) {
                r.pass = r.pass && rec.value("rejected", false) == params.at("rejected").get<bool>();
            }
            if (params.contains("rejection")) {
                r.pass = r.pass && rec.value("rejection", "") ==
                                       params.at("rejection").get<std::string>();
            }
            if (params.contains("install")) {
                r.pass = r.pass && rec.value("install", "") == params.at("install").get<std::string>();
            }
            r.detail = rec.dump();
        } else if (check == "install_outcome") {
            const auto& rec = record(params, where);
            std::string expected = require_string(params, "expected", where);
            std::string got;
            if (rec.contains("outcome")) {
                got = rec.at("outcome").get<std::string>();
            } else {
                size_t index = params.value("index", 0);
                const auto& outcomes = rec.at("outcomes");
                got = index < outcomes.size() ? outcomes[index].get<std::string>() : "<missing>";
            }
            r.pass = got == expected;
            r.detail = "expected " + expected + ", got " + got;
        } else if (check == "ledger_length") {
            auto& man = manufacturer(require_string(params, "manufacturer", where), where);
            size_t expected = params.at("expected").get<size_t>();
            size_t got = world_.ledger.log_size(man.contract_id());
            r.pass = got == expected;
            r.detail = "expected " + std::to_string(expected) + ", got " + std::to_string(got);
        } else if (check == "old_vcs_revoked") {
            std::string inverter_name = require_string(params, "inverter", where);
            auto& inv = inverter(inverter_name, where);
            auto& man = manufacturer_of(inverter_name, where);
            const auto* current = inv.wallet().current_credential();
            r.pass = current != nullptr;
            for (const auto& credential : credential_history_[inverter_name]) {
                if (current && credential.id == current->id) continue;
                if (!world_.registry.is_revoked(man.did(), credential.id)) r.pass = false;
            }
            r.detail = r.pass ? "all superseded credentials revoked" : "unrevoked stale credential";
        } else if (check == "nonce_link") {
            const auto& rec = record(params, where);
            r.pass = rec.value("nonce_ok", false);
            r.detail = rec.dump();
        } else if (check == "no_secret_leak") {
            r = check_no_secret_leak();
        } else if (check == "record_equals") {
            const auto& rec = record(params, where);
            std::string path = require_string(params, "path", where);
            const auto& expected = params.at("expected");
            ordered_json got;
            try {
                got = rec.at(ordered_json::json_pointer(path));
            } catch (const std::exception&) {
                got = nullptr;
            }
            r.pass = got == expected;
            r.detail = "expected " + expected.dump() + ", got " + got.dump();
        } else {
            throw scenario_error(where + ": unknown check '" + check + "'");
        }
        return r;
    }

    static bool contains_bytes(const Bytes& haystack, const Bytes& needle) {
        if (needle.empty() || haystack.size() < needle.size()) return false;
        return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
               haystack.end();
    }

    ExpectationResult check_no_secret_leak() {
        ExpectationResult r{"no_secret_leak", true, "no secret material in capture"};
        std::vector<Bytes> secrets;
        for (const auto& [name, inv] : inverters_) {
            secrets.emplace_back(inv->device_secret().begin(), inv->device_secret().end());
            for (const auto& [_, credential] : inv->wallet().inverter_credentials) {
                secrets.push_back(vc::canonical_bytes(credential));
                secrets.push_back(to_bytes(vc::compact_encoding(credential)));
            }
            for (const auto& history_entry : credential_history_[name]) {
                secrets.push_back(vc::canonical_bytes(history_entry));
                secrets.push_back(to_bytes(vc::compact_encoding(history_entry)));
            }
        }
        for (const auto& rec : world_.network.capture()) {
            // Ledger publishes and update events are public by design.
            if (rec.kind == "save-update" || rec.kind == "update-event") continue;
            for (const auto& secret : secrets) {
                if (contains_bytes(rec.payload, secret)) {
                    r.pass = false;
                    r.detail = "secret material leaked in '" + rec.kind + "' from " + rec.from;
                }
            }
        }
        return r;
    }

    ordered_json doc_;
    std::uint64_t seed_;
    World world_;
    SimClock clock_;
    std::map<std::string, std::unique_ptr<Manufacturer>> manufacturers_;
    std::map<std::string, std::unique_ptr<Owner>> owners_;
    std::map<std::string, std::unique_ptr<Inverter>> inverters_;
    std::map<std::string, std::string> inverter_manufacturer_;
    std::map<std::string, std::string> inverter_owner_;
    std::map<std::string, OperatorActor> operators_;
    std::map<std::string, AdversaryActor> adversaries_;
    std::map<std::string, ordered_json> records_;
    std::map<std::string, Bytes> last_request_;
    std::map<std::string, Bytes> last_response_;
    std::map<std::string, std::vector<vc::InverterCredential>> credential_history_;
};

}  // namespace

ordered_json load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw scenario_error("cannot open scenario file: " + path);
    try {
        ordered_json doc = ordered_json::parse(in);
        if (!doc.is_object()) throw scenario_error(path + ": scenario must be a JSON object");
        if (!doc.contains("actors")) throw scenario_error(path + ": missing 'actors'");
        if (!doc.contains("steps")) throw scenario_error(path + ": missing 'steps'");
        return doc;
    } catch (const ordered_json::parse_error& e) {
        throw scenario_error(path + ": " + e.what());
    }
}

ScenarioReport run_scenario(const ordered_json& scenario,
                            std::optional<std::uint64_t> seed_override) {
    Runner runner(scenario, seed_override);
    return runner.run();
}

ScenarioReport run_scenario_file(const std::string& path,
                                 std::optional<std::uint64_t> seed_override) {
    return run_scenario(load_scenario(path), seed_override);
}

}  // namespace ivt::sim
