// inverter-trust: scenario runner, microbenchmarks, trust evaluation, ledger
// inspection, and key generation for the inverter-trust library.
//
// Exit codes: 0 success (all expectations passed), 1 expectation/validation
// failure, 2 usage or input errors.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ivt/bench.hpp"
#include "ivt/sim.hpp"
#include "ivt/trust.hpp"

using nlohmann::ordered_json;

namespace {

int cmd_scenario_run(const std::string& path, std::optional<std::uint64_t> seed,
                     const std::string& capture_path) {
    ivt::sim::ScenarioReport report = ivt::sim::run_scenario_file(path, seed);
    if (!capture_path.empty()) {
        std::ofstream out(capture_path);
        if (!out) {
            std::cerr << "cannot write capture file: " << capture_path << "\n";
            return 2;
        }
        out << report.capture_jsonl;
    }
    ordered_json summary = report.to_json();
    summary.erase("capture");
    std::cout << summary.dump(2) << "\n";
    return report.all_passed() ? 0 : 1;
}

int cmd_bench(size_t iters, bool as_json) {
    ivt::bench::BenchReport report = ivt::bench::run_benchmarks(iters);
    if (as_json) {
        std::cout << report.to_json().dump(2) << "\n";
    } else {
        std::cout << report.table();
    }
    return 0;
}

int cmd_trust_eval(const std::string& vc_path, const std::string& updates_path,
                   std::int64_t threshold_days) {
    std::ifstream vc_in(vc_path);
    if (!vc_in) {
        std::cerr << "cannot open credential file: " << vc_path << "\n";
        return 2;
    }
    std::ifstream updates_in(updates_path);
    if (!updates_in) {
        std::cerr << "cannot open updates file: " << updates_path << "\n";
        return 2;
    }
    ivt::vc::InverterCredential credential;
    ivt::trust::AvailableUpdateList updates;
    try {
        credential = ivt::vc::inverter_from_json(ordered_json::parse(vc_in));
        for (const auto& u : ordered_json::parse(updates_in)) {
            ivt::trust::AvailableUpdate update;
            update.version = u.at("version").get<std::string>();
            update.published = ivt::Timestamp::parse(u.at("published").get<std::string>());
            if (u.contains("type")) {
                auto t = ivt::vc::update_type_from_string(u.at("type").get<std::string>());
                if (!t) throw std::invalid_argument("unknown update type");
                update.update_type = *t;
            }
            updates.push_back(update);
        }
    } catch (const std::exception& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return 2;
    }
    auto state = ivt::trust::compute_trust_state(credential, updates,
                                                 ivt::Duration::days(threshold_days));
    ivt::trust::TrustPolicy policy;
    ordered_json out = {
        {"trustState", ivt::trust::to_string(state)},
        {"permittedInteractions",
         ivt::trust::to_string(ivt::trust::permitted_interactions(state, policy))},
    };
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_ledger_list(const std::string& scenario_path, const std::string& model) {
    ivt::sim::ScenarioReport report = ivt::sim::run_scenario_file(scenario_path);
    ordered_json out = ordered_json::object();
    for (const auto& [manufacturer, entries] : report.ledger.items()) {
        ordered_json filtered = ordered_json::array();
        for (const auto& entry : entries) {
            const auto& models = entry.at("models");
            if (model.empty() ||
                std::find(models.begin(), models.end(), ordered_json(model)) != models.end()) {
                filtered.push_back(entry);
            }
        }
        out[manufacturer] = filtered;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_keys_gen(const std::string& seed_hex) {
    ivt::Bytes seed;
    if (seed_hex.empty()) {
        seed.resize(ivt::crypto::kSeedSize);
        ivt::crypto::Rng rng;  // system-seeded
        rng.fill(seed);
    } else {
        try {
            seed = ivt::hex_decode(seed_hex);
        } catch (const std::invalid_argument& e) {
            std::cerr << "bad seed: " << e.what() << "\n";
            return 2;
        }
        if (seed.size() != ivt::crypto::kSeedSize) {
            std::cerr << "bad seed: expected " << ivt::crypto::kSeedSize << " bytes\n";
            return 2;
        }
    }
    ivt::crypto::KeyPair kp = ivt::crypto::KeyPair::from_seed(seed);
    ordered_json out = {{"seed", ivt::hex_encode(seed)},
                        {"verificationKey", ivt::hex_encode(kp.verification_key())},
                        {"keyId", kp.key_id()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Firmware-update credential toolkit for smart inverters"};
    app.require_subcommand(1);

    auto* scenario = app.add_subcommand("scenario", "Scenario operations");
    scenario->require_subcommand(1);
    auto* run = scenario->add_subcommand("run", "Run a scenario file and check expectations");
    std::string scenario_path;
    run->add_option("file", scenario_path, "Scenario JSON file")->required();
    std::optional<std::uint64_t> seed;
    run->add_option("--seed", seed, "Override the scenario seed");
    std::string capture_path;
    run->add_option("--capture", capture_path, "Write the message capture as JSONL");

    auto* bench = app.add_subcommand("bench", "Run microbenchmarks");
    size_t iters = 10000;
    bench->add_option("--iters", iters, "Iterations per benchmark")->check(CLI::PositiveNumber);
    bool bench_json = false;
    bench->add_flag("--json", bench_json, "Emit JSON instead of a table");

    auto* trust = app.add_subcommand("trust", "Trust operations");
    trust->require_subcommand(1);
    auto* eval = trust->add_subcommand("eval", "Compute the trust state for a credential");
    std::string vc_path, updates_path;
    std::int64_t threshold_days = 14;
    eval->add_option("--vc", vc_path, "Inverter credential JSON file")->required();
    eval->add_option("--updates", updates_path,
                     "Published updates JSON array [{version, published, type}]")
        ->required();
    eval->add_option("--threshold-days", threshold_days, "Timeliness threshold in days");

    auto* ledger = app.add_subcommand("ledger", "Ledger operations");
    ledger->require_subcommand(1);
    auto* list = ledger->add_subcommand("list", "List published updates after replaying a scenario");
    std::string ledger_model, ledger_scenario;
    list->add_option("--model", ledger_model, "Filter by inverter model");
    list->add_option("--scenario", ledger_scenario, "Scenario file that populates the ledger")
        ->required();

    auto* keys = app.add_subcommand("keys", "Key operations");
    keys->require_subcommand(1);
    auto* gen = keys->add_subcommand("gen", "Generate an Ed25519 keypair");
    std::string seed_hex;
    gen->add_option("--seed", seed_hex, "32-byte hex seed for a deterministic keypair");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_scenario_run(scenario_path, seed, capture_path);
        if (bench->parsed()) return cmd_bench(iters, bench_json);
        if (eval->parsed()) return cmd_trust_eval(vc_path, updates_path, threshold_days);
        if (list->parsed()) return cmd_ledger_list(ledger_scenario, ledger_model);
        if (gen->parsed()) return cmd_keys_gen(seed_hex);
    } catch (const ivt::sim::scenario_error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
