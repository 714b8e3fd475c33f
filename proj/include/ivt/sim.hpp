#pragma once

// Deterministic scenario runner: simulated clock, scripted actor steps,
// adversary actions, and expectation checks.  Given the same file and seed,
// a run produces a byte-identical report.

#include <map>
#include <memory>

#include "ivt/actors.hpp"

namespace ivt::sim {

class scenario_error : public std::runtime_error {
public:
    explicit scenario_error(const std::string& what) : std::runtime_error(what) {}
};

struct SimClock {
    Timestamp now;

    void advance_to(Timestamp t) {
        if (t < now) throw scenario_error("clock would move backwards to " + t.to_string());
        now = t;
    }
};

struct ExpectationResult {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct ScenarioReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<ExpectationResult> expectations;
    std::string capture_jsonl;
    // Per-manufacturer contract log: [{version, releasedDate, type, models, sequenceNo}].
    nlohmann::ordered_json ledger = nlohmann::ordered_json::object();

    bool all_passed() const;
    nlohmann::ordered_json to_json() const;
};

// Parses and validates the scenario document; throws scenario_error with a
// step-level diagnostic on schema violations.
nlohmann::ordered_json load_scenario(const std::string& path);

ScenarioReport run_scenario(const nlohmann::ordered_json& scenario,
                            std::optional<std::uint64_t> seed_override = std::nullopt);
ScenarioReport run_scenario_file(const std::string& path,
                                 std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace ivt::sim
