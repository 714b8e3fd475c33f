#include "ivt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace ivt::bench {

using nlohmann::ordered_json;

namespace {

Stat summarize(std::vector<double>& samples_ms) {
    std::sort(samples_ms.begin(), samples_ms.end());
    Stat s;
    if (samples_ms.empty()) return s;
    s.median_ms = samples_ms[samples_ms.size() / 2];
    s.p95_ms = samples_ms[std::min(samples_ms.size() - 1,
                                   static_cast<size_t>(samples_ms.size() * 0.95))];
    return s;
}

template <typename Fn>
std::vector<double> time_loop(size_t iterations, Fn&& fn) {
    std::vector<double> samples;
    samples.reserve(iterations);
    for (size_t i = 0; i < iterations; ++i) {
        auto start = std::chrono::steady_clock::now();
        fn(i);
        auto stop = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return samples;
}

}  // namespace

vc::InverterCredential sample_credential(const crypto::KeyPair& issuer_kp, const did::Did& issuer) {
    crypto::Rng rng(424242);
    crypto::KeyPair inverter_kp = crypto::KeyPair::generate(rng);
    did::Did inverter_id{"sim", crypto::key_id_of(inverter_kp.verification_key()) + "0011223344"};
    crypto::KeyPair owner_kp = crypto::KeyPair::generate(rng);
    did::Did owner{"sim", crypto::key_id_of(owner_kp.verification_key()) + "5566778899"};

    vc::InverterStateFields state;
    state.inverter_id = inverter_id;
    state.serial_no = "SN-2023-SOLARMAX-5K-0001847-DE";
    state.manufactured_date = Timestamp::parse("2022-11-15T08:00:00Z");
    state.owner = owner;
    state.status = vc::InverterStatus::Active;
    state.timely_updated = true;
    state.missing_updates = false;

    std::vector<vc::HistoryEntry> history = {
        {"v1.0", Timestamp::parse("2022-11-15T08:00:00Z")},
        {"v1.1", Timestamp::parse("2022-12-05T09:00:00Z")},
        {"v1.2", Timestamp::parse("2023-01-10T09:30:00Z")},
        {"v1.3.1", Timestamp::parse("2023-03-02T14:00:00Z")},
        {"v1.4", Timestamp::parse("2023-05-21T10:15:00Z")},
        {"v1.4.2", Timestamp::parse("2023-06-18T13:20:00Z")},
        {"v1.5", Timestamp::parse("2023-07-09T08:40:00Z")},
        {"v2.0", Timestamp::parse("2023-08-01T16:45:00Z")},
        {"v2.0.1", Timestamp::parse("2023-08-29T12:05:00Z")},
        {"v2.1", Timestamp::parse("2023-10-12T11:00:00Z")},
        {"v2.1.3", Timestamp::parse("2023-11-20T15:30:00Z")},
        {"v2.2", Timestamp::parse("2023-12-14T10:10:00Z")},
        {"v2.2.1", Timestamp::parse("2024-01-22T09:25:00Z")},
        {"v2.3", Timestamp::parse("2024-02-15T14:50:00Z")},
        {"v2.3.1", Timestamp::parse("2024-03-19T11:35:00Z")},
        {"v2.4", Timestamp::parse("2024-04-23T16:15:00Z")},
    };
    std::vector<Timestamp> resets = {Timestamp::parse("2023-02-20T07:00:00Z"),
                                     Timestamp::parse("2022-11-30T06:00:00Z")};

    vc::InverterCredential credential;
    vc::InverterCredential* previous = nullptr;
    vc::InverterCredential previous_storage;
    for (size_t i = 0; i < history.size(); ++i) {
        credential = vc::issue_inverter_credential(issuer_kp, issuer,
                                                   "vc:inverter:solarmax:" + std::to_string(i + 1),
                                                   history[i].installed_at, state, history[i],
                                                   previous, resets);
        previous_storage = credential;
        previous = &previous_storage;
    }
    return credential;
}

ordered_json BenchReport::to_json() const {
    auto stat = [](const Stat& s) {
        return ordered_json{{"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}};
    };
    return {{"iterations", iterations},
            {"diddoc_gen", stat(diddoc_gen)},
            {"vc_gen", stat(vc_gen)},
            {"vc_verify", stat(vc_verify)},
            {"vc_size_unsigned_json_bytes", vc_size_unsigned_json},
            {"vc_size_compact_bytes", vc_size_compact}};
}

std::string BenchReport::table() const {
    std::ostringstream out;
    out << "iterations: " << iterations << "\n";
    auto row = [&](const char* name, const Stat& s) {
        out << name << "  median " << s.median_ms << " ms, p95 " << s.p95_ms << " ms\n";
    };
    row("diddoc generation ", diddoc_gen);
    row("vc issuance       ", vc_gen);
    row("vc verification   ", vc_verify);
    out << "vc size (unsigned json): " << vc_size_unsigned_json << " bytes\n";
    out << "vc size (signed compact): " << vc_size_compact << " bytes\n";
    return out.str();
}

BenchReport run_benchmarks(size_t iterations) {
    BenchReport report;
    report.iterations = iterations;

    crypto::Rng rng(99);
    crypto::KeyPair issuer_kp = crypto::KeyPair::generate(rng);
    did::Did issuer{"sim", "benchissuer00000"};
    did::Registry registry;
    registry.register_document(did::DIDDocument::for_keypair(issuer, issuer_kp, {}));

    vc::InverterCredential sample = sample_credential(issuer_kp, issuer);
    report.vc_size_unsigned_json = vc::to_json(sample, false).dump().size();
    report.vc_size_compact = vc::compact_encoding(sample).size();

    auto diddoc_samples = time_loop(iterations, [&](size_t) {
        auto doc = did::DIDDocument::for_keypair(issuer, issuer_kp, {});
        if (doc.verification_methods.empty()) throw std::runtime_error("unreachable");
    });
    report.diddoc_gen = summarize(diddoc_samples);

    vc::HistoryEntry head = sample.firmware_history.front();
    vc::InverterStateFields state;
    state.inverter_id = sample.immutable.inverter_id;
    state.serial_no = sample.immutable.serial_no;
    state.manufactured_date = sample.immutable.manufactured_date;
    state.owner = sample.updatable.owner;
    auto gen_samples = time_loop(iterations, [&](size_t i) {
        auto vc = vc::issue_inverter_credential(issuer_kp, issuer,
                                                "vc:bench:" + std::to_string(i), head.installed_at,
                                                state, head, nullptr, sample.reset_history);
        if (!vc.proof) throw std::runtime_error("unreachable");
    });
    report.vc_gen = summarize(gen_samples);

    auto verify_samples = time_loop(iterations, [&](size_t) {
        auto result = vc::verify_credential(sample, registry);
        if (!result.valid()) throw std::runtime_error("sample credential failed verification");
    });
    report.vc_verify = summarize(verify_samples);

    return report;
}

}  // namespace ivt::bench
