#pragma once

// Microbenchmarks for the hot protocol paths: DID document generation,
// credential issuance, and credential verification, plus credential sizes.

#include <nlohmann/json.hpp>

#include "ivt/credentials.hpp"

namespace ivt::bench {

struct Stat {
    double median_ms = 0;
    double p95_ms = 0;
};

struct BenchReport {
    size_t iterations = 0;
    Stat diddoc_gen;
    Stat vc_gen;
    Stat vc_verify;
    size_t vc_size_unsigned_json = 0;  // compact JSON dump, no proof
    size_t vc_size_compact = 0;        // signed compact token

    nlohmann::ordered_json to_json() const;
    std::string table() const;
};

// A representative inverter credential with a several-entry update history,
// used as the sizing and timing workload.
vc::InverterCredential sample_credential(const crypto::KeyPair& issuer_kp, const did::Did& issuer);

BenchReport run_benchmarks(size_t iterations);

}  // namespace ivt::bench
