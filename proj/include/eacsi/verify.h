#pragma once

// Invariant suites run by `eacsi verify`: algebraic identities, the packing
// conditions on the causal construction, and covering decay.

#include <cstdint>
#include <string>
#include <vector>

#include "eacsi/rpchannel.h"

namespace eacsi {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    int n = 0;             // 0 selects the suite default
    double delta = -1;     // negative selects the suite default
    long trials = 10000;
    uint64_t seed = 0;
    bool inject_fault = false;  // corrupts one fixture so that a check must fail
};

std::vector<CheckResult> verify_algebra(const VerifyOptions& opt);
std::vector<CheckResult> verify_packing(const VerifyOptions& opt);
std::vector<CheckResult> verify_covering(const VerifyOptions& opt);

/// Dispatches on algebra, packing or covering.
std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& opt);

/// U_s on a qubit followed by appending a fixed mixed qubit ancilla; used by
/// the extension checks, where the environment carries nothing about s.
EncoderFamily ancilla_family(int num_params, Rng& rng);
/// Every map replaced by its isometric extension.
EncoderFamily extended_family(const EncoderFamily& fam);

/// Doubly symmetric binary source with the given crossover.
std::vector<std::vector<double>> dsbs(double crossover);

}  // namespace eacsi
