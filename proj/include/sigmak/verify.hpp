#pragma once

// Acceptance checks 1-9, shared by the `verify` command and the acceptance binary.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sigmak {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;                                  // one line: measured values against their bounds
    std::vector<std::pair<std::string, double>> values;  // the same numbers, for JSON output
    std::vector<std::string> notes;                      // supplementary diagnostics, not part of the verdict
    double seconds = 0;
};

struct VerifyOptions {
    std::uint64_t seed = 1;  // random directions and right sides
    int n = 5, k = 2;
};

/// Runs one criterion (1..9).
CriterionResult run_criterion(int id, const VerifyOptions& opt = {});

/// Empirical eps_0: the largest ladder value whose fixed-point iteration converges with every
/// contraction ratio below 1/2. Returns 0 if none does.
struct Eps0Scan {
    std::vector<double> ladder;
    std::vector<double> max_contraction;  // NaN where the iteration failed
    std::vector<std::string> outcome;
    double eps0 = 0;
};
Eps0Scan scan_eps0(const std::vector<double>& ladder);

}  // namespace sigmak
