#pragma once

// Command-line front end: configuration, command dispatch and output files.

#include "sigmak/errors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sigmak {

struct RunConfig {
    int n = 5, k = 2;
    std::vector<double> eta = {0.5, 0.5};          // per end; the whole list is swept by delaunay-level commands
    std::vector<double> epsilon = {1e-3};          // ladder for glue-level commands
    std::optional<double> delta, gamma;            // empty: midpoints of the admissible windows
    int steps_per_period = 200;                    // h_t = T / steps_per_period
    int np = 49;                                   // psi-nodes
    int M_max = 12;                                // spherical-harmonic bands in the spectral tables
    std::string truncation = "doubling";           // half-cylinder truncation policy (only doubling)
    double tol = 1e-9;                             // Newton stopping tolerance (weighted residual)
    int max_iter = 60;
    double coeff_cap = 0.1;
    bool relinearize = false;                      // Newton's method instead of the fixed-point scheme
    double schwarzschild_h0 = 0.3, schwarzschild_c = 0.0;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    bool dat = false;                              // gnuplot .dat companions of every CSV

    double delta_value() const;
    double gamma_value() const;
};

/// Parses `key = value` lines; `#` starts a comment. Lists are comma separated, and a comma-separated
/// segment containing `=` starts a new pair, so "k = 3, n = 5" sets both. Every window is validated;
/// violations throw a Config error naming the window.
RunConfig config_parse_text(const std::string& text);
RunConfig config_parse_file(const std::string& path);
void validate(const RunConfig& cfg);

const std::vector<std::string>& pipeline_commands();

/// Exit status for an error kind: 2 configuration, 3 resonant radius, 4 divergence or failed
/// construction, 5 accuracy, 6 I/O.
int exit_code(ErrorKind kind);

/// Runs one command and writes its artifacts into cfg.out_dir. Returns the exit status; module
/// errors are caught, reported on stderr and mapped through exit_code.
int run_pipeline(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& argv_echo = {});

}  // namespace sigmak
