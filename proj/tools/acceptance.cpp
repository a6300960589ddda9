// Prints one PASS/FAIL line per acceptance criterion, followed by indented diagnostics.
// Exit status is 1 if any criterion fails, unless --report-only is given.

#include "sigmak/errors.hpp"
#include "sigmak/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    std::uint64_t seed = 1;
    bool report_only = false;
    app.add_option("--only", only, "criteria to run (default 1..9)")->check(CLI::Range(1, 9));
    app.add_option("--seed", seed, "seed for random directions and right sides");
    app.add_flag("--report-only", report_only, "exit 0 whatever the verdicts");
    CLI11_PARSE(app, argc, argv);
    if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    sigmak::VerifyOptions opt;
    opt.seed = seed;
    int failed = 0;
    for (int id : only) {
        sigmak::CriterionResult r;
        try {
            r = sigmak::run_criterion(id, opt);
        } catch (const std::exception& e) {
            r.id = id;
            r.title = "error";
            r.pass = false;
            r.detail = e.what();
        }
        if (!r.pass) ++failed;
        std::printf("criterion %d %s: %s [%.1f s] %s\n", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds,
                    r.detail.c_str());
        for (const auto& n : r.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria pass\n", int(only.size()) - failed, only.size());
    return failed && !report_only ? 1 : 0;
}
