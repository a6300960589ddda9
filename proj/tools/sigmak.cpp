// sigmak: runs one pipeline command on a configuration file and writes its artifacts.

#include "sigmak/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"constant sigma_k gluing pipeline"};
    std::string config_path, out_dir, command = "verify", ladder;
    std::uint64_t seed = 0;
    bool dat = false;
    const auto& cmds = sigmak::pipeline_commands();
    app.add_option("--config", config_path, "key = value configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory (overrides out_dir)");
    app.add_option("--command", command, "pipeline command")->check(CLI::IsMember(cmds));
    app.add_option("--epsilon-ladder", ladder, "comma-separated necksizes (overrides epsilon)");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks (overrides seed)");
    app.add_flag("--dat", dat, "also write gnuplot .dat companions");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> echo(argv, argv + argc);
    sigmak::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = sigmak::config_parse_file(config_path);
        if (!ladder.empty()) {
            cfg.epsilon.clear();
            std::istringstream in(ladder);
            std::string item;
            while (std::getline(in, item, ',')) {
                std::size_t pos = 0;
                cfg.epsilon.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw sigmak::config_error("bad --epsilon-ladder entry '" + item + "'");
            }
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (*seed_opt) cfg.seed = seed;
        if (dat) cfg.dat = true;
        sigmak::validate(cfg);
    } catch (const sigmak::Error& e) {
        std::cerr << "sigmak: " << e.what() << '\n';
        return sigmak::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "sigmak: bad --epsilon-ladder: " << e.what() << '\n';
        return 2;
    }
    return sigmak::run_pipeline(cfg, command, echo);
}
