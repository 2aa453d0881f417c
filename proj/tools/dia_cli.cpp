#include "dia/cli.hpp"
#include "dia/config.hpp"
#include "dia/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Deferred income annuity purchase toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    dia::CliArgs args;
    double age{}, wealth{}, income{};
    std::size_t paths{};
    std::uint64_t seed{};

    app.add_option("--config", config_path, "flat key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one key (key=value); repeatable")->allow_extra_args(false);
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    auto* seed_opt = app.add_option("--seed", seed, "simulation seed (overrides sim.seed)");
    auto* age_opt = app.add_option("--age", age, "age in years");
    auto* wealth_opt = app.add_option("--wealth", wealth, "liquid wealth in pension units");
    auto* income_opt = app.add_option("--income", income, "DIA income already held");
    auto* paths_opt = app.add_option("--paths", paths, "Monte Carlo paths (overrides sim.paths)");

    const char* help[] = {"price the DIA at --age",
                          "solve the post-retirement problem, export the slice at --age",
                          "solve both phases, export the pre-retirement slice at --age",
                          "annuitization boundary w*(I) at --age (default: every whole year)",
                          "allocation and purchase flags on the wealth core at --age",
                          "minimum purchase for the state (--age, --wealth, --income)",
                          "compare strategies by Monte Carlo from (--age, --wealth, --income)"};
    std::string chosen;
    const auto& names = dia::subcommands();
    for (std::size_t i = 0; i < names.size(); ++i)
        app.add_subcommand(names[i], help[i])->fallthrough()->callback([&chosen, n = names[i]] { chosen = n; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dia::kExitUsage;
    }

    if (*age_opt) args.age = age;
    if (*wealth_opt) args.wealth = wealth;
    if (*income_opt) args.income = income;
    if (*paths_opt) args.paths = paths;
    if (*seed_opt) args.seed = seed;
    if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);

    dia::RunConfig config;
    try {
        config = dia::load_config(config_path, overrides);
    } catch (const dia::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return dia::kExitUsage;
    }
    return dia::run_subcommand(chosen, config, args, std::cout, std::cerr);
}
