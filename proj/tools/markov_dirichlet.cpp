#include <iostream>

#include <CLI11.hpp>

#include "markov_dirichlet/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fixed points of boundary-clamped Markov operators"};
    app.require_subcommand(1, 1);

    std::string config;
    double tol = 0.0;
    std::size_t max_iters = 0;
    std::uint64_t seed = 0;
    bool force = false;
    std::string out;

    for (const char* name : {"check", "solve", "study", "algebra"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--tol", tol, "stopping tolerance");
        sub->add_option("--max-iters", max_iters, "iteration cap");
        sub->add_option("--seed", seed, "random seed");
        sub->add_flag("--force", force, "iterate kernels that fail condition B");
        sub->add_option("--out", out, "output directory");
    }
    app.get_subcommand("check")->description("verify conditions A and B");
    app.get_subcommand("solve")->description("iterate to the fixed point and write the field");
    app.get_subcommand("study")->description("uniqueness, equicontinuity, decay and refinement tables");
    app.get_subcommand("algebra")->description("variance fields, polarization and the vanishing ideal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mdir::exit_ok : mdir::exit_usage;
    }

    auto* sub = app.get_subcommands().front();
    mdir::Overrides o;
    if (sub->count("--tol")) o.tol = tol;
    if (sub->count("--max-iters")) o.max_iters = max_iters;
    if (sub->count("--seed")) o.seed = seed;
    o.force = force;
    if (sub->count("--out")) o.out = out;
    return mdir::run_command(sub->get_name(), config, o, std::cout, std::cerr);
}
