#include <iostream>

#include <CLI11.hpp>

#include "lafano/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lafano: laser-assisted Fano resonance simulation and RABBIT analysis"};
    app.set_version_flag("--version", lafano::version_string());
    app.require_subcommand(1);

    lafano::CliRequest req;
    std::string out;
    const char* names[][2] = {
        {"eigen", "bound levels of the model potential"},
        {"tdse-scan", "TDSE photoelectron spectrogram over a delay axis"},
        {"two-level-scan", "two-level pathway amplitudes, spectrogram and minima locus"},
        {"lineshape", "analytic complex-plane Fano lineshapes"},
        {"fit", "local cosine fit of a spectrogram"},
        {"reconstruct", "fit plus time-domain resonant wave packet"},
    };
    for (const auto& n : names) {
        auto* sub = app.add_subcommand(n[0], n[1]);
        sub->add_option("--config", req.config_path, "JSON config file (flat field names)");
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--jobs", req.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", req.seed, "random seed (noise studies)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : lafano::ExitCode::config_error;
    }
    for (auto* sub : app.get_subcommands()) req.scenario = sub->get_name();
    req.out_dir = out;
    return lafano::run_request(req, std::cerr);
}
