#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "satstab/commands.hpp"
#include "satstab/config.hpp"
#include "satstab/errors.hpp"

namespace cli = satstab::cli;

namespace {

int with_config(const std::string& path, auto&& run) {
    satstab::ExperimentConfig cfg;
    try {
        cfg = satstab::load_config(path);
        satstab::apply_env_overrides(cfg);
    } catch (const satstab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code(e.kind());
    }
    return run(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Saturated feedback stabilization of fourth-order parabolic PDEs"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> certificate;
    std::string sweep;
    int sweep_iterations = 8;
    cli::GronwallArgs g;

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and eigenfunction diagnostics");
    auto* modal = app.add_subcommand("modal", "finite-dimensional unstable subsystem");
    auto* synth = app.add_subcommand("synth", "gain, LMI certificate and H2 constants");
    auto* simulate = app.add_subcommand("simulate", "closed-loop Galerkin simulation");
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    for (auto* sub : {spectrum, modal, synth, simulate, verify}) {
        sub->add_option("config", config, "experiment JSON")->required();
    }
    simulate->add_option("--certificate", certificate, "certificate JSON from synth");
    simulate->add_option("--sweep", sweep, "basin bisection bracket lo,hi");
    simulate->add_option("--sweep-iterations", sweep_iterations, "bisection steps")->check(CLI::PositiveNumber);
    verify->add_option("--certificate", certificate, "certificate JSON to check instead of a fresh one");

    auto* gron = app.add_subcommand("gronwall", "Bernoulli-Gronwall bound for constant coefficients");
    gron->add_option("--v0", g.v0, "initial value")->capture_default_str();
    gron->add_option("--p", g.p, "exponent (p != 1)")->capture_default_str();
    gron->add_option("--b", g.b, "linear coefficient")->capture_default_str();
    gron->add_option("--k", g.k, "nonlinear coefficient")->capture_default_str();
    gron->add_option("--T", g.T, "horizon")->capture_default_str();
    gron->add_option("--steps", g.steps, "grid intervals")->capture_default_str();
    gron->add_option("-o,--output", g.output, "CSV path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::ConfigError;
    }

    if (spectrum->parsed()) {
        return with_config(config, [](const auto& c) { return cli::cmd_spectrum(c, std::cout, std::cerr); });
    }
    if (modal->parsed()) {
        return with_config(config, [](const auto& c) { return cli::cmd_modal(c, std::cout, std::cerr); });
    }
    if (synth->parsed()) {
        return with_config(config, [](const auto& c) { return cli::cmd_synth(c, std::cout, std::cerr); });
    }
    if (simulate->parsed()) {
        cli::SimulateOptions opts;
        opts.certificate = certificate;
        opts.sweep_iterations = sweep_iterations;
        if (!sweep.empty()) {
            const auto comma = sweep.find(',');
            try {
                if (comma == std::string::npos) throw std::invalid_argument("missing comma");
                opts.sweep = std::make_pair(std::stod(sweep.substr(0, comma)), std::stod(sweep.substr(comma + 1)));
            } catch (const std::exception&) {
                std::cerr << "error: --sweep expects lo,hi\n";
                return cli::ConfigError;
            }
        }
        return with_config(config, [&](const auto& c) { return cli::cmd_simulate(c, opts, std::cout, std::cerr); });
    }
    if (verify->parsed()) {
        return with_config(config, [&](const auto& c) { return cli::cmd_verify(c, certificate, std::cout, std::cerr); });
    }
    return cli::cmd_gronwall(g, std::cout, std::cerr);
}
