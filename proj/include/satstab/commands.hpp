#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "satstab/config.hpp"
#include "satstab/errors.hpp"
#include "satstab/modal.hpp"
#include "satstab/simulate.hpp"
#include "satstab/spectral.hpp"
#include "satstab/synthesis.hpp"

namespace satstab::cli {

enum ExitCode : int { Ok = 0, ConfigError = 2, NumericalFailure = 3, Infeasible = 4 };

int exit_code(ErrorKind kind) noexcept;

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Everything derived from one config, built up to the requested stage.
struct Pipeline {
    enum class Stage { Spectrum, Modal, Synthesis };

    std::shared_ptr<const EigenSystem> es;
    UnstableCount unstable;
    std::optional<ModalSystem> ms;
    std::optional<KalmanReport> kalman;
    std::optional<Gain> gain;
    std::optional<Certificate> cert;
    std::optional<H2Constants> h2;
};

Pipeline build_pipeline(const ExperimentConfig& cfg, Pipeline::Stage stage);

std::string certificate_json(const Pipeline& p, const ExperimentConfig& cfg);

struct LoadedCertificate {
    Gain gain;
    Certificate cert;
    std::optional<H2Constants> h2;
};
// Reads K, P, D, C (and the H2 constants when present) back from
// certificate_json output. Shapes are checked against `ms`.
LoadedCertificate load_certificate(const std::string& path, const ModalSystem& ms);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

int cmd_spectrum(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_modal(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

struct SimulateOptions {
    std::optional<std::string> certificate;
    // Amplitude bracket for the empirical basin bisection.
    std::optional<std::pair<double, double>> sweep;
    int sweep_iterations = 8;
};
int cmd_simulate(const ExperimentConfig& cfg, const SimulateOptions& opts, std::ostream& out, std::ostream& err);

int cmd_verify(const ExperimentConfig& cfg, const std::optional<std::string>& certificate, std::ostream& out,
               std::ostream& err);

struct GronwallArgs {
    double v0 = 0.5;
    double p = 2.0;
    double b = -1.0;  // constant coefficients
    double k = 1.0;
    double T = 5.0;
    std::size_t steps = 100;
    std::string output = "gronwall.csv";
};
int cmd_gronwall(const GronwallArgs& args, std::ostream& out, std::ostream& err);

// Invariant suites behind `verify`; each entry is (suite name, failure
// messages). Empty failures means the suite passed.
struct SuiteResult {
    std::string name;
    std::vector<std::string> failures;
    std::size_t checks = 0;
};
std::vector<SuiteResult> run_verification(const Pipeline& p, const ExperimentConfig& cfg,
                                          const std::optional<LoadedCertificate>& external);

} // namespace satstab::cli
