#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "satstab/modal.hpp"
#include "satstab/saturation.hpp"
#include "satstab/spectral.hpp"

namespace satstab {

struct ExperimentConfig {
    BoundaryCondition bc = BoundaryCondition::Hinged;
    ModalMode mode = ModalMode::Internal;
    double lambda = 2.0;
    double length = 3.141592653589793;
    double delta = 0.0;
    double nu = 0.0;
    SaturationLevel ell{1.0};
    std::vector<ActuatorShape> actuators;

    struct Synthesis {
        std::vector<double> poles;
        bool lqr = false;
        double q = 1.0;
        double r = 1.0;
        // Optional user certificate; C defaults to zero.
        std::optional<Eigen::MatrixXd> P;
        std::optional<Eigen::VectorXd> D;
        std::optional<Eigen::MatrixXd> C;
    } synthesis;

    std::size_t J = 0;  // 0: max(64, 8n)
    double dt = 1e-3;
    double T = 5.0;

    struct Initial {
        std::vector<double> modal;
        std::string preset = "unstable";
        double amplitude = 0.1;
    } initial;

    std::uint64_t seed = 1;
    std::string output_dir = ".";

    // Range checks that do not need the spectrum.
    void validate() const;
};

// Throws Error(InvalidArgument) on malformed JSON, unknown keys or bad values.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// SATSTAB_SEED, when set, replaces cfg.seed.
void apply_env_overrides(ExperimentConfig& cfg);

} // namespace satstab
