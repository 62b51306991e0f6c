#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wavedp/experiment.hpp"

namespace wavedp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fully resolved experiment description parsed from the line-oriented
/// config format: [section] headers with key=value pairs, '#' comments.
/// Unknown sections or keys are rejected.
struct ExperimentConfig {
    ExperimentSpec spec;

    std::string model = "dp";  // dp | pinn
    int64_t iters = 50000;
    double lr = 1e-4;
    double omega0 = 30.0;
    uint64_t net_seed = 1;
    int64_t log_every = 1;

    AnnealSettings anneal;
    int64_t pinn_pde = 2000;
    int64_t pinn_bcs = 800;
    int64_t pinn_sp = 200;

    std::string out_dir = "runs/out";

    std::string sweep_axis;  // snr | sigma | source_distance | downsample
    std::vector<double> sweep_values;

    DpRunConfig dp_config() const;
    PinnRunConfig pinn_config() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Canonical serialization of every resolved value; hashing this pins a run.
std::string resolved_config_text(const ExperimentConfig& cfg);
uint64_t fnv1a_hash(const std::string& text);

}  // namespace wavedp
