#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "wavedp/fdtd.hpp"
#include "wavedp/siren.hpp"

namespace wavedp {

/// Field dump: magic "WFD1", u32 n_frames, u32 m, f64 dr, f64 dt,
/// then n_frames*m*m little-endian f64, frame-major, row-major per frame.
void write_field(const std::filesystem::path& path, const FieldSequence& seq);
FieldSequence read_field(const std::filesystem::path& path);

/// Checkpoint: magic "MLP1", u32 n_layers, per layer u32 rows, u32 cols,
/// f64 weights row-major, f64 biases, then f64 omega0.
void write_mlp(const std::filesystem::path& path, const MlpParams& params);
MlpParams read_mlp(const std::filesystem::path& path);

void write_sensors_csv(const std::filesystem::path& path, const SensorSet& sensors,
                       const GridSpec& grid);
SensorSet read_sensors_csv(const std::filesystem::path& path);

void write_measurements_csv(const std::filesystem::path& path, const Measurements& m);
Measurements read_measurements_csv(const std::filesystem::path& path);

struct LossRow {
    int64_t iteration = 0;
    double total = 0, data = 0, sp = 0;
    double pde = std::numeric_limits<double>::quiet_NaN();  // NaN renders as empty (DP runs)
    double bcs = std::numeric_limits<double>::quiet_NaN();
    double lambda_data = 1, lambda_sp = 1;
    double lambda_pde = std::numeric_limits<double>::quiet_NaN();
    double lambda_bcs = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0;
};

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRow>& rows);

/// 8-bit binary PGM, symmetric range +-limit mapped onto 0..255.
void write_pgm(const std::filesystem::path& path, const Tensor& frame, double limit);

}  // namespace wavedp
