#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "wavedp/config.hpp"
#include "wavedp/experiment.hpp"
#include "wavedp/io.hpp"
#include "wavedp/losses.hpp"

namespace fs = std::filesystem;
using namespace wavedp;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUser = 2;

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    os << text;
}

void update_summary(const fs::path& path, const std::map<std::string, std::string>& updates) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    if (fs::exists(path)) {
        std::ifstream is(path);
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string k = line.substr(0, eq);
            if (!kv.count(k)) order.push_back(k);
            kv[k] = line.substr(eq + 1);
        }
    }
    for (const auto& [k, v] : updates) {
        if (!kv.count(k)) order.push_back(k);
        kv[k] = v;
    }
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    for (const std::string& k : order) os << k << "=" << kv[k] << "\n";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_oracle(const ExperimentConfig& cfg) {
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    SceneData data = make_scene_data(cfg.spec);
    write_field(out / "reference.wfd", data.reference);
    write_sensors_csv(out / "sensors.csv", data.sensors, data.grid);
    write_measurements_csv(out / "measurements.csv", data.noisy);
    write_measurements_csv(out / "measurements_clean.csv", data.clean);
    write_text(out / "config.resolved", resolved_config_text(cfg));

    std::cout << "reference: " << (out / "reference.wfd").string() << " ("
              << data.reference.frames.size() << " frames, m=" << data.reference.m << ")\n";
    std::cout << "sensors: " << data.sensors.count() << ", snr_db: "
              << (std::isinf(cfg.spec.snr_db) ? std::string("inf") : fmt(cfg.spec.snr_db))
              << "\n";
    return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
    const fs::path out(cfg.out_dir);
    if (!fs::exists(out / "measurements.csv") || !fs::exists(out / "sensors.csv")) {
        std::cerr << "train: missing measurements in " << out
                  << " (run the oracle command first)\n";
        return kExitUser;
    }
    Measurements obs = read_measurements_csv(out / "measurements.csv");
    SensorSet sensors = read_sensors_csv(out / "sensors.csv");

    const std::string resolved = resolved_config_text(cfg);
    write_text(out / "config.resolved", resolved);
    const uint64_t hash = fnv1a_hash(resolved);

    auto progress = [&](const LossRow& row) {
        if (row.iteration % 1000 == 0)
            std::cout << "iter " << row.iteration << " total " << fmt(row.total) << " data "
                      << fmt(row.data) << " sp " << fmt(row.sp) << "\n"
                      << std::flush;
    };

    TrainResult result;
    if (cfg.model == "dp") {
        result = dp_train(cfg.dp_config(), obs, sensors, progress);
    } else {
        result = pinn_train(cfg.pinn_config(), obs, sensors, cfg.spec.grid(), progress);
    }

    write_mlp(out / "checkpoint.mlp", result.params);
    write_loss_csv(out / "loss.csv", result.log);
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(hash));
    update_summary(out / "summary.txt",
                   {{"config_hash", hash_hex},
                    {"model", cfg.model},
                    {"iterations", std::to_string(result.iterations)},
                    {"wall_seconds", fmt(result.wall_seconds)},
                    {"final_loss_total", fmt(result.log.back().total)}});
    std::cout << "checkpoint: " << (out / "checkpoint.mlp").string() << " after "
              << result.iterations << " iterations, " << fmt(result.wall_seconds) << " s\n";
    return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_override,
             const std::vector<double>& frame_times, bool images) {
    const fs::path out(cfg.out_dir);
    const fs::path ckpt = checkpoint_override.empty() ? out / "checkpoint.mlp"
                                                      : fs::path(checkpoint_override);
    if (!fs::exists(ckpt)) {
        std::cerr << "eval: checkpoint not found: " << ckpt << "\n";
        return kExitUser;
    }
    if (!fs::exists(out / "reference.wfd")) {
        std::cerr << "eval: reference not found in " << out << "\n";
        return kExitUser;
    }

    MlpParams params = read_mlp(ckpt);
    FieldSequence reference = read_field(out / "reference.wfd");

    Evaluation eval;
    if (cfg.model == "dp") {
        eval = dp_evaluate(params, cfg.dp_config(), cfg.spec.upsample, reference);
    } else {
        eval = pinn_evaluate(params, cfg.pinn_config(), reference);
    }

    write_field(out / "reconstruction.wfd", eval.field);
    update_summary(out / "summary.txt", {{"nmse", fmt(eval.nmse)}});
    std::cout << "nmse=" << fmt(eval.nmse) << "\n";

    if (images || !frame_times.empty()) {
        // shared scale across the series so amplitude decay stays visible
        double limit = 0.0;
        for (const Tensor& f : eval.field.frames)
            for (int64_t i = 0; i < f.size(); ++i) limit = std::max(limit, std::abs(f[i]));
        std::vector<int64_t> picks;
        if (frame_times.empty()) {
            for (size_t n = 0; n < eval.field.frames.size();
                 n += std::max<size_t>(1, eval.field.frames.size() / 5))
                picks.push_back(static_cast<int64_t>(n));
        } else {
            for (double t : frame_times) {
                const int64_t n = std::llround(t / eval.field.dt);
                picks.push_back(std::clamp<int64_t>(
                    n, 0, static_cast<int64_t>(eval.field.frames.size()) - 1));
            }
        }
        for (int64_t n : picks) {
            char name[64];
            std::snprintf(name, sizeof name, "frames/recon_%04lld.pgm",
                          static_cast<long long>(n));
            write_pgm(out / name, eval.field.frames[static_cast<size_t>(n)], limit);
            Tensor diff(eval.field.frames[static_cast<size_t>(n)].shape());
            const Tensor& ref = reference.frames[static_cast<size_t>(n)];
            for (int64_t i = 0; i < diff.size(); ++i)
                diff[i] = eval.field.frames[static_cast<size_t>(n)][i] - ref[i];
            std::snprintf(name, sizeof name, "frames/diff_%04lld.pgm",
                          static_cast<long long>(n));
            write_pgm(out / name, diff, limit);
        }
        std::cout << "frames: " << picks.size() << " written under "
                  << (out / "frames").string() << "\n";
    }
    return 0;
}

ExperimentConfig sweep_point(const ExperimentConfig& base, const std::string& axis, double value,
                             size_t index) {
    ExperimentConfig cfg = base;
    cfg.sweep_axis.clear();
    cfg.sweep_values.clear();
    char sub[64];
    std::snprintf(sub, sizeof sub, "%s_%g", axis.c_str(), value);
    cfg.out_dir = (fs::path(base.out_dir) / sub).string();
    // isolated workers get derived seeds
    cfg.net_seed = base.net_seed + index;
    cfg.spec.sensor_seed = base.spec.sensor_seed + index;
    cfg.spec.noise_seed = base.spec.noise_seed + index;

    if (axis == "snr") {
        cfg.spec.snr_db = value;
    } else if (axis == "sigma") {
        cfg.spec.scene.pulse_sigma = value;
        cfg.spec.scene.pulses.clear();
    } else if (axis == "source_distance") {
        // offset along the diagonal, in units of the half-aperture
        const double half_aperture =
            0.5 * (cfg.spec.region_hi - cfg.spec.region_lo) * cfg.spec.extent;
        const double off = value * half_aperture / std::sqrt(2.0);
        const double cx = 0.5 * cfg.spec.extent;
        cfg.spec.scene.pulses = {
            GaussianPulse{cx + off, cx + off, 1.0, cfg.spec.scene.pulse_sigma}};
    } else if (axis == "downsample") {
        const int64_t d = static_cast<int64_t>(value);
        const int64_t base_cells = base.spec.grid_m - 1;
        if (d < 1 || base_cells % d != 0)
            throw ConfigError("sweep: downsample factor " + std::to_string(d) +
                              " does not divide the " + std::to_string(base_cells) +
                              "-cell base grid");
        cfg.spec.grid_m = base_cells / d + 1;
        cfg.spec.upsample = base.spec.upsample * d;  // keep the reference lattice fixed
    } else {
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    }
    return cfg;
}

int cmd_sweep(const ExperimentConfig& base) {
    if (base.sweep_axis.empty() || base.sweep_values.empty()) {
        std::cerr << "sweep: config needs a [sweep] section with axis and values\n";
        return kExitUser;
    }
    const fs::path out(base.out_dir);
    fs::create_directories(out);
    std::ofstream csv(out / ("sweep_" + base.model + ".csv"));
    csv << "value,nmse,status\n";

    int failures = 0;
    for (size_t i = 0; i < base.sweep_values.size(); ++i) {
        const double value = base.sweep_values[i];
        try {
            ExperimentConfig point = sweep_point(base, base.sweep_axis, value, i);
            std::cout << "[sweep " << base.sweep_axis << "=" << value << "] -> "
                      << point.out_dir << "\n";
            if (int rc = cmd_oracle(point); rc != 0) throw std::runtime_error("oracle failed");
            if (int rc = cmd_train(point); rc != 0) throw std::runtime_error("train failed");

            MlpParams params = read_mlp(fs::path(point.out_dir) / "checkpoint.mlp");
            FieldSequence reference = read_field(fs::path(point.out_dir) / "reference.wfd");
            const double v =
                point.model == "dp"
                    ? dp_evaluate(params, point.dp_config(), point.spec.upsample, reference).nmse
                    : pinn_evaluate(params, point.pinn_config(), reference).nmse;
            csv << value << "," << fmt(v) << ",ok\n" << std::flush;
        } catch (const std::exception& e) {
            std::cerr << "[sweep " << base.sweep_axis << "=" << value << "] failed: " << e.what()
                      << "\n";
            csv << value << ",,failed\n" << std::flush;
            ++failures;
        }
    }
    return failures == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sound field reconstruction with a differentiable wave solver"};
    app.require_subcommand(1);

    std::string config_path, out_override, checkpoint;
    int64_t seed_override = -1;
    std::vector<double> frame_times;
    bool images = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_override, "output directory override");
        cmd->add_option("--seed", seed_override, "network seed override");
    };

    CLI::App* oracle = app.add_subcommand("oracle", "generate reference field and measurements");
    add_common(oracle);
    CLI::App* train = app.add_subcommand("train", "fit a model to the measurements");
    add_common(train);
    CLI::App* eval = app.add_subcommand("eval", "reconstruct and score against the reference");
    add_common(eval);
    eval->add_option("--checkpoint", checkpoint, "checkpoint path override");
    eval->add_option("--frames", frame_times, "times to export as images")->delimiter(',');
    eval->add_flag("--images", images, "write grayscale frame images");
    CLI::App* sweep = app.add_subcommand("sweep", "train/eval across a parameter axis");
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    try {
        cfg = parse_config_file(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_override >= 0) cfg.net_seed = static_cast<uint64_t>(seed_override);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitUser;
    }

    try {
        if (oracle->parsed()) return cmd_oracle(cfg);
        if (train->parsed()) return cmd_train(cfg);
        if (eval->parsed()) return cmd_eval(cfg, checkpoint, frame_times, images);
        if (sweep->parsed()) return cmd_sweep(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
