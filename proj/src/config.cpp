#include "wavedp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wavedp {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int64_t out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(parse_double(key, trim(cell)));
    return out;
}

SceneKind parse_scene_kind(const std::string& v) {
    if (v == "single_pulse") return SceneKind::SinglePulse;
    if (v == "multi_pulse") return SceneKind::MultiPulse;
    if (v == "trapezoid_reverb") return SceneKind::TrapezoidReverb;
    if (v == "ring") return SceneKind::Ring;
    throw ConfigError("config: unknown scene kind '" + v + "'");
}

const char* scene_kind_name(SceneKind k) {
    switch (k) {
        case SceneKind::SinglePulse: return "single_pulse";
        case SceneKind::MultiPulse: return "multi_pulse";
        case SceneKind::TrapezoidReverb: return "trapezoid_reverb";
        case SceneKind::Ring: return "ring";
    }
    return "?";
}

std::string fmt_num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;

    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = line.substr(1, line.size() - 2);
            const char* known[] = {"scene", "grid",   "time",  "sensors", "noise",
                                   "model", "training", "anneal", "eval",  "seeds",
                                   "output", "sweep"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;

        if (full == "scene.kind") cfg.spec.scene.kind = parse_scene_kind(val);
        else if (full == "scene.pulses") cfg.spec.scene.pulse_count = static_cast<int>(parse_int(full, val));
        else if (full == "scene.sigma") cfg.spec.scene.pulse_sigma = parse_double(full, val);
        else if (full == "scene.seed") cfg.spec.scene.seed = static_cast<uint64_t>(parse_int(full, val));
        else if (full == "scene.ring_radius") cfg.spec.scene.ring.radius = parse_double(full, val);
        else if (full == "scene.ring_sigma") cfg.spec.scene.ring.sigma = parse_double(full, val);
        else if (full == "scene.source_x") {
            auto& p = cfg.spec.scene.pulses;
            if (p.empty()) p.push_back(GaussianPulse{});
            p[0].x0 = parse_double(full, val);
        } else if (full == "scene.source_y") {
            auto& p = cfg.spec.scene.pulses;
            if (p.empty()) p.push_back(GaussianPulse{});
            p[0].y0 = parse_double(full, val);
        }
        else if (full == "grid.m") cfg.spec.grid_m = parse_int(full, val);
        else if (full == "grid.extent") cfg.spec.extent = parse_double(full, val);
        else if (full == "time.samples") cfg.spec.n_samples = parse_int(full, val);
        else if (full == "time.duration") cfg.spec.duration = parse_double(full, val);
        else if (full == "time.c") cfg.spec.c = parse_double(full, val);
        else if (full == "sensors.count") cfg.spec.sensor_count = static_cast<int>(parse_int(full, val));
        else if (full == "sensors.min_dist") cfg.spec.sensor_min_dist = parse_double(full, val);
        else if (full == "sensors.region_lo") cfg.spec.region_lo = parse_double(full, val);
        else if (full == "sensors.region_hi") cfg.spec.region_hi = parse_double(full, val);
        else if (full == "sensors.inside_room") cfg.spec.sensors_in_room = val == "true" || val == "1";
        else if (full == "noise.snr_db") {
            cfg.spec.snr_db = (val == "inf") ? INFINITY : parse_double(full, val);
        }
        else if (full == "model.kind") {
            if (val != "dp" && val != "pinn")
                throw ConfigError("config: model kind must be dp or pinn, got '" + val + "'");
            cfg.model = val;
        }
        else if (full == "training.iters") cfg.iters = parse_int(full, val);
        else if (full == "training.lr") cfg.lr = parse_double(full, val);
        else if (full == "training.omega0") cfg.omega0 = parse_double(full, val);
        else if (full == "training.log_every") cfg.log_every = parse_int(full, val);
        else if (full == "training.pde_points") cfg.pinn_pde = parse_int(full, val);
        else if (full == "training.bcs_points") cfg.pinn_bcs = parse_int(full, val);
        else if (full == "training.sp_points") cfg.pinn_sp = parse_int(full, val);
        else if (full == "anneal.alpha") cfg.anneal.alpha = parse_double(full, val);
        else if (full == "anneal.every") cfg.anneal.update_every = static_cast<int>(parse_int(full, val));
        else if (full == "anneal.numerator") {
            if (val == "sum") cfg.anneal.numerator = AnnealNumerator::SumOverOwn;
            else if (val == "reference") cfg.anneal.numerator = AnnealNumerator::ReferenceOverOwn;
            else throw ConfigError("config: anneal numerator must be sum or reference");
        }
        else if (full == "eval.upsample") cfg.spec.upsample = parse_int(full, val);
        else if (full == "seeds.net") cfg.net_seed = static_cast<uint64_t>(parse_int(full, val));
        else if (full == "seeds.sensors") cfg.spec.sensor_seed = static_cast<uint64_t>(parse_int(full, val));
        else if (full == "seeds.noise") cfg.spec.noise_seed = static_cast<uint64_t>(parse_int(full, val));
        else if (full == "output.dir") cfg.out_dir = val;
        else if (full == "sweep.axis") cfg.sweep_axis = val;
        else if (full == "sweep.values") cfg.sweep_values = parse_list(full, val);
        else
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                              full + "'");
    }

    // physical validation
    if (cfg.spec.grid_m < 3) throw ConfigError("config: grid.m must be >= 3");
    if (cfg.spec.n_samples < 2) throw ConfigError("config: time.samples must be >= 2");
    if (!std::isfinite(cfg.spec.snr_db) && cfg.spec.snr_db < 0)
        throw ConfigError("config: noise.snr_db must be finite or inf");
    const SolverConfig check{cfg.spec.c, cfg.spec.dt(), cfg.spec.n_samples, cfg.spec.dr()};
    const CourantReport rep = courant_check(check);
    if (!rep.ok)
        throw ConfigError("config: discretization violates the stability bound, ratio = " +
                          std::to_string(rep.ratio));
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

DpRunConfig ExperimentConfig::dp_config() const {
    DpRunConfig out = dp_config_for(spec);
    out.omega0 = omega0;
    out.lr = lr;
    out.n_iters = iters;
    out.anneal = anneal;
    out.net_seed = net_seed;
    out.log_every = log_every;
    return out;
}

PinnRunConfig ExperimentConfig::pinn_config() const {
    PinnRunConfig out = pinn_config_for(spec);
    out.omega0 = omega0;
    out.lr = lr;
    out.n_iters = iters;
    out.pde_points = pinn_pde;
    out.bcs_points = pinn_bcs;
    out.sp_points = pinn_sp;
    out.anneal.alpha = anneal.alpha;
    out.anneal.update_every = anneal.update_every;
    out.net_seed = net_seed;
    out.log_every = log_every;
    return out;
}

std::string resolved_config_text(const ExperimentConfig& cfg) {
    std::ostringstream ss;
    ss << "[scene]\n";
    ss << "kind=" << scene_kind_name(cfg.spec.scene.kind) << "\n";
    ss << "pulses=" << cfg.spec.scene.pulse_count << "\n";
    ss << "sigma=" << fmt_num(cfg.spec.scene.pulse_sigma) << "\n";
    ss << "seed=" << cfg.spec.scene.seed << "\n";
    ss << "ring_radius=" << fmt_num(cfg.spec.scene.ring.radius) << "\n";
    ss << "ring_sigma=" << fmt_num(cfg.spec.scene.ring.sigma) << "\n";
    if (!cfg.spec.scene.pulses.empty()) {
        ss << "source_x=" << fmt_num(cfg.spec.scene.pulses[0].x0) << "\n";
        ss << "source_y=" << fmt_num(cfg.spec.scene.pulses[0].y0) << "\n";
    }
    ss << "[grid]\nm=" << cfg.spec.grid_m << "\nextent=" << fmt_num(cfg.spec.extent) << "\n";
    ss << "[time]\nsamples=" << cfg.spec.n_samples << "\nduration="
       << fmt_num(cfg.spec.duration) << "\nc=" << fmt_num(cfg.spec.c) << "\n";
    ss << "[sensors]\ncount=" << cfg.spec.sensor_count << "\nmin_dist="
       << fmt_num(cfg.spec.sensor_min_dist) << "\nregion_lo=" << fmt_num(cfg.spec.region_lo)
       << "\nregion_hi=" << fmt_num(cfg.spec.region_hi)
       << "\ninside_room=" << (cfg.spec.sensors_in_room ? "true" : "false") << "\n";
    ss << "[noise]\nsnr_db=" << (std::isinf(cfg.spec.snr_db) ? "inf" : fmt_num(cfg.spec.snr_db))
       << "\n";
    ss << "[model]\nkind=" << cfg.model << "\n";
    ss << "[training]\niters=" << cfg.iters << "\nlr=" << fmt_num(cfg.lr) << "\nomega0="
       << fmt_num(cfg.omega0) << "\nlog_every=" << cfg.log_every << "\npde_points="
       << cfg.pinn_pde << "\nbcs_points=" << cfg.pinn_bcs << "\nsp_points=" << cfg.pinn_sp
       << "\n";
    ss << "[anneal]\nalpha=" << fmt_num(cfg.anneal.alpha) << "\nevery="
       << cfg.anneal.update_every << "\nnumerator="
       << (cfg.anneal.numerator == AnnealNumerator::SumOverOwn ? "sum" : "reference") << "\n";
    ss << "[eval]\nupsample=" << cfg.spec.upsample << "\n";
    ss << "[seeds]\nnet=" << cfg.net_seed << "\nsensors=" << cfg.spec.sensor_seed << "\nnoise="
       << cfg.spec.noise_seed << "\n";
    ss << "[output]\ndir=" << cfg.out_dir << "\n";
    if (!cfg.sweep_axis.empty()) {
        ss << "[sweep]\naxis=" << cfg.sweep_axis << "\nvalues=";
        for (size_t i = 0; i < cfg.sweep_values.size(); ++i)
            ss << (i ? "," : "") << fmt_num(cfg.sweep_values[i]);
        ss << "\n";
    }
    return ss.str();
}

uint64_t fnv1a_hash(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace wavedp
