#include "wavedp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wavedp {

namespace {

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return is;
}

void expect_magic(std::istream& is, const char* magic, const std::filesystem::path& path) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(path.string() + ": bad magic, expected " + magic);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_field(const std::filesystem::path& path, const FieldSequence& seq) {
    std::ofstream os = open_out(path, true);
    os.write("WFD1", 4);
    write_u32(os, static_cast<uint32_t>(seq.frames.size()));
    write_u32(os, static_cast<uint32_t>(seq.m));
    write_f64(os, seq.dr);
    write_f64(os, seq.dt);
    for (const Tensor& f : seq.frames)
        os.write(reinterpret_cast<const char*>(f.data()),
                 static_cast<std::streamsize>(f.size() * 8));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

FieldSequence read_field(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, true);
    expect_magic(is, "WFD1", path);
    FieldSequence seq;
    const uint32_t n_frames = read_u32(is);
    seq.m = read_u32(is);
    seq.dr = read_f64(is);
    seq.dt = read_f64(is);
    for (uint32_t n = 0; n < n_frames; ++n) {
        Tensor f({seq.m, seq.m});
        is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * 8));
        seq.frames.push_back(std::move(f));
    }
    if (!is) throw std::runtime_error("truncated field file: " + path.string());
    return seq;
}

void write_mlp(const std::filesystem::path& path, const MlpParams& params) {
    std::ofstream os = open_out(path, true);
    os.write("MLP1", 4);
    write_u32(os, static_cast<uint32_t>(params.weights.size()));
    for (size_t l = 0; l < params.weights.size(); ++l) {
        const Tensor& w = params.weights[l];
        write_u32(os, static_cast<uint32_t>(w.rows()));
        write_u32(os, static_cast<uint32_t>(w.cols()));
        os.write(reinterpret_cast<const char*>(w.data()),
                 static_cast<std::streamsize>(w.size() * 8));
        os.write(reinterpret_cast<const char*>(params.biases[l].data()),
                 static_cast<std::streamsize>(params.biases[l].size() * 8));
    }
    write_f64(os, params.omega0);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

MlpParams read_mlp(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, true);
    expect_magic(is, "MLP1", path);
    MlpParams params;
    const uint32_t n_layers = read_u32(is);
    for (uint32_t l = 0; l < n_layers; ++l) {
        const int64_t rows = read_u32(is);
        const int64_t cols = read_u32(is);
        Tensor w({rows, cols});
        is.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size() * 8));
        Tensor b({cols});
        is.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size() * 8));
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    params.omega0 = read_f64(is);
    if (!is) throw std::runtime_error("truncated checkpoint: " + path.string());
    return params;
}

void write_sensors_csv(const std::filesystem::path& path, const SensorSet& sensors,
                       const GridSpec& grid) {
    std::ofstream os = open_out(path, false);
    os << "i,j,x,y\n";
    for (const auto& ij : sensors.indices)
        os << ij[0] << "," << ij[1] << "," << fmt(grid.x(ij[1])) << "," << fmt(grid.y(ij[0]))
           << "\n";
}

SensorSet read_sensors_csv(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, false);
    std::string line;
    std::getline(is, line);  // header
    SensorSet out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::array<int64_t, 2> ij{};
        std::getline(ss, cell, ',');
        ij[0] = std::stoll(cell);
        std::getline(ss, cell, ',');
        ij[1] = std::stoll(cell);
        out.indices.push_back(ij);
    }
    return out;
}

void write_measurements_csv(const std::filesystem::path& path, const Measurements& m) {
    std::ofstream os = open_out(path, false);
    os << "sensor_id,t_index,value\n";
    for (int64_t s = 0; s < m.sensor_count(); ++s)
        for (int64_t n = 0; n < m.sample_count(); ++n)
            os << s << "," << n << "," << fmt(m.values.at(s, n)) << "\n";
}

Measurements read_measurements_csv(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, false);
    std::string line;
    std::getline(is, line);
    struct Row {
        int64_t s, n;
        double v;
    };
    std::vector<Row> rows;
    int64_t max_s = -1, max_n = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        Row r{};
        std::getline(ss, cell, ',');
        r.s = std::stoll(cell);
        std::getline(ss, cell, ',');
        r.n = std::stoll(cell);
        std::getline(ss, cell, ',');
        r.v = std::stod(cell);
        max_s = std::max(max_s, r.s);
        max_n = std::max(max_n, r.n);
        rows.push_back(r);
    }
    Measurements out;
    out.values = Tensor({max_s + 1, max_n + 1});
    for (const Row& r : rows) out.values.at(r.s, r.n) = r.v;
    return out;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossRow>& rows) {
    std::ofstream os = open_out(path, false);
    os << "iteration,loss_total,loss_data,loss_sp,loss_pde,loss_bcs,"
          "lambda_data,lambda_sp,lambda_pde,lambda_bcs,wall_seconds\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
    for (const LossRow& r : rows)
        os << r.iteration << "," << fmt(r.total) << "," << fmt(r.data) << "," << fmt(r.sp) << ","
           << cell(r.pde) << "," << cell(r.bcs) << "," << fmt(r.lambda_data) << ","
           << fmt(r.lambda_sp) << "," << cell(r.lambda_pde) << "," << cell(r.lambda_bcs) << ","
           << fmt(r.wall_seconds) << "\n";
}

void write_pgm(const std::filesystem::path& path, const Tensor& frame, double limit) {
    if (limit <= 0.0) limit = 1.0;
    std::ofstream os = open_out(path, true);
    os << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(frame.cols()));
    for (int64_t i = 0; i < frame.rows(); ++i) {
        for (int64_t j = 0; j < frame.cols(); ++j) {
            const double u = std::clamp(frame.at(i, j) / limit, -1.0, 1.0);
            row[static_cast<size_t>(j)] =
                static_cast<unsigned char>(std::lround((u + 1.0) * 127.5));
        }
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size()));
    }
}

}  // namespace wavedp
