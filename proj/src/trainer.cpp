#include "wavedp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "train_util.hpp"
#include "wavedp/losses.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace wavedp {

namespace internal {

// The per-iteration tape churns tens of MB of same-sized blocks; keeping
// them on the heap instead of round-tripping through mmap cuts the page
// fault cost substantially.
void tune_allocator() {
#if defined(__GLIBC__)
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
        mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
        return true;
    }();
    (void)done;
#endif
}

std::vector<const Tensor*> grads_in_order(const GradientMap& map, const TapedMlp& net) {
    std::vector<const Tensor*> out;
    for (NodeId id : net.all()) out.push_back(&map.at(id));
    return out;
}

std::vector<Tensor> combine_scaled(const std::vector<const Tensor*>& a, double ka,
                                   const std::vector<const Tensor*>& b, double kb) {
    std::vector<Tensor> out;
    out.reserve(a.size());
    for (size_t k = 0; k < a.size(); ++k) {
        Tensor t(a[k]->shape());
        for (int64_t i = 0; i < t.size(); ++i) t[i] = ka * (*a[k])[i] + kb * (*b[k])[i];
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace internal

namespace {

struct ParamPack {
    std::vector<Tensor*> ptrs;  // weights then biases, matching TapedMlp::all()
    explicit ParamPack(MlpParams& p) {
        for (Tensor& w : p.weights) ptrs.push_back(&w);
        for (Tensor& b : p.biases) ptrs.push_back(&b);
    }
};

}  // namespace

TrainResult dp_train(const DpRunConfig& cfg, const Measurements& observations,
                     const SensorSet& sensors, const ProgressFn& progress) {
    internal::tune_allocator();
    const SolverConfig solver = cfg.solver();  // validates the stability bound
    if (observations.sample_count() != cfg.n_samples)
        throw std::invalid_argument("dp_train: observations carry " +
                                    std::to_string(observations.sample_count()) +
                                    " samples, config expects " + std::to_string(cfg.n_samples));
    if (observations.sensor_count() != sensors.count())
        throw std::invalid_argument("dp_train: sensor count mismatch");

    const GridSpec grid = cfg.grid();
    const InputBox box = InputBox::square(cfg.extent);
    const Tensor coords_n = normalize_coords(grid_coords(grid), box);
    const Tensor obs_flat = observations.flat_time_major();

    MlpParams params = siren_init(cfg.net_widths, cfg.omega0, cfg.net_seed);
    ParamPack pack(params);
    AdamState adam = [&] {
        std::vector<Tensor> shapes;
        for (Tensor* t : pack.ptrs) shapes.push_back(*t);
        return AdamState::create(shapes, cfg.lr);
    }();

    double lambda_data = 1.0, lambda_sp = 1.0;
    const AnnealConfig anneal_cfg{cfg.anneal.alpha, cfg.anneal.update_every,
                                  cfg.anneal.numerator, 0};

    struct Forward {
        Tape tape;
        TapedMlp net;
        NodeId p0 = -1;
        NodeId loss_data = -1;
        NodeId loss_sp = -1;
    };
    auto forward_p0 = [&](Forward& f) {
        f.net = register_params(f.tape, params);
        NodeId flat = siren_eval(f.tape, f.net, f.tape.constant(coords_n));
        f.p0 = f.tape.reshape(flat, {grid.m, grid.m});
    };
    auto forward_data = [&](Forward& f) {
        std::vector<NodeId> frames = simulate_nodes(f.tape, f.p0, solver);
        NodeId pred = measure(f.tape, frames, sensors, grid.m);
        f.loss_data = data_loss_discrete(f.tape, pred, obs_flat);
    };

    TrainResult result;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    for (int64_t iter = 0; iter < cfg.n_iters; ++iter) {
        const bool do_anneal =
            cfg.anneal.update_every > 0 && iter > 0 && iter % cfg.anneal.update_every == 0;

        double v_data = 0.0, v_sp = 0.0;
        if (!do_anneal) {
            Forward f;
            forward_p0(f);
            forward_data(f);
            f.loss_sp = sparsity_loss(f.tape, f.p0);
            NodeId total = f.tape.add(f.tape.scale(f.loss_data, lambda_data),
                                      f.tape.scale(f.loss_sp, lambda_sp));
            v_data = f.tape.value(f.loss_data).item();
            v_sp = f.tape.value(f.loss_sp).item();
            if (!std::isfinite(v_data + v_sp))
                throw std::runtime_error("dp_train: non-finite loss at iteration " +
                                         std::to_string(iter));
            GradientMap grads = f.tape.backward(total);
            auto gptrs = internal::grads_in_order(grads, f.net);
            adam_step(pack.ptrs, gptrs, adam);
        } else {
            // separate backward passes expose the per-term gradient norms
            Forward fd;
            forward_p0(fd);
            forward_data(fd);
            v_data = fd.tape.value(fd.loss_data).item();
            GradientMap gd = fd.tape.backward(fd.loss_data);
            auto gdp = internal::grads_in_order(gd, fd.net);

            Forward fs;
            forward_p0(fs);
            fs.loss_sp = sparsity_loss(fs.tape, fs.p0);
            v_sp = fs.tape.value(fs.loss_sp).item();
            GradientMap gs = fs.tape.backward(fs.loss_sp);
            auto gsp = internal::grads_in_order(gs, fs.net);

            if (!std::isfinite(v_data + v_sp))
                throw std::runtime_error("dp_train: non-finite loss at iteration " +
                                         std::to_string(iter));

            const double norms[2] = {l2_norm(gdp), l2_norm(gsp)};
            double lambdas[2] = {lambda_data, lambda_sp};
            anneal_update(norms, lambdas, anneal_cfg);
            lambda_data = lambdas[0];
            lambda_sp = lambdas[1];

            // the weighted total gradient is the matching linear combination
            std::vector<Tensor> combined =
                internal::combine_scaled(gdp, lambda_data, gsp, lambda_sp);
            std::vector<const Tensor*> cptrs;
            for (const Tensor& t : combined) cptrs.push_back(&t);
            adam_step(pack.ptrs, cptrs, adam);
        }

        if (iter % cfg.log_every == 0 || iter + 1 == cfg.n_iters) {
            LossRow row;
            row.iteration = iter;
            row.data = v_data;
            row.sp = v_sp;
            row.total = lambda_data * v_data + lambda_sp * v_sp;
            row.lambda_data = lambda_data;
            row.lambda_sp = lambda_sp;
            row.wall_seconds = elapsed();
            result.log.push_back(row);
            if (progress) progress(row);
        }
    }

    result.params = std::move(params);
    result.wall_seconds = elapsed();
    result.iterations = cfg.n_iters;
    return result;
}

FieldSequence dp_rollout(const MlpParams& params, const DpRunConfig& cfg, int64_t upsample) {
    if (upsample < 1) throw std::invalid_argument("dp_rollout: upsample must be >= 1");
    const GridSpec fine = cfg.grid().refined(upsample);
    const int64_t n_fine = (cfg.n_samples - 1) * upsample + 1;
    const SolverConfig solver = SolverConfig::checked(
        cfg.c, cfg.dt() / static_cast<double>(upsample), n_fine, fine.dr, cfg.boundary);

    const InputBox box = InputBox::square(cfg.extent);
    Tape tape;
    TapedMlp net;
    net.omega0 = params.omega0;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        net.weights.push_back(tape.constant(params.weights[l]));
        net.biases.push_back(tape.constant(params.biases[l]));
    }
    NodeId p0 = siren_eval_grid(tape, net, fine, box);

    Grid2D initial(fine.m, fine.dr, tape.value(p0));
    return simulate(initial, solver);
}

Evaluation dp_evaluate(const MlpParams& params, const DpRunConfig& cfg, int64_t upsample,
                       const FieldSequence& reference) {
    Evaluation out;
    out.field = dp_rollout(params, cfg, upsample);
    out.nmse = nmse(out.field, reference);
    return out;
}

}  // namespace wavedp
