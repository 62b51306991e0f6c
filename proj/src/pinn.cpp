#include "wavedp/pinn.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "train_util.hpp"
#include "wavedp/losses.hpp"

namespace wavedp {

namespace {

Tensor sensor_spacetime_coords(const SensorSet& sensors, const GridSpec& grid, int64_t n_samples,
                               double dt) {
    const int64_t M = sensors.count();
    Tensor coords({n_samples * M, 3});
    for (int64_t n = 0; n < n_samples; ++n)
        for (int64_t s = 0; s < M; ++s) {
            const auto& ij = sensors.indices[static_cast<size_t>(s)];
            const int64_t row = n * M + s;  // matches Measurements::flat_time_major
            coords[row * 3 + 0] = grid.x(ij[1]);
            coords[row * 3 + 1] = grid.y(ij[0]);
            coords[row * 3 + 2] = static_cast<double>(n) * dt;
        }
    return coords;
}

struct TermValues {
    double data = 0, sp = 0, pde = 0, bcs = 0;
};

}  // namespace

TrainResult pinn_train(const PinnRunConfig& cfg, const Measurements& observations,
                       const SensorSet& sensors, const GridSpec& grid,
                       const ProgressFn& progress) {
    internal::tune_allocator();
    if (observations.sensor_count() != sensors.count())
        throw std::invalid_argument("pinn_train: sensor count mismatch");

    const InputBox box = InputBox::cube(cfg.extent, cfg.duration);
    const int64_t n_samples = observations.sample_count();
    const double dt = cfg.duration / static_cast<double>(n_samples - 1);
    const Tensor data_coords = sensor_spacetime_coords(sensors, grid, n_samples, dt);
    const Tensor data_coords_n = normalize_coords(data_coords, box);
    const Tensor obs_flat = observations.flat_time_major();

    MlpParams params = siren_init(cfg.net_widths, cfg.omega0, cfg.net_seed);
    std::vector<Tensor*> param_ptrs;
    for (Tensor& w : params.weights) param_ptrs.push_back(&w);
    for (Tensor& b : params.biases) param_ptrs.push_back(&b);
    AdamState adam = [&] {
        std::vector<Tensor> shapes;
        for (Tensor* t : param_ptrs) shapes.push_back(*t);
        return AdamState::create(shapes, cfg.lr);
    }();

    SobolSequence pde_stream(3), bc_stream(3), sp_stream(3);
    const double lo[3] = {0.0, 0.0, 0.0};
    const double hi_full[3] = {cfg.extent, cfg.extent, cfg.duration};
    const double hi_early[3] = {cfg.extent, cfg.extent, cfg.early_fraction * cfg.duration};

    // term order: data, sp, pde (reference), bcs
    double lambdas[4] = {cfg.lambda_data0, cfg.lambda_sp0, cfg.lambda_pde0, cfg.lambda_bcs0};
    const AnnealConfig anneal_cfg{cfg.anneal.alpha, cfg.anneal.update_every,
                                  cfg.anneal.numerator, 2};

    TrainResult result;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    for (int64_t iter = 0; iter < cfg.n_iters; ++iter) {
        const Tensor pde_batch = pde_stream.next_batch(cfg.pde_points, lo, hi_full);
        const BoundaryBatch bc_batch =
            boundary_collocation(cfg.bcs_points, cfg.extent, cfg.duration, bc_stream);
        const Tensor sp_batch = sp_stream.next_batch(cfg.sp_points, lo, hi_early);

        const bool do_anneal =
            cfg.anneal.update_every > 0 && iter > 0 && iter % cfg.anneal.update_every == 0;

        TermValues v;
        if (!do_anneal) {
            Tape tape;
            TapedMlp net = register_params(tape, params);
            NodeId l_data =
                data_loss_discrete(tape, siren_eval(tape, net, tape.constant(data_coords_n)),
                                   obs_flat);
            NodeId l_sp = sparsity_loss_pinn(tape, net, sp_batch, box);
            NodeId l_pde = pde_residual_loss(tape, net, pde_batch, cfg.c, box);
            NodeId l_bcs =
                bc_residual_loss(tape, net, bc_batch.coords, bc_batch.normals, cfg.c, box);

            v = {tape.value(l_data).item(), tape.value(l_sp).item(), tape.value(l_pde).item(),
                 tape.value(l_bcs).item()};
            if (!std::isfinite(v.data + v.sp + v.pde + v.bcs))
                throw std::runtime_error("pinn_train: non-finite loss at iteration " +
                                         std::to_string(iter));

            NodeId total = tape.add(
                tape.add(tape.scale(l_data, lambdas[0]), tape.scale(l_sp, lambdas[1])),
                tape.add(tape.scale(l_pde, lambdas[2]), tape.scale(l_bcs, lambdas[3])));
            GradientMap grads = tape.backward(total);
            auto gptrs = internal::grads_in_order(grads, net);
            adam_step(param_ptrs, gptrs, adam);
        } else {
            // per-term passes over the same batches expose the gradient norms
            std::vector<std::vector<const Tensor*>> term_grads;
            std::vector<GradientMap> maps;
            std::vector<TapedMlp> nets;
            std::vector<Tape> tapes(4);
            for (int term = 0; term < 4; ++term) {
                Tape& tape = tapes[static_cast<size_t>(term)];
                nets.push_back(register_params(tape, params));
                const TapedMlp& net = nets.back();
                NodeId loss = -1;
                switch (term) {
                    case 0:
                        loss = data_loss_discrete(
                            tape, siren_eval(tape, net, tape.constant(data_coords_n)), obs_flat);
                        v.data = tape.value(loss).item();
                        break;
                    case 1:
                        loss = sparsity_loss_pinn(tape, net, sp_batch, box);
                        v.sp = tape.value(loss).item();
                        break;
                    case 2:
                        loss = pde_residual_loss(tape, net, pde_batch, cfg.c, box);
                        v.pde = tape.value(loss).item();
                        break;
                    default:
                        loss = bc_residual_loss(tape, net, bc_batch.coords, bc_batch.normals,
                                                cfg.c, box);
                        v.bcs = tape.value(loss).item();
                        break;
                }
                maps.push_back(tape.backward(loss));
            }
            for (int term = 0; term < 4; ++term)
                term_grads.push_back(internal::grads_in_order(maps[static_cast<size_t>(term)],
                                                              nets[static_cast<size_t>(term)]));
            if (!std::isfinite(v.data + v.sp + v.pde + v.bcs))
                throw std::runtime_error("pinn_train: non-finite loss at iteration " +
                                         std::to_string(iter));

            const double norms[4] = {l2_norm(term_grads[0]), l2_norm(term_grads[1]),
                                     l2_norm(term_grads[2]), l2_norm(term_grads[3])};
            anneal_update(norms, lambdas, anneal_cfg);

            std::vector<Tensor> combined;
            for (size_t k = 0; k < param_ptrs.size(); ++k) {
                Tensor t(param_ptrs[k]->shape());
                for (int64_t i = 0; i < t.size(); ++i)
                    t[i] = lambdas[0] * (*term_grads[0][k])[i] +
                           lambdas[1] * (*term_grads[1][k])[i] +
                           lambdas[2] * (*term_grads[2][k])[i] +
                           lambdas[3] * (*term_grads[3][k])[i];
                combined.push_back(std::move(t));
            }
            std::vector<const Tensor*> cptrs;
            for (const Tensor& t : combined) cptrs.push_back(&t);
            adam_step(param_ptrs, cptrs, adam);
        }

        if (iter % cfg.log_every == 0 || iter + 1 == cfg.n_iters) {
            LossRow row;
            row.iteration = iter;
            row.data = v.data;
            row.sp = v.sp;
            row.pde = v.pde;
            row.bcs = v.bcs;
            row.total = lambdas[0] * v.data + lambdas[1] * v.sp + lambdas[2] * v.pde +
                        lambdas[3] * v.bcs;
            row.lambda_data = lambdas[0];
            row.lambda_sp = lambdas[1];
            row.lambda_pde = lambdas[2];
            row.lambda_bcs = lambdas[3];
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

FieldSequence pinn_field(const MlpParams& params, const PinnRunConfig& cfg, const GridSpec& grid,
                         int64_t n_frames, double dt) {
    const InputBox box = InputBox::cube(cfg.extent, cfg.duration);
    FieldSequence seq;
    seq.m = grid.m;
    seq.dr = grid.dr;
    seq.dt = dt;

    Tensor coords({grid.m * grid.m, 3});
    for (int64_t n = 0; n < n_frames; ++n) {
        const double t = static_cast<double>(n) * dt;
        for (int64_t i = 0; i < grid.m; ++i)
            for (int64_t j = 0; j < grid.m; ++j) {
                const int64_t row = i * grid.m + j;
                coords[row * 3 + 0] = grid.x(j);
                coords[row * 3 + 1] = grid.y(i);
                coords[row * 3 + 2] = t;
            }
        Tensor flat = siren_forward(params, coords, box);
        Tensor frame({grid.m, grid.m});
        for (int64_t i = 0; i < frame.size(); ++i) frame[i] = flat[i];
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

Evaluation pinn_evaluate(const MlpParams& params, const PinnRunConfig& cfg,
                         const FieldSequence& reference) {
    GridSpec grid{reference.m, reference.dr};
    Evaluation out;
    out.field = pinn_field(params, cfg, grid, static_cast<int64_t>(reference.frames.size()),
                           reference.dt);
    out.nmse = nmse(out.field, reference);
    return out;
}

double pinn_pde_residual(const MlpParams& params, const PinnRunConfig& cfg,
                         const Tensor& coords) {
    const InputBox box = InputBox::cube(cfg.extent, cfg.duration);
    Tape tape;
    TapedMlp net;
    net.omega0 = params.omega0;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        net.weights.push_back(tape.constant(params.weights[l]));
        net.biases.push_back(tape.constant(params.biases[l]));
    }
    return tape.value(pde_residual_loss(tape, net, coords, cfg.c, box)).item();
}

}  // namespace wavedp
