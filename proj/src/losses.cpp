#include "wavedp/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace wavedp {

NodeId data_loss_discrete(Tape& tape, NodeId pred_flat, const Tensor& obs_flat) {
    const Tensor& pred = tape.value(pred_flat);
    if (pred.size() != obs_flat.size())
        throw std::invalid_argument("data_loss_discrete: prediction " + pred.shape_str() +
                                    " vs observations " + obs_flat.shape_str());
    if (!pred.same_shape(obs_flat)) pred_flat = tape.reshape(pred_flat, obs_flat.shape());
    NodeId diff = tape.sub(pred_flat, tape.constant(obs_flat));
    return tape.scale(tape.squared_l2(diff), 1.0 / static_cast<double>(obs_flat.size()));
}

NodeId sparsity_loss(Tape& tape, NodeId values) { return tape.mean(tape.abs(values)); }

NodeId pde_residual_from_jets(Tape& tape, NodeId d2x, NodeId d2y, NodeId d2t, double c) {
    NodeId r = tape.sub(tape.add(d2x, d2y), tape.scale(d2t, 1.0 / (c * c)));
    return tape.scale(tape.squared_l2(r), 1.0 / static_cast<double>(tape.value(r).size()));
}

NodeId bc_residual_from_jets(Tape& tape, NodeId d1x, NodeId d1y, NodeId d1t,
                             const Tensor& normals, double c) {
    const int64_t B = normals.rows();
    Tensor nx({B, 1}), ny({B, 1});
    for (int64_t i = 0; i < B; ++i) {
        const double a = normals.at(i, 0), b = normals.at(i, 1);
        if (std::abs(a * a + b * b - 1.0) > 1e-9)
            throw std::invalid_argument("bc_residual: non-unit normal at row " +
                                        std::to_string(i));
        nx[i] = a;
        ny[i] = b;
    }
    NodeId grad_n = tape.add(tape.mul(d1x, tape.constant(std::move(nx))),
                             tape.mul(d1y, tape.constant(std::move(ny))));
    NodeId r = tape.add(grad_n, tape.scale(d1t, 1.0 / c));
    return tape.scale(tape.squared_l2(r), 1.0 / static_cast<double>(B));
}

NodeId pde_residual_loss(Tape& tape, const TapedMlp& net, const Tensor& coords, double c,
                         const InputBox& box) {
    JetNodes jx = siren_jet2_eval(tape, net, coords, 0, box);
    JetNodes jy = siren_jet2_eval(tape, net, coords, 1, box);
    JetNodes jt = siren_jet2_eval(tape, net, coords, 2, box);
    return pde_residual_from_jets(tape, jx.d2, jy.d2, jt.d2, c);
}

NodeId bc_residual_loss(Tape& tape, const TapedMlp& net, const Tensor& coords,
                        const Tensor& normals, double c, const InputBox& box) {
    if (normals.rows() != coords.rows())
        throw std::invalid_argument("bc_residual_loss: normals " + normals.shape_str() +
                                    " vs coords " + coords.shape_str());
    JetNodes jx = siren_jet2_eval(tape, net, coords, 0, box);
    JetNodes jy = siren_jet2_eval(tape, net, coords, 1, box);
    JetNodes jt = siren_jet2_eval(tape, net, coords, 2, box);
    return bc_residual_from_jets(tape, jx.d1, jy.d1, jt.d1, normals, c);
}

NodeId sparsity_loss_pinn(Tape& tape, const TapedMlp& net, const Tensor& coords,
                          const InputBox& box) {
    return sparsity_loss(tape, siren_eval_at(tape, net, coords, box));
}

double nmse(const Tensor& model, const Tensor& reference) {
    if (!model.same_shape(reference))
        throw std::invalid_argument("nmse: shape mismatch " + model.shape_str() + " vs " +
                                    reference.shape_str());
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i < model.size(); ++i) {
        const double d = model[i] - reference[i];
        num += d * d;
        den += reference[i] * reference[i];
    }
    if (den == 0.0) throw std::invalid_argument("nmse: reference field has zero energy");
    return num / den;
}

double nmse(const FieldSequence& model, const FieldSequence& reference) {
    if (model.frames.size() != reference.frames.size() || model.m != reference.m)
        throw std::invalid_argument("nmse: sequence shape mismatch");
    double num = 0.0, den = 0.0;
    for (size_t n = 0; n < model.frames.size(); ++n) {
        const Tensor& a = model.frames[n];
        const Tensor& b = reference.frames[n];
        for (int64_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            num += d * d;
            den += b[i] * b[i];
        }
    }
    if (den == 0.0) throw std::invalid_argument("nmse: reference field has zero energy");
    return num / den;
}

}  // namespace wavedp
