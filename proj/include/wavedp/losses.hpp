#pragma once

#include <span>

#include "wavedp/fdtd.hpp"
#include "wavedp/siren.hpp"
#include "wavedp/tape.hpp"

namespace wavedp {

/// Mean squared misfit over all sensor/time samples, 1/(M_ob*N) * sum (pred-obs)^2.
NodeId data_loss_discrete(Tape& tape, NodeId pred_flat, const Tensor& obs_flat);

/// Mean absolute pressure over the collocation values.
NodeId sparsity_loss(Tape& tape, NodeId values);

/// Residual combiners, exposed so analytic jet triples can be fed in tests.
NodeId pde_residual_from_jets(Tape& tape, NodeId d2x, NodeId d2y, NodeId d2t, double c);
NodeId bc_residual_from_jets(Tape& tape, NodeId d1x, NodeId d1y, NodeId d1t,
                             const Tensor& normals, double c);

/// Mean squared wave-operator residual at space-time collocation points (B,3).
NodeId pde_residual_loss(Tape& tape, const TapedMlp& net, const Tensor& coords, double c,
                         const InputBox& box);

/// Mean squared outgoing-radiation residual at boundary points with outward
/// unit normals (B,2); throws if a normal is not unit length.
NodeId bc_residual_loss(Tape& tape, const TapedMlp& net, const Tensor& coords,
                        const Tensor& normals, double c, const InputBox& box);

/// Mean |p| over an early-time space-time slab.
NodeId sparsity_loss_pinn(Tape& tape, const TapedMlp& net, const Tensor& coords,
                          const InputBox& box);

/// Squared error normalized by reference energy.
double nmse(const Tensor& model, const Tensor& reference);
double nmse(const FieldSequence& model, const FieldSequence& reference);

}  // namespace wavedp
