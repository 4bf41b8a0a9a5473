#pragma once

// Batched propagation of input jets through the network and the matching
// hand-derived reverse sweep. These are the hot loops: layer-major, OpenMP
// parallel over collocation points, deterministic reduction order.
//
// pinn/reference.hpp holds a serial per-point implementation of the same
// mathematics kept for testing and benchmarking.

#include <vector>

#include "pinn/common.hpp"
#include "pinn/jet.hpp"
#include "pinn/network.hpp"

namespace pinn {

// Forward storage for one term's batch. z/a hold pre-/post-activation jets
// per hidden layer in plane-major layout [neuron][coeff][point], with the
// point dimension padded to the SIMD tile; they are kept so the backward
// sweep needs no recomputation. `out` stays point-major [pt][coeff].
struct JetBatchStore {
    int order = 0;
    int npts = 0;
    int npts_padded = 0;
    int ncoef = 1;
    std::vector<double> in;                // [input_dim][N][padded]
    std::vector<std::vector<double>> z, a; // per hidden layer
    std::vector<double> out;               // [pt][N], Taylor coefficients of U

    double coeff(int pt, int idx) const { return out[pt * ncoef + idx]; }
    // Mixed partial of U at point pt (Taylor coefficient times ix!*iy!).
    double deriv(int pt, int ix, int iy) const;
};

void forward_jets(const NetworkConfig& cfg, const ParameterVector& params, const double* xs,
                  const double* ys, int npts, int order, JetBatchStore& store,
                  const ExecPolicy& exec);

// Accumulates the gradient of sum_pt <out_adj[pt], out_jet[pt]> with respect
// to the network parameters into grad[0..theta_count). out_adj is the adjoint
// of the output Taylor coefficients, [pt][N].
void backward_jets(const NetworkConfig& cfg, const ParameterVector& params,
                   const JetBatchStore& store, const double* out_adj, double* grad,
                   const ExecPolicy& exec);

}  // namespace pinn
