#pragma once

// Serial per-point reference for the batched kernels: straightforward
// value-semantics jet arithmetic, one point at a time. The training engine
// never calls this; tests and the benchmark compare it against the kernels.

#include <vector>

#include "pinn/activation.hpp"
#include "pinn/jet.hpp"
#include "pinn/network.hpp"

namespace pinn::ref {

template <int P>
Jet<P> compose_activation(Activation act, const Jet<P>& w) {
    double raw[P + 1], fz[P + 1];
    activation_derivs(act, w.c[0], P, raw);
    double fact = 1.0;
    for (int n = 0; n <= P; ++n) {
        if (n > 1) fact *= n;
        fz[n] = raw[n] / fact;
    }
    Jet<P> out;
    jet_compose<P>(fz, w.c.data(), out.c.data());
    return out;
}

template <int P>
Jet<P> forward_jet(const NetworkConfig& cfg, const ParameterVector& params, double x, double y) {
    std::vector<Jet<P>> a(cfg.input_dim);
    a[0] = Jet<P>::variable(cfg.input_map[0](x), 0, cfg.input_map[0].scale);
    if (cfg.input_dim > 1) a[1] = Jet<P>::variable(cfg.input_map[1](y), 1, cfg.input_map[1].scale);
    const int L = static_cast<int>(params.layout.layers.size());
    for (int l = 0; l < L; ++l) {
        const auto& lay = params.layout.layers[l];
        const double* W = params.weights(l);
        const double* b = params.biases(l);
        std::vector<Jet<P>> z(lay.out);
        for (int k = 0; k < lay.out; ++k) {
            Jet<P> acc = Jet<P>::constant(b[k]);
            for (int m = 0; m < lay.in; ++m) acc += a[m] * W[k * lay.in + m];
            z[k] = acc;
        }
        if (l + 1 < L)
            for (auto& zk : z) zk = compose_activation<P>(cfg.activation, zk);
        a = std::move(z);
    }
    return a[0];
}

}  // namespace pinn::ref
