#pragma once

// Public differentiation entry points: exact input jets of the network
// output, parameter gradients of recorded losses, and the finite-difference
// verification utility. One parameter_gradient call is exactly one reverse
// sweep, tracked by a process-wide counter for efficiency accounting.

#include <functional>
#include <vector>

#include "pinn/jet.hpp"
#include "pinn/kernels.hpp"
#include "pinn/network.hpp"
#include "pinn/tape.hpp"

namespace pinn {

// Value and mixed partial derivatives (with respect to the physical input
// coordinates) up to total order `order`.
struct DerivativeJet {
    int order = 0;
    std::array<double, jet_ncoef(kMaxJetOrder)> d{};

    double value() const { return d[0]; }
    double operator()(int ix, int iy) const {
        if (ix + iy > order) throw ConfigError("derivative order exceeds jet order");
        return d[jet_index(ix, iy)];
    }
    int ncoef() const { return jet_ncoef(order); }
};

DerivativeJet input_jet(const NetworkConfig& cfg, const ParameterVector& params, double x,
                        double y, int max_order);

// The per-step "extended computation": one forward store and one adjoint
// buffer per loss term. parameter_gradient sweeps a tape rooted at a scalar,
// scatters jet adjoints here, then runs the kernel backward per touched term.
struct StepTerms {
    std::vector<JetBatchStore> stores;
    std::vector<std::vector<double>> adjoints;

    void reset_adjoints();
};

std::vector<double> parameter_gradient(const Tape& tape, NodeId root, const NetworkConfig& cfg,
                                       const ParameterVector& params, StepTerms& terms,
                                       const ExecPolicy& exec);

long reverse_sweep_count();
void reset_reverse_sweep_count();

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double finite_difference_check(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x, double step,
                               const std::vector<double>& analytic);

}  // namespace pinn
