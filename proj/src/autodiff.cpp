#include "pinn/autodiff.hpp"

#include <atomic>
#include <cmath>

#include "pinn/reference.hpp"

namespace pinn {

namespace {
std::atomic<long> g_sweeps{0};

template <int P>
DerivativeJet to_deriv_jet(const Jet<P>& j) {
    DerivativeJet out;
    out.order = P;
    for (int i = 0; i < jet_ncoef(P); ++i) out.d[i] = j.c[i] * kDerivScale<P>[i];
    return out;
}
}  // namespace

DerivativeJet input_jet(const NetworkConfig& cfg, const ParameterVector& params, double x,
                        double y, int max_order) {
    if (max_order < 1 || max_order > kMaxJetOrder)
        throw ConfigError("input_jet: max_order must be in 1..4");
    if (cfg.activation != Activation::Tanh && cfg.activation != Activation::Sigmoid)
        throw ConfigError("input_jet: unsupported activation for requested order");
    for (double w : params.v)
        if (!std::isfinite(w)) throw NumericError("input_jet: non-finite parameter");
    DerivativeJet out;
    switch (max_order) {
        case 1: out = to_deriv_jet(ref::forward_jet<1>(cfg, params, x, y)); break;
        case 2: out = to_deriv_jet(ref::forward_jet<2>(cfg, params, x, y)); break;
        case 3: out = to_deriv_jet(ref::forward_jet<3>(cfg, params, x, y)); break;
        case 4: out = to_deriv_jet(ref::forward_jet<4>(cfg, params, x, y)); break;
    }
    for (int i = 0; i < out.ncoef(); ++i)
        if (!std::isfinite(out.d[i])) throw NumericError("input_jet: non-finite derivative");
    return out;
}

void StepTerms::reset_adjoints() {
    for (std::size_t t = 0; t < stores.size(); ++t) {
        adjoints[t].assign(static_cast<std::size_t>(stores[t].npts) * stores[t].ncoef, 0.0);
    }
}

std::vector<double> parameter_gradient(const Tape& tape, NodeId root, const NetworkConfig& cfg,
                                       const ParameterVector& params, StepTerms& terms,
                                       const ExecPolicy& exec) {
    if (!std::isfinite(tape.value(root)))
        throw NumericError("parameter_gradient: loss is not finite");
    ++g_sweeps;
    terms.reset_adjoints();
    std::vector<Tape::JetAdjointSink> sinks(terms.stores.size());
    for (std::size_t t = 0; t < terms.stores.size(); ++t)
        sinks[t] = {terms.adjoints[t].data(), terms.stores[t].ncoef};
    const auto swept = tape.reverse(root, sinks);

    std::vector<double> grad(params.layout.total(), 0.0);
    for (std::size_t t = 0; t < terms.stores.size(); ++t) {
        if (!swept.term_touched[t]) continue;
        backward_jets(cfg, params, terms.stores[t], terms.adjoints[t].data(), grad.data(), exec);
    }
    if (params.has_mu()) grad[params.layout.mu_index] = swept.mu_adjoint;
    return grad;
}

long reverse_sweep_count() { return g_sweeps.load(); }
void reset_reverse_sweep_count() { g_sweeps.store(0); }

double finite_difference_check(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x, double step,
                               const std::vector<double>& analytic) {
    if (step <= 0.0) throw ConfigError("finite_difference_check: step must be positive");
    std::vector<double> xp = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + step;
        const double fp = f(xp);
        xp[i] = x[i] - step;
        const double fm = f(xp);
        xp[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("finite_difference_check: non-finite evaluation");
        const double numeric = (fp - fm) / (2.0 * step);
        const double dev =
            std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, dev);
    }
    return worst;
}

}  // namespace pinn
