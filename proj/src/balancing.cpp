#include "pinn/balancing.hpp"

#include <algorithm>
#include <cmath>

namespace pinn {

const char* balancer_name(BalancerId id) {
    switch (id) {
        case BalancerId::Manual: return "manual";
        case BalancerId::GradNorm: return "gradnorm";
        case BalancerId::LrAnnealing: return "lr_annealing";
        case BalancerId::SoftAdapt: return "softadapt";
        case BalancerId::Relobralo: return "relobralo";
    }
    return "?";
}

BalancerId balancer_from_name(const std::string& s) {
    if (s == "manual") return BalancerId::Manual;
    if (s == "gradnorm") return BalancerId::GradNorm;
    if (s == "lr_annealing") return BalancerId::LrAnnealing;
    if (s == "softadapt") return BalancerId::SoftAdapt;
    if (s == "relobralo") return BalancerId::Relobralo;
    throw ConfigError("unknown balancer: " + s);
}

BalancerState BalancerState::init(const BalancerConfig& cfg, int num_terms, std::uint64_t seed) {
    BalancerState st;
    st.cfg = cfg;
    st.num_terms = num_terms;
    st.lambdas.assign(num_terms, 1.0);
    if (cfg.id == BalancerId::Manual && !cfg.manual_lambdas.empty()) {
        if (static_cast<int>(cfg.manual_lambdas.size()) != num_terms)
            throw ConfigError("manual lambdas size does not match term count");
        st.lambdas = cfg.manual_lambdas;
    }
    st.rho_rng.seed(seed);
    st.gn_m.assign(num_terms, 0.0);
    st.gn_v.assign(num_terms, 0.0);
    return st;
}

void BalancerState::observe_initial(const LossVector& first) {
    initial_losses = first.values;
    previous_losses = first.values;
    step = 1;
}

NodeId scalarise(Tape& tape, const std::vector<NodeId>& term_losses,
                 const std::vector<double>& lambdas) {
    if (term_losses.size() != lambdas.size())
        throw ConfigError("scalarise: term/lambda length mismatch");
    return tape.weighted_sum(term_losses, lambdas);
}

namespace {

// softmax of `args` with max-subtraction, scaled so the entries sum to `total`.
std::vector<double> scaled_softmax(const std::vector<double>& args, double total) {
    const double mx = *std::max_element(args.begin(), args.end());
    std::vector<double> out(args.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        out[i] = std::exp(args[i] - mx);
        denom += out[i];
    }
    for (auto& v : out) v *= total / denom;
    return out;
}

}  // namespace

std::vector<double> relative_softmax(const LossVector& current, const LossVector& reference,
                                     double temperature, int m) {
    if (current.size() != reference.size())
        throw ConfigError("relative_softmax: length mismatch");
    if (temperature <= 0.0) throw ConfigError("relative_softmax: temperature must be > 0");
    std::vector<double> args(current.size());
    for (int i = 0; i < current.size(); ++i)
        args[i] = current.values[i] /
                  (temperature * std::max(reference.values[i], kEpsGuard));
    return scaled_softmax(args, static_cast<double>(m));
}

std::vector<double> relobralo_update(BalancerState& state, const LossVector& current) {
    const int m = state.num_terms;
    const auto& cfg = state.cfg;
    LossVector init{current.labels, state.initial_losses};
    LossVector prev{current.labels, state.previous_losses};
    const auto hat_hist = relative_softmax(current, init, cfg.temperature, m);
    const auto hat_prev = relative_softmax(current, prev, cfg.temperature, m);
    // One Bernoulli draw per step, shared by every term.
    const double rho = std::bernoulli_distribution(cfg.expected_rho)(state.rho_rng) ? 1.0 : 0.0;
    for (int i = 0; i < m; ++i) {
        state.lambdas[i] = cfg.alpha * (rho * state.lambdas[i] + (1.0 - rho) * hat_hist[i]) +
                           (1.0 - cfg.alpha) * hat_prev[i];
    }
    state.previous_losses = current.values;
    ++state.step;
    return state.lambdas;
}

std::vector<double> softadapt_update(BalancerState& state, const LossVector& current) {
    std::vector<double> args(current.size());
    for (int i = 0; i < current.size(); ++i)
        args[i] = current.values[i] / std::max(state.previous_losses[i], kEpsGuard);
    state.lambdas = scaled_softmax(args, 1.0);
    state.previous_losses = current.values;
    ++state.step;
    return state.lambdas;
}

std::vector<double> lr_annealing_update(BalancerState& state,
                                        const std::vector<std::vector<double>>& term_grads,
                                        int theta_count) {
    const int k = state.num_terms;
    if (static_cast<int>(term_grads.size()) != k)
        throw ConfigError("lr_annealing_update: gradient count mismatch");
    double max_pde = 0.0;
    for (int j = 0; j < theta_count; ++j) max_pde = std::max(max_pde, std::abs(term_grads[0][j]));
    const double a = state.cfg.lr_annealing_alpha;
    // The PDE term keeps a fixed scaling of 1; the others track
    // max|grad_pde| / mean|grad_i| through an EMA.
    state.lambdas[0] = 1.0;
    for (int i = 1; i < k; ++i) {
        double mean_abs = 0.0;
        for (int j = 0; j < theta_count; ++j) mean_abs += std::abs(term_grads[i][j]);
        mean_abs /= theta_count;
        double hat;
        if (mean_abs <= kEpsGuard) {
            hat = kLrAnnealingLambdaMax;  // stalled term
        } else {
            hat = std::min(max_pde / mean_abs, kLrAnnealingLambdaMax);
        }
        state.lambdas[i] = a * state.lambdas[i] + (1.0 - a) * hat;
    }
    ++state.step;
    return state.lambdas;
}

namespace {

// Per-term targets Gbar * r_i^alpha of Eq.-8-style balancing.
std::vector<double> gradnorm_targets(const BalancerState& state, const LossVector& losses,
                                     const std::vector<double>& grad_norms) {
    const int k = state.num_terms;
    std::vector<double> rel(k);
    double mean_rel = 0.0;
    for (int i = 0; i < k; ++i) {
        rel[i] = losses.values[i] / std::max(state.initial_losses[i], kEpsGuard);
        mean_rel += rel[i];
    }
    mean_rel /= k;
    double gbar = 0.0;
    for (double g : grad_norms) gbar += g;
    gbar /= k;
    std::vector<double> targets(k);
    for (int i = 0; i < k; ++i) {
        const double r = rel[i] / std::max(mean_rel, kEpsGuard);
        targets[i] = gbar * std::pow(std::max(r, kEpsGuard), state.cfg.gradnorm_alpha);
    }
    return targets;
}

}  // namespace

double gradnorm_lambda_loss(const BalancerState& state, const LossVector& losses,
                            const std::vector<double>& grad_norms) {
    const auto targets = gradnorm_targets(state, losses, grad_norms);
    double acc = 0.0;
    for (int i = 0; i < state.num_terms; ++i) acc += std::abs(grad_norms[i] - targets[i]);
    return acc;
}

std::vector<double> gradnorm_update(BalancerState& state, const LossVector& losses,
                                    const std::vector<double>& grad_norms) {
    const int k = state.num_terms;
    if (static_cast<int>(grad_norms.size()) != k)
        throw ConfigError("gradnorm_update: norm count mismatch");
    const auto targets = gradnorm_targets(state, losses, grad_norms);

    // d/d lambda_i of sum |G_i - target_i|; the target is a constant and
    // G_i = lambda_i * ||g_i||, so dG_i/dlambda_i = G_i / lambda_i.
    std::vector<double> dl(k);
    for (int i = 0; i < k; ++i) {
        const double diff = grad_norms[i] - targets[i];
        const double dG = grad_norms[i] / std::max(state.lambdas[i], kEpsGuard);
        dl[i] = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) * dG;
    }
    // Adam step on lambda with its own learning rate.
    ++state.gn_t;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.gn_t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.gn_t));
    for (int i = 0; i < k; ++i) {
        state.gn_m[i] = b1 * state.gn_m[i] + (1.0 - b1) * dl[i];
        state.gn_v[i] = b2 * state.gn_v[i] + (1.0 - b2) * dl[i] * dl[i];
        const double mh = state.gn_m[i] / bc1;
        const double vh = state.gn_v[i] / bc2;
        state.lambdas[i] -= state.cfg.gradnorm_lr * mh / (std::sqrt(vh) + eps);
        if (state.lambdas[i] <= 0.0) state.lambdas[i] = kEpsGuard;
    }
    // Renormalize so the scalings sum to the term count.
    double sum = 0.0;
    for (double l : state.lambdas) sum += l;
    for (auto& l : state.lambdas) l *= k / sum;
    ++state.step;
    return state.lambdas;
}

bool pareto_dominates(const LossVector& a, const LossVector& b) {
    if (a.size() != b.size()) throw ConfigError("pareto_dominates: length mismatch");
    bool strict = false;
    for (int i = 0; i < a.size(); ++i) {
        if (a.values[i] > b.values[i]) return false;
        if (a.values[i] < b.values[i]) strict = true;
    }
    return strict;
}

}  // namespace pinn
