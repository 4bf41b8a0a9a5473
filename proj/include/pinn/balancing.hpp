#pragma once

// Per-term loss scalings: Manual, Learning Rate Annealing, GradNorm,
// SoftAdapt and ReLoBRaLo, plus linear scalarisation and a Pareto-dominance
// diagnostic. All loss/gradient-norm denominators are guarded with
// kEpsGuard; softmaxes subtract the max argument before exponentiation.

#include <random>
#include <string>
#include <vector>

#include "pinn/common.hpp"
#include "pinn/tape.hpp"

namespace pinn {

inline constexpr double kEpsGuard = 1e-12;
inline constexpr double kLrAnnealingLambdaMax = 1e6;

struct LossVector {
    std::vector<std::string> labels;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
};

enum class BalancerId { Manual, GradNorm, LrAnnealing, SoftAdapt, Relobralo };

const char* balancer_name(BalancerId id);
BalancerId balancer_from_name(const std::string& s);

struct BalancerConfig {
    BalancerId id = BalancerId::Manual;
    double alpha = 0.999;           // EMA decay (ReLoBRaLo); LR annealing uses 0.9
    double temperature = 0.1;       // T
    double expected_rho = 0.9999;   // E[rho]
    double lr_annealing_alpha = 0.9;
    double gradnorm_alpha = 1.5;    // restoring strength
    double gradnorm_lr = 1e-2;      // step size of the lambda optimizer
    std::vector<double> manual_lambdas;  // empty = all ones
};

struct BalancerState {
    BalancerConfig cfg;
    int num_terms = 0;
    long step = 0;
    std::vector<double> lambdas;          // always > 0, initialized to 1
    std::vector<double> initial_losses;   // L(0), fixed after the first step
    std::vector<double> previous_losses;  // L(t-1)
    std::mt19937_64 rho_rng;
    // GradNorm's first-order optimizer state for lambda.
    std::vector<double> gn_m, gn_v;
    long gn_t = 0;

    static BalancerState init(const BalancerConfig& cfg, int num_terms, std::uint64_t seed);
    // Records L(0) (and L(t-1)) from the first evaluated batch; lambdas stay 1.
    void observe_initial(const LossVector& first);
    bool needs_term_gradients() const {
        return cfg.id == BalancerId::GradNorm || cfg.id == BalancerId::LrAnnealing;
    }
};

// Appends sum_i lambda_i * L_i to the tape; the lambdas enter as constants so
// no gradient flows into them.
NodeId scalarise(Tape& tape, const std::vector<NodeId>& term_losses,
                 const std::vector<double>& lambdas);

// lambda_hat_i = m * softmax_i(L_i(t) / (T * L_i(t'))). Sum is m, entries in (0, m).
std::vector<double> relative_softmax(const LossVector& current, const LossVector& reference,
                                     double temperature, int m);

std::vector<double> relobralo_update(BalancerState& state, const LossVector& current);
std::vector<double> softadapt_update(BalancerState& state, const LossVector& current);

// grads are full parameter gradients per term (term 0 = PDE residual);
// statistics use the first theta_count entries only.
std::vector<double> lr_annealing_update(BalancerState& state,
                                        const std::vector<std::vector<double>>& term_grads,
                                        int theta_count);

// grad_norms[i] = || grad_theta (lambda_i L_i) ||_2 at the current lambdas.
std::vector<double> gradnorm_update(BalancerState& state, const LossVector& losses,
                                    const std::vector<double>& grad_norms);

// The objective the lambda step descends: sum_i |G_i - Gbar * r_i^alpha|,
// with the targets treated as constants. Zero exactly when every norm sits
// on its target.
double gradnorm_lambda_loss(const BalancerState& state, const LossVector& losses,
                            const std::vector<double>& grad_norms);

bool pareto_dominates(const LossVector& a, const LossVector& b);

}  // namespace pinn
