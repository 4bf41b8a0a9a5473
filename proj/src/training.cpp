#include "pinn/training.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <mutex>

#include "pinn/autodiff.hpp"

namespace pinn {

void adam_step(AdamState& st, double* params, const double* grad, std::size_t n, double lr,
               long step_index) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(grad[i]))
            throw NumericError("adam_step: non-finite gradient", step_index);
    ++st.t;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < n; ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grad[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        params[i] -= lr * mh / (std::sqrt(vh) + st.eps);
    }
}

const std::vector<double>& reference_grid(const ProblemSpec& spec) {
    static std::map<ProblemId, std::vector<double>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(spec.id);
    if (it == cache.end()) {
        const int n = kValidationGrid;
        std::vector<double> grid(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            const double x = spec.lo[0] + (spec.hi[0] - spec.lo[0]) * i / (n - 1.0);
            for (int j = 0; j < n; ++j) {
                const double y = spec.lo[1] + (spec.hi[1] - spec.lo[1]) * j / (n - 1.0);
                grid[static_cast<std::size_t>(i) * n + j] = spec.reference(x, y);
            }
        }
        it = cache.emplace(spec.id, std::move(grid)).first;
    }
    return it->second;
}

Validation validate(const NetworkConfig& cfg, const ParameterVector& params,
                    const ProblemSpec& spec) {
    const int n = kValidationGrid;
    const auto& ref = reference_grid(spec);
    // Chunked order-0 kernel evaluation keeps the forward stores small.
    const int chunk = 4096;
    std::vector<double> xs(chunk), ys(chunk);
    JetBatchStore store;
    double se = 0.0, max_diff = 0.0, max_ref = 0.0;
    int filled = 0;
    std::vector<std::pair<int, int>> idx(chunk);
    auto flush = [&]() {
        if (filled == 0) return;
        forward_jets(cfg, params, xs.data(), ys.data(), filled, 0, store, {});
        for (int p = 0; p < filled; ++p) {
            const double r = ref[static_cast<std::size_t>(idx[p].first) * n + idx[p].second];
            const double d = store.out[p] - r;
            se += d * d;
            max_diff = std::max(max_diff, std::abs(d));
            max_ref = std::max(max_ref, std::abs(r));
        }
        filled = 0;
    };
    for (int i = 0; i < n; ++i) {
        const double x = spec.lo[0] + (spec.hi[0] - spec.lo[0]) * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            xs[filled] = x;
            ys[filled] = spec.lo[1] + (spec.hi[1] - spec.lo[1]) * j / (n - 1.0);
            idx[filled] = {i, j};
            if (++filled == chunk) flush();
        }
    }
    flush();
    const double cells = static_cast<double>(n) * n;
    return {se / cells, max_diff / max_ref};
}

RunRecord train(const ProblemSpec& spec, const TrainConfig& cfg) {
    cfg.validate();
    const int k = static_cast<int>(spec.terms.size());

    NetworkConfig net = cfg.net;
    net.input_map = spec.input_map;
    ParameterVector params = init_xavier(net, cfg.seed, spec.mu_trainable, spec.mu_init);
    const int theta = params.layout.theta_count;
    const int total = params.layout.total();

    std::mt19937_64 sample_rng(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
    BalancerState bal = BalancerState::init(cfg.balancer, k, cfg.seed * 0xD1B54A32D192ED03ull + 2);

    const bool separate_mu =
        cfg.separate_mu_optimizer >= 0
            ? cfg.separate_mu_optimizer != 0
            : (spec.id == ProblemId::Kirchhoff && spec.mode == Mode::Inverse);
    AdamState adam(separate_mu ? theta : total);
    AdamState adam_mu(spec.mu_trainable && separate_mu ? 1 : 0);

    ProgressTracker tracker;
    PlateauScheduler plateau{cfg.plateau_patience, cfg.plateau_factor};
    EarlyStopper early{cfg.early_stop_patience};

    RunRecord rec;
    rec.term_labels = spec.term_labels();
    rec.seed = cfg.seed;
    rec.stop_reason = "budget";

    StepComputation comp;
    CollocationBatch batch;
    std::vector<std::vector<double>> term_grads;
    std::vector<double> grad;
    long sweeps = 0;

    const auto run_start = std::chrono::steady_clock::now();
    long step = 0;
    for (; step < cfg.max_steps; ++step) {
        const auto step_start = std::chrono::steady_clock::now();
        double scal_value = 0.0, lr_now = cfg.initial_lr * plateau.scale;
        try {
            if (step == 0 || (cfg.resample_every > 0 && step % cfg.resample_every == 0))
                batch = sample_collocation(spec, cfg.batch, sample_rng);
            compute_term_losses(spec, net, params, batch, cfg.exec, comp, step);

            if (step == 0) bal.observe_initial(comp.losses);

            if (bal.needs_term_gradients()) {
                term_grads.assign(k, {});
                std::vector<double> norms(k, 0.0);
                for (int ti = 0; ti < k; ++ti) {
                    term_grads[ti] = parameter_gradient(comp.tape, comp.term_loss_nodes[ti], net,
                                                        params, comp.terms, cfg.exec);
                    ++sweeps;
                }
                if (step > 0) {
                    if (cfg.balancer.id == BalancerId::LrAnnealing) {
                        lr_annealing_update(bal, term_grads, theta);
                    } else {
                        for (int ti = 0; ti < k; ++ti) {
                            double sq = 0.0;
                            for (int j = 0; j < theta; ++j)
                                sq += term_grads[ti][j] * term_grads[ti][j];
                            norms[ti] = bal.lambdas[ti] * std::sqrt(sq);
                        }
                        gradnorm_update(bal, comp.losses, norms);
                    }
                }
                grad.assign(total, 0.0);
                scal_value = 0.0;
                for (int ti = 0; ti < k; ++ti) {
                    const double l = bal.lambdas[ti];
                    for (int j = 0; j < total; ++j) grad[j] += l * term_grads[ti][j];
                    scal_value += l * comp.losses.values[ti];
                }
            } else {
                if (step > 0) {
                    if (cfg.balancer.id == BalancerId::SoftAdapt)
                        softadapt_update(bal, comp.losses);
                    else if (cfg.balancer.id == BalancerId::Relobralo)
                        relobralo_update(bal, comp.losses);
                }
                const NodeId root = scalarise(comp.tape, comp.term_loss_nodes, bal.lambdas);
                grad = parameter_gradient(comp.tape, root, net, params, comp.terms, cfg.exec);
                ++sweeps;
                scal_value = comp.tape.value(root);
            }

            if (separate_mu && spec.mu_trainable) {
                adam_step(adam, params.v.data(), grad.data(), theta, lr_now, step);
                adam_step(adam_mu, params.v.data() + params.layout.mu_index,
                          grad.data() + params.layout.mu_index, 1, cfg.mu_lr * plateau.scale,
                          step);
            } else {
                adam_step(adam, params.v.data(), grad.data(), total, lr_now, step);
            }
        } catch (const NumericError& e) {
            rec.failed = true;
            rec.fail_msg = e.what();
            rec.stop_reason = "failure";
            break;
        }

        double total_loss = 0.0;
        for (double l : comp.losses.values) total_loss += l;
        tracker.observe(total_loss, step);
        plateau.update(tracker, step);
        const bool stop_early = early.should_stop(tracker);
        const bool last = stop_early || step + 1 == cfg.max_steps;

        if (step % cfg.record_every == 0 || last) {
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - step_start)
                                  .count();
            rec.rows.push_back({step, comp.losses.values, bal.lambdas, scal_value,
                                spec.mu_trainable ? params.mu() : 0.0, lr_now, sweeps, ms});
        }
        if (stop_early) {
            rec.stop_reason = "early_stop";
            ++step;
            break;
        }
    }
    rec.steps_run = step;
    rec.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
    if (step > 0) {
        rec.steps_per_sec = step / rec.train_seconds;
        rec.seconds_per_1k = rec.train_seconds / step * 1000.0;
    }
    if (!rec.rows.empty()) {
        double tf = 0.0;
        for (double l : rec.rows.back().losses) tf += l;
        rec.train_f = tf;
    }
    rec.final_params = params;

    if (!rec.failed) {
        const Validation val = validate(net, params, spec);
        rec.val_mse = val.mse;
        rec.rel_max_err = val.rel_max_err;
        if (spec.mu_trainable) {
            rec.mu_final = params.mu();
            rec.mu_sqerr = spec.mu_squared_error(params.mu());
        }
    }
    return rec;
}

}  // namespace pinn
