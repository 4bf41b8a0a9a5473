#pragma once

// The optimisation loop: Adam with bias correction, plateau learning-rate
// schedule, early stopping, optional separate optimizer for the PDE
// parameter, per-step recording, and final validation against the problem's
// reference solution.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pinn/balancing.hpp"
#include "pinn/network.hpp"
#include "pinn/problems.hpp"

namespace pinn {

struct TrainConfig {
    long max_steps = 100000;
    double initial_lr = 1e-3;
    int plateau_patience = 3000;
    double plateau_factor = 0.1;
    int early_stop_patience = 9000;
    std::uint64_t seed = 1;
    BalancerConfig balancer;
    NetworkConfig net;
    BatchSizes batch;
    int separate_mu_optimizer = -1;  // -1 = per-problem default, else 0/1
    double mu_lr = 1e-2;
    int record_every = 10;
    // Steps between collocation redraws. 1 = a fresh batch every step;
    // 0 = one set sampled before training and kept (data batches included).
    int resample_every = 1;
    ExecPolicy exec;
    std::string precision = "f64";

    void validate() const {
        if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
        if (initial_lr <= 0.0) throw ConfigError("initial_lr must be > 0");
        if (plateau_factor <= 0.0 || plateau_factor >= 1.0)
            throw ConfigError("plateau_factor must be in (0,1)");
        if (plateau_patience <= 0 || early_stop_patience <= 0)
            throw ConfigError("patiences must be > 0");
        if (record_every < 1) throw ConfigError("record_every must be >= 1");
#ifdef PINN_SINGLE_PRECISION
        if (precision != "f32") throw ConfigError("this build runs in 32-bit precision");
#else
        if (precision != "f64")
            throw ConfigError("precision '" + precision +
                              "' needs the PINN_SINGLE_PRECISION build");
#endif
    }
};

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update over params[0..n); deterministic.
// Throws NumericError on a non-finite gradient entry.
void adam_step(AdamState& st, double* params, const double* grad, std::size_t n, double lr,
               long step_index = -1);

struct ProgressTracker {
    double best = std::numeric_limits<double>::infinity();
    long best_step = -1;
    long steps_since_best = 0;

    void observe(double loss, long step) {
        if (loss < best) {
            best = loss;
            best_step = step;
            steps_since_best = 0;
        } else {
            ++steps_since_best;
        }
    }
};

// Multiplies the learning rate by `factor` whenever `patience` steps pass
// without a new best; the plateau window restarts after each reduction.
struct PlateauScheduler {
    int patience;
    double factor;
    double scale = 1.0;
    long last_event_step = -1;

    double update(const ProgressTracker& tracker, long step) {
        if (tracker.best_step == step) {
            last_event_step = step;
        } else if (step - last_event_step >= patience) {
            scale *= factor;
            last_event_step = step;
        }
        return scale;
    }
};

struct EarlyStopper {
    int patience;
    bool should_stop(const ProgressTracker& tracker) const {
        return tracker.steps_since_best >= patience;
    }
};

struct StepRow {
    long step;
    std::vector<double> losses, lambdas;
    double scalarised, mu, lr;
    long sweeps;  // cumulative reverse sweeps in this run
    double wall_ms;
};

struct RunRecord {
    std::vector<std::string> term_labels;
    std::vector<StepRow> rows;
    std::uint64_t seed = 0;
    long steps_run = 0;
    std::string stop_reason;  // budget | early_stop | failure
    bool failed = false;
    std::string fail_msg;

    double train_f = std::numeric_limits<double>::quiet_NaN();  // final unweighted total
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    double rel_max_err = std::numeric_limits<double>::quiet_NaN();
    double mu_final = std::numeric_limits<double>::quiet_NaN();
    double mu_sqerr = std::numeric_limits<double>::quiet_NaN();
    double train_seconds = 0.0;       // loop only, validation excluded
    double seconds_per_1k = 0.0;
    double steps_per_sec = 0.0;

    ParameterVector final_params;  // for checkpointing by the harness
};

struct Validation {
    double mse;
    double rel_max_err;
};

// Network vs reference on a fixed uniform 256x256 grid (deterministic; the
// reference grid is cached per problem).
Validation validate(const NetworkConfig& cfg, const ParameterVector& params,
                    const ProblemSpec& spec);

inline constexpr int kValidationGrid = 256;
// Reference solution sampled on the fixed validation grid (row-major over x).
const std::vector<double>& reference_grid(const ProblemSpec& spec);

RunRecord train(const ProblemSpec& spec, const TrainConfig& cfg);

}  // namespace pinn
