#pragma once

// Experiment front end: run manifests (JSON), seed fan-out over a bounded
// worker pool, hyperparameter grid sweeps, and aggregation into
// paper-style comparison tables and plot-ready CSV data.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pinn/problems.hpp"
#include "pinn/training.hpp"

namespace pinn {

struct ExperimentConfig {
    ProblemId problem = ProblemId::Burgers;
    Mode mode = Mode::Forward;
    TrainConfig train;  // train.balancer selects the strategy
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
    std::string out_dir;
    int workers = 2;
    bool write_artifacts = true;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

enum class RunStatus { AllOk = 0, Partial = 1, BadConfig = 2 };

struct Aggregate {
    double median_train_f = 0, median_val_mse = 0, std_val_mse = 0;
    double median_rel_max_err = 0, median_mu_sqerr = 0, std_mu_sqerr = 0;
    double median_seconds_per_1k = 0;
    int n_runs = 0, n_failed = 0;
};

struct ExperimentSummary {
    RunStatus status = RunStatus::AllOk;
    std::string dir;
    Aggregate agg;
    std::vector<RunRecord> runs;
};

// Trains one run per seed (across `workers` threads), persists run CSVs,
// checkpoints, measurement data, summary.json and timing.json.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

struct SweepSpec {
    struct Axis {
        std::string name;  // temperature | alpha | expected_rho | lr | width | max_steps
        std::vector<double> values;
    };
    std::vector<Axis> axes;
    int runs_per_cell = 3;
    int max_cells = 64;

    static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepCell {
    std::vector<double> coords;
    double median_log_val_mse = 0;
    bool ok = false;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepCell> cells;
};

// Deterministic grid sweep; per-cell failures are marked and skipped. Writes
// sweep.csv (long format) plus sweep_matrix.csv when there are two axes.
SweepResult sweep(const SweepSpec& spec, const ExperimentConfig& base);

// Aggregates artifact directories into comparison tables, median log-loss
// curves, lambda bands, mu trajectories and solution/reference/error grids.
void report(const std::vector<std::string>& dirs, const std::string& out_dir);

// Applies PINN_OUT_ROOT to relative paths.
std::string resolve_out_dir(const std::string& dir);

double median(std::vector<double> v);
double sample_std(const std::vector<double>& v);

}  // namespace pinn
