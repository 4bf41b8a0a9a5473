// Command-line front end: train / sweep / report / oracle.
// Exit codes: 0 all ok, 1 partial failures, 2 invalid configuration.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinn/harness.hpp"
#include "pinn/io.hpp"
#include "pinn/oracle_suite.hpp"

using namespace pinn;

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return j;
}

struct TrainFlags {
    std::string config, problem, mode, balancer, out_dir, seeds;
    long max_steps = -1;
    int resample_every = -999;
    int width = -1, hidden_layers = -1, interior = -1, boundary = -1, workers = -1;
    double lr = -1, temperature = -1, alpha = -1, expected_rho = -1;

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (!config.empty()) cfg = ExperimentConfig::from_json(load_json(config));
        if (!problem.empty()) cfg.problem = problem_from_name(problem);
        if (!mode.empty()) cfg.mode = mode_from_name(mode);
        if (!balancer.empty()) cfg.train.balancer.id = balancer_from_name(balancer);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!seeds.empty()) {
            cfg.seeds.clear();
            std::stringstream ss(seeds);
            std::string tok;
            while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
        }
        if (max_steps >= 0) cfg.train.max_steps = max_steps;
        if (resample_every != -999) cfg.train.resample_every = resample_every;
        if (width > 0) cfg.train.net.width = width;
        if (hidden_layers > 0) cfg.train.net.hidden_layers = hidden_layers;
        if (interior > 0) cfg.train.batch.interior = interior;
        if (boundary > 0) cfg.train.batch.boundary = boundary;
        if (workers > 0) cfg.workers = workers;
        if (lr > 0) cfg.train.initial_lr = lr;
        if (temperature > 0) cfg.train.balancer.temperature = temperature;
        if (alpha >= 0) cfg.train.balancer.alpha = alpha;
        if (expected_rho >= 0) cfg.train.balancer.expected_rho = expected_rho;
        return cfg;
    }
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
    app->add_option("--config", f.config, "experiment JSON");
    app->add_option("--problem", f.problem, "burgers|kirchhoff|helmholtz");
    app->add_option("--mode", f.mode, "forward|inverse");
    app->add_option("--balancer", f.balancer,
                    "manual|gradnorm|lr_annealing|softadapt|relobralo");
    app->add_option("--out", f.out_dir, "artifact directory");
    app->add_option("--seeds", f.seeds, "comma-separated seed list");
    app->add_option("--steps", f.max_steps, "max optimisation steps");
    app->add_option("--resample", f.resample_every, "steps between collocation redraws (0 = fixed set)");
    app->add_option("--width", f.width);
    app->add_option("--layers", f.hidden_layers);
    app->add_option("--interior", f.interior, "interior batch size");
    app->add_option("--boundary", f.boundary, "boundary batch size");
    app->add_option("--workers", f.workers);
    app->add_option("--lr", f.lr);
    app->add_option("--temperature", f.temperature);
    app->add_option("--alpha", f.alpha);
    app->add_option("--rho", f.expected_rho, "expected saudade");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PINN loss-balancing engine"};
    app.require_subcommand(1);

    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "run one experiment config");
    add_train_flags(train_cmd, tf);

    TrainFlags sf;
    std::string sweep_json;
    auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter grid sweep");
    add_train_flags(sweep_cmd, sf);
    sweep_cmd->add_option("--sweep", sweep_json, "sweep spec JSON")->required();

    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "aggregate artifact directories");
    report_cmd->add_option("dirs", report_dirs, "artifact directories")->required();
    report_cmd->add_option("--out", report_out, "report output directory")->required();

    bool corrupt_tanh = false;
    auto* oracle_cmd = app.add_subcommand("oracle", "run the verification oracle suite");
    oracle_cmd->add_flag("--corrupt-tanh", corrupt_tanh,
                         "negative control: corrupt the tanh 3rd-derivative entry");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            const auto summary = run_experiment(tf.build());
            std::printf("experiment %s: %d runs, %d failed, median val_u %.6g\n",
                        summary.dir.c_str(), summary.agg.n_runs, summary.agg.n_failed,
                        summary.agg.median_val_mse);
            return summary.status == RunStatus::AllOk ? 0 : 1;
        }
        if (*sweep_cmd) {
            const SweepSpec spec = SweepSpec::from_json(load_json(sweep_json));
            const auto res = sweep(spec, sf.build());
            int bad = 0;
            for (const auto& c : res.cells) {
                for (std::size_t a = 0; a < c.coords.size(); ++a)
                    std::printf("%s%s=%g", a ? " " : "", res.spec.axes[a].name.c_str(),
                                c.coords[a]);
                if (c.ok)
                    std::printf(" -> median log val_u %.4f\n", c.median_log_val_mse);
                else {
                    std::printf(" -> FAILED\n");
                    ++bad;
                }
            }
            return bad == 0 ? 0 : 1;
        }
        if (*report_cmd) {
            report(report_dirs, report_out);
            std::printf("report written to %s\n", resolve_out_dir(report_out).c_str());
            return 0;
        }
        if (*oracle_cmd) {
            const auto checks = oracle_suite({corrupt_tanh});
            int failed = 0;
            for (const auto& c : checks) {
                std::printf("%-36s %12.4e  (tol %g)  %s%s%s\n", c.name.c_str(), c.measured,
                            c.tolerance, c.pass ? "PASS" : "FAIL",
                            c.detail.empty() ? "" : "  # ", c.detail.c_str());
                if (!c.pass) ++failed;
            }
            std::printf("%zu checks, %d failed\n", checks.size(), failed);
            return failed == 0 ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
