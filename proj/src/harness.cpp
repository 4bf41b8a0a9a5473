#include "pinn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "pinn/io.hpp"

namespace fs = std::filesystem;

namespace pinn {

namespace {
constexpr const char* kVersion = "1.0.0";

nlohmann::json net_to_json(const NetworkConfig& n) {
    return {{"hidden_layers", n.hidden_layers},
            {"width", n.width},
            {"activation", activation_name(n.activation)}};
}

void net_from_json(const nlohmann::json& j, NetworkConfig& n) {
    n.hidden_layers = j.value("hidden_layers", n.hidden_layers);
    n.width = j.value("width", n.width);
    if (j.contains("activation")) n.activation = activation_from_name(j["activation"]);
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (v.size() - 1));
}

std::string resolve_out_dir(const std::string& dir) {
    if (dir.empty() || fs::path(dir).is_absolute()) return dir;
    if (const char* root = std::getenv("PINN_OUT_ROOT")) return (fs::path(root) / dir).string();
    return dir;
}

void ExperimentConfig::validate() const {
    train.validate();
    if (seeds.empty()) throw ConfigError("seed list must not be empty");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["problem"] = problem_name(problem);
    j["mode"] = mode_name(mode);
    j["balancer"] = balancer_name(train.balancer.id);
    j["seeds"] = seeds;
    j["out_dir"] = out_dir;
    j["workers"] = workers;
    j["train"] = {{"max_steps", train.max_steps},
                  {"initial_lr", train.initial_lr},
                  {"plateau_patience", train.plateau_patience},
                  {"plateau_factor", train.plateau_factor},
                  {"early_stop_patience", train.early_stop_patience},
                  {"record_every", train.record_every},
                  {"resample_every", train.resample_every},
                  {"separate_mu_optimizer", train.separate_mu_optimizer},
                  {"mu_lr", train.mu_lr},
                  {"threads", train.exec.threads},
                  {"precision", train.precision},
                  {"net", net_to_json(train.net)},
                  {"batch",
                   {{"interior", train.batch.interior},
                    {"boundary", train.batch.boundary},
                    {"initial", train.batch.initial},
                    {"measurement", train.batch.measurement}}},
                  {"balancer_params",
                   {{"alpha", train.balancer.alpha},
                    {"temperature", train.balancer.temperature},
                    {"expected_rho", train.balancer.expected_rho},
                    {"lr_annealing_alpha", train.balancer.lr_annealing_alpha},
                    {"gradnorm_alpha", train.balancer.gradnorm_alpha},
                    {"gradnorm_lr", train.balancer.gradnorm_lr},
                    {"manual_lambdas", train.balancer.manual_lambdas}}}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("problem")) c.problem = problem_from_name(j["problem"]);
    if (j.contains("mode")) c.mode = mode_from_name(j["mode"]);
    if (j.contains("balancer")) c.train.balancer.id = balancer_from_name(j["balancer"]);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.out_dir = j.value("out_dir", std::string{});
    c.workers = j.value("workers", c.workers);
    if (j.contains("train")) {
        const auto& t = j["train"];
        c.train.max_steps = t.value("max_steps", c.train.max_steps);
        c.train.initial_lr = t.value("initial_lr", c.train.initial_lr);
        c.train.plateau_patience = t.value("plateau_patience", c.train.plateau_patience);
        c.train.plateau_factor = t.value("plateau_factor", c.train.plateau_factor);
        c.train.early_stop_patience = t.value("early_stop_patience", c.train.early_stop_patience);
        c.train.record_every = t.value("record_every", c.train.record_every);
        c.train.resample_every = t.value("resample_every", c.train.resample_every);
        c.train.separate_mu_optimizer =
            t.value("separate_mu_optimizer", c.train.separate_mu_optimizer);
        c.train.mu_lr = t.value("mu_lr", c.train.mu_lr);
        c.train.exec.threads = t.value("threads", c.train.exec.threads);
        c.train.precision = t.value("precision", c.train.precision);
        if (t.contains("net")) net_from_json(t["net"], c.train.net);
        if (t.contains("batch")) {
            const auto& b = t["batch"];
            c.train.batch.interior = b.value("interior", c.train.batch.interior);
            c.train.batch.boundary = b.value("boundary", c.train.batch.boundary);
            c.train.batch.initial = b.value("initial", c.train.batch.initial);
            c.train.batch.measurement = b.value("measurement", c.train.batch.measurement);
        }
        if (t.contains("balancer_params")) {
            const auto& b = t["balancer_params"];
            auto& bc = c.train.balancer;
            bc.alpha = b.value("alpha", bc.alpha);
            bc.temperature = b.value("temperature", bc.temperature);
            bc.expected_rho = b.value("expected_rho", bc.expected_rho);
            bc.lr_annealing_alpha = b.value("lr_annealing_alpha", bc.lr_annealing_alpha);
            bc.gradnorm_alpha = b.value("gradnorm_alpha", bc.gradnorm_alpha);
            bc.gradnorm_lr = b.value("gradnorm_lr", bc.gradnorm_lr);
            if (b.contains("manual_lambdas"))
                bc.manual_lambdas = b["manual_lambdas"].get<std::vector<double>>();
        }
    }
    return c;
}

namespace {

std::vector<RunRecord> run_seeds(const ProblemSpec& spec, const TrainConfig& base,
                                 const std::vector<std::uint64_t>& seeds, int workers) {
    std::vector<RunRecord> out(seeds.size());
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        std::size_t i;
        while ((i = next.fetch_add(1)) < seeds.size()) {
            TrainConfig c = base;
            c.seed = seeds[i];
            if (nw > 1 && c.exec.threads == 0) c.exec.threads = 1;
            out[i] = train(spec, c);
        }
    };
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nw; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

Aggregate aggregate_runs(const std::vector<RunRecord>& runs) {
    Aggregate a;
    a.n_runs = static_cast<int>(runs.size());
    std::vector<double> tf, vu, rme, mu, s1k;
    for (const auto& r : runs) {
        if (r.failed) {
            ++a.n_failed;
            continue;
        }
        tf.push_back(r.train_f);
        vu.push_back(r.val_mse);
        rme.push_back(r.rel_max_err);
        if (std::isfinite(r.mu_sqerr)) mu.push_back(r.mu_sqerr);
        s1k.push_back(r.seconds_per_1k);
    }
    a.median_train_f = median(tf);
    a.median_val_mse = median(vu);
    a.std_val_mse = sample_std(vu);
    a.median_rel_max_err = median(rme);
    a.median_mu_sqerr = mu.empty() ? std::numeric_limits<double>::quiet_NaN() : median(mu);
    a.std_mu_sqerr = mu.empty() ? 0.0 : sample_std(mu);
    a.median_seconds_per_1k = median(s1k);
    return a;
}

void write_measurements_csv(const std::string& path, const ProblemSpec& spec) {
    CsvTable t;
    t.header = {"x", "y", "u"};
    for (std::size_t i = 0; i < spec.meas_u.size(); ++i)
        t.rows.push_back({spec.meas_x[i], spec.meas_y[i], spec.meas_u[i]});
    write_csv(path, t);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    cfg.validate();
    cfg.out_dir = resolve_out_dir(cfg.out_dir);

    const ProblemSpec spec = make_problem(cfg.problem, cfg.mode);
    ExperimentSummary summary;
    summary.dir = cfg.out_dir;

    if (cfg.write_artifacts) {
        if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
        fs::create_directories(cfg.out_dir);
        std::ofstream(fs::path(cfg.out_dir) / "config.json") << cfg.to_json().dump(2) << "\n";
        if (cfg.mode == Mode::Inverse)
            write_measurements_csv((fs::path(cfg.out_dir) / "measurements.csv").string(), spec);
    }

    summary.runs = run_seeds(spec, cfg.train, cfg.seeds, cfg.workers);
    summary.agg = aggregate_runs(summary.runs);
    summary.status = summary.agg.n_failed > 0 ? RunStatus::Partial : RunStatus::AllOk;

    if (cfg.write_artifacts) {
        NetworkConfig net = cfg.train.net;
        net.input_map = spec.input_map;
        nlohmann::json per_seed = nlohmann::json::array();
        nlohmann::json timing_seed = nlohmann::json::array();
        for (const auto& r : summary.runs) {
            const std::string tag = std::to_string(r.seed);
            write_run_csv((fs::path(cfg.out_dir) / ("run_" + tag + ".csv")).string(), r);
            if (!r.failed)
                save_checkpoint((fs::path(cfg.out_dir) / ("checkpoint_" + tag + ".txt")).string(),
                                net, r.final_params);
            per_seed.push_back({{"seed", r.seed},
                                {"steps_run", r.steps_run},
                                {"stop_reason", r.stop_reason},
                                {"failed", r.failed},
                                {"fail_msg", r.fail_msg},
                                {"train_f", finite_or(r.train_f, -1)},
                                {"val_mse", finite_or(r.val_mse, -1)},
                                {"rel_max_err", finite_or(r.rel_max_err, -1)},
                                {"mu_final", finite_or(r.mu_final, 0)},
                                {"mu_sqerr", finite_or(r.mu_sqerr, -1)}});
            timing_seed.push_back({{"seed", r.seed},
                                   {"seconds_per_1k", r.seconds_per_1k},
                                   {"steps_per_sec", r.steps_per_sec},
                                   {"train_seconds", r.train_seconds}});
        }
        nlohmann::json sj;
        sj["version"] = kVersion;
        sj["config"] = cfg.to_json();
        sj["runs"] = per_seed;
        sj["aggregate"] = {{"median_train_f", finite_or(summary.agg.median_train_f, -1)},
                           {"median_val_mse", finite_or(summary.agg.median_val_mse, -1)},
                           {"std_val_mse", finite_or(summary.agg.std_val_mse, -1)},
                           {"median_rel_max_err", finite_or(summary.agg.median_rel_max_err, -1)},
                           {"median_mu_sqerr", finite_or(summary.agg.median_mu_sqerr, -1)},
                           {"std_mu_sqerr", finite_or(summary.agg.std_mu_sqerr, -1)},
                           {"n_runs", summary.agg.n_runs},
                           {"n_failed", summary.agg.n_failed}};
        std::ofstream(fs::path(cfg.out_dir) / "summary.json") << sj.dump(2) << "\n";
        nlohmann::json tj;
        tj["per_seed"] = timing_seed;
        tj["median_seconds_per_1k"] = summary.agg.median_seconds_per_1k;
        std::ofstream(fs::path(cfg.out_dir) / "timing.json") << tj.dump(2) << "\n";
    }
    return summary;
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    SweepSpec s;
    for (const auto& a : j.at("axes"))
        s.axes.push_back({a.at("name"), a.at("values").get<std::vector<double>>()});
    s.runs_per_cell = j.value("runs_per_cell", s.runs_per_cell);
    s.max_cells = j.value("max_cells", s.max_cells);
    return s;
}

namespace {

void apply_axis(TrainConfig& t, const std::string& name, double v) {
    if (name == "temperature") t.balancer.temperature = v;
    else if (name == "alpha") t.balancer.alpha = v;
    else if (name == "expected_rho") t.balancer.expected_rho = v;
    else if (name == "lr") t.initial_lr = v;
    else if (name == "width") t.net.width = static_cast<int>(v);
    else if (name == "max_steps") t.max_steps = static_cast<long>(v);
    else throw ConfigError("unknown sweep axis: " + name);
}

}  // namespace

SweepResult sweep(const SweepSpec& spec, const ExperimentConfig& base) {
    if (spec.axes.empty()) throw ConfigError("sweep needs at least one axis");
    std::size_t cells = 1;
    for (const auto& a : spec.axes) {
        if (a.values.empty()) throw ConfigError("sweep axis without values: " + a.name);
        cells *= a.values.size();
    }
    if (cells > static_cast<std::size_t>(spec.max_cells))
        throw ConfigError("sweep grid exceeds the configured budget");

    const ProblemSpec prob = make_problem(base.problem, base.mode);
    std::vector<std::uint64_t> seeds(base.seeds.begin(),
                                     base.seeds.begin() +
                                         std::min<std::size_t>(base.seeds.size(),
                                                               spec.runs_per_cell));
    while (static_cast<int>(seeds.size()) < spec.runs_per_cell)
        seeds.push_back(seeds.back() + 1000);

    SweepResult res;
    res.spec = spec;
    std::vector<std::size_t> idx(spec.axes.size(), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        SweepCell sc;
        TrainConfig t = base.train;
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            sc.coords.push_back(spec.axes[a].values[idx[a]]);
            apply_axis(t, spec.axes[a].name, sc.coords.back());
        }
        try {
            const auto runs = run_seeds(prob, t, seeds, base.workers);
            std::vector<double> logs;
            for (const auto& r : runs)
                if (!r.failed && std::isfinite(r.val_mse) && r.val_mse > 0.0)
                    logs.push_back(std::log(r.val_mse));
            if (!logs.empty()) {
                sc.median_log_val_mse = median(logs);
                sc.ok = true;
            }
        } catch (const std::exception&) {
            sc.ok = false;  // marked, sweep continues
        }
        res.cells.push_back(std::move(sc));
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            if (++idx[a] < spec.axes[a].values.size()) break;
            idx[a] = 0;
        }
    }

    if (!base.out_dir.empty() && base.write_artifacts) {
        const std::string dir = resolve_out_dir(base.out_dir);
        fs::create_directories(dir);
        CsvTable longf;
        for (const auto& a : spec.axes) longf.header.push_back(a.name);
        longf.header.push_back("median_log_val_mse");
        longf.header.push_back("ok");
        for (const auto& c : res.cells) {
            std::vector<double> row = c.coords;
            row.push_back(c.ok ? c.median_log_val_mse : std::numeric_limits<double>::quiet_NaN());
            row.push_back(c.ok ? 1.0 : 0.0);
            longf.rows.push_back(std::move(row));
        }
        write_csv((fs::path(dir) / "sweep.csv").string(), longf);
        if (spec.axes.size() == 2) {
            // Heatmap layout: rows = first axis, columns = second axis.
            CsvTable mat;
            mat.header.push_back(spec.axes[0].name + "\\" + spec.axes[1].name);
            for (double v : spec.axes[1].values) mat.header.push_back(format_full(v));
            const std::size_t ncol = spec.axes[1].values.size();
            for (std::size_t r = 0; r < spec.axes[0].values.size(); ++r) {
                std::vector<double> row{spec.axes[0].values[r]};
                for (std::size_t c = 0; c < ncol; ++c) {
                    const auto& cell = res.cells[r * ncol + c];
                    row.push_back(cell.ok ? cell.median_log_val_mse
                                          : std::numeric_limits<double>::quiet_NaN());
                }
                mat.rows.push_back(std::move(row));
            }
            write_csv((fs::path(dir) / "sweep_matrix.csv").string(), mat);
        }
    }
    return res;
}

}  // namespace pinn
