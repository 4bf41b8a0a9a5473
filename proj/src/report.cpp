#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pinn/harness.hpp"
#include "pinn/io.hpp"

namespace fs = std::filesystem;

namespace pinn {

namespace {

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

struct LoadedDir {
    std::string label;
    nlohmann::json summary;
    std::vector<RunRecord> runs;
    bool has_summary = false;
};

LoadedDir load_dir(const std::string& dir) {
    LoadedDir d;
    d.label = fs::path(dir).filename().string();
    if (d.label.empty()) d.label = fs::path(dir).parent_path().filename().string();
    const fs::path sj = fs::path(dir) / "summary.json";
    if (fs::exists(sj)) {
        std::ifstream f(sj);
        f >> d.summary;
        d.has_summary = true;
    }
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("run_", 0) == 0 && e.path().extension() == ".csv")
            d.runs.push_back(read_run_csv(e.path().string()));
    }
    return d;
}

// Median per recorded step across seeds; steps missing from some runs use
// the runs that have them.
void emit_curves(const LoadedDir& d, const fs::path& out) {
    if (d.runs.empty()) return;
    const auto& labels = d.runs.front().term_labels;
    std::set<long> steps;
    for (const auto& r : d.runs)
        for (const auto& row : r.rows) steps.insert(row.step);
    std::map<long, std::vector<const StepRow*>> by_step;
    for (const auto& r : d.runs)
        for (const auto& row : r.rows) by_step[row.step].push_back(&row);

    CsvTable curves;
    curves.header = {"step"};
    for (const auto& l : labels) curves.header.push_back("median_log_loss_" + l);
    curves.header.push_back("median_log_loss_total");
    CsvTable lam;
    lam.header = {"step"};
    for (const auto& l : labels) {
        lam.header.push_back("lambda_mean_" + l);
        lam.header.push_back("lambda_var_" + l);
    }
    CsvTable mu;
    mu.header = {"step", "mu_mean", "mu_std"};

    for (long s : steps) {
        const auto& rows = by_step[s];
        std::vector<double> crow{static_cast<double>(s)}, lrow{static_cast<double>(s)};
        for (std::size_t t = 0; t < labels.size(); ++t) {
            std::vector<double> ls;
            for (auto* r : rows) ls.push_back(safe_log(r->losses[t]));
            crow.push_back(median(ls));
        }
        std::vector<double> totals;
        for (auto* r : rows) {
            double tot = 0;
            for (double v : r->losses) tot += v;
            totals.push_back(safe_log(tot));
        }
        crow.push_back(median(totals));
        curves.rows.push_back(std::move(crow));

        for (std::size_t t = 0; t < labels.size(); ++t) {
            double mean = 0;
            for (auto* r : rows) mean += r->lambdas[t];
            mean /= rows.size();
            double var = 0;
            for (auto* r : rows) var += (r->lambdas[t] - mean) * (r->lambdas[t] - mean);
            var /= rows.size();
            lrow.push_back(mean);
            lrow.push_back(var);
        }
        lam.rows.push_back(std::move(lrow));

        std::vector<double> mus;
        for (auto* r : rows) mus.push_back(r->mu);
        const double mmean = [&] {
            double acc = 0;
            for (double v : mus) acc += v;
            return acc / mus.size();
        }();
        mu.rows.push_back({static_cast<double>(s), mmean, sample_std(mus)});
    }
    write_csv((out / ("curves_" + d.label + ".csv")).string(), curves);
    write_csv((out / ("lambda_" + d.label + ".csv")).string(), lam);
    mu.header[1] = "mu_mean";
    write_csv((out / ("mu_" + d.label + ".csv")).string(), mu);
}

void emit_grids(const std::string& dir, const LoadedDir& d, const fs::path& out) {
    if (!d.has_summary) return;
    const auto& cfgj = d.summary["config"];
    const ProblemSpec spec =
        make_problem(problem_from_name(cfgj["problem"]), mode_from_name(cfgj["mode"]));
    // Checkpoint of the run whose val_mse is closest to the median.
    std::vector<std::pair<double, std::uint64_t>> vals;
    for (const auto& r : d.summary["runs"]) {
        if (r["failed"].get<bool>()) continue;
        vals.push_back({r["val_mse"].get<double>(), r["seed"].get<std::uint64_t>()});
    }
    if (vals.empty()) return;
    std::vector<double> v;
    for (auto& p : vals) v.push_back(p.first);
    const double med = median(v);
    std::sort(vals.begin(), vals.end(), [&](auto& a, auto& b) {
        return std::abs(a.first - med) < std::abs(b.first - med);
    });
    const fs::path ckpt = fs::path(dir) / ("checkpoint_" + std::to_string(vals[0].second) + ".txt");
    if (!fs::exists(ckpt)) return;
    NetworkConfig net;
    const ParameterVector params = load_checkpoint(ckpt.string(), net);

    const int n = kValidationGrid;
    const auto& ref = reference_grid(spec);
    CsvTable sol, refc, err;
    sol.header = refc.header = err.header = {"x", "y", "value"};
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            xs.push_back(spec.lo[0] + (spec.hi[0] - spec.lo[0]) * i / (n - 1.0));
            ys.push_back(spec.lo[1] + (spec.hi[1] - spec.lo[1]) * j / (n - 1.0));
        }
    JetBatchStore store;
    forward_jets(net, params, xs.data(), ys.data(), static_cast<int>(xs.size()), 0, store, {});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double u = store.out[i];
        const double r = ref[i];
        sol.rows.push_back({xs[i], ys[i], u});
        refc.rows.push_back({xs[i], ys[i], r});
        err.rows.push_back({xs[i], ys[i], (u - r) * (u - r)});
    }
    write_csv((out / ("solution_" + d.label + ".csv")).string(), sol);
    write_csv((out / ("reference_" + d.label + ".csv")).string(), refc);
    write_csv((out / ("sqerror_" + d.label + ".csv")).string(), err);
}

}  // namespace

void report(const std::vector<std::string>& dirs, const std::string& out_dir) {
    const fs::path out = resolve_out_dir(out_dir);
    fs::create_directories(out);

    std::ofstream cmp(out / "comparison.csv");
    cmp << "problem,mode,balancer,median_train_f,median_val_mse,std_val_mse,"
           "median_rel_max_err,median_val_mu,std_val_mu,median_s_per_1k,n_runs,n_failed\n";
    std::ofstream gaps(out / "report_gaps.txt");

    for (const auto& dir : dirs) {
        if (!fs::exists(dir)) {
            gaps << dir << ": missing directory\n";
            continue;
        }
        const LoadedDir d = load_dir(dir);
        if (d.has_summary) {
            const auto& a = d.summary["aggregate"];
            const auto& c = d.summary["config"];
            cmp << c["problem"].get<std::string>() << "," << c["mode"].get<std::string>() << ","
                << c["balancer"].get<std::string>() << ","
                << format_full(a["median_train_f"].get<double>()) << ","
                << format_full(a["median_val_mse"].get<double>()) << ","
                << format_full(a["std_val_mse"].get<double>()) << ","
                << format_full(a["median_rel_max_err"].get<double>()) << ","
                << format_full(a["median_mu_sqerr"].get<double>()) << ","
                << format_full(a["std_mu_sqerr"].get<double>()) << ",";
            double s1k = -1;
            const fs::path tj = fs::path(dir) / "timing.json";
            if (fs::exists(tj)) {
                nlohmann::json t;
                std::ifstream(tj) >> t;
                s1k = t.value("median_seconds_per_1k", -1.0);
            }
            cmp << format_full(s1k) << "," << a["n_runs"].get<int>() << ","
                << a["n_failed"].get<int>() << "\n";
        } else {
            gaps << dir << ": missing summary.json\n";
        }
        if (d.runs.empty()) {
            gaps << dir << ": no run series found\n";
        } else {
            emit_curves(d, out);
        }
        emit_grids(dir, d, out);
    }
}

}  // namespace pinn
