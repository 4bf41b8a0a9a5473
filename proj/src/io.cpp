#include "pinn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pinn {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        f << (i ? "," : "") << table.header[i];
    f << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_full(row[i]);
        f << "\n";
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("empty csv: " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_run_csv(const std::string& path, const RunRecord& rec) {
    CsvTable t;
    t.header = {"step"};
    for (const auto& l : rec.term_labels) t.header.push_back("loss_" + l);
    for (const auto& l : rec.term_labels) t.header.push_back("lambda_" + l);
    t.header.insert(t.header.end(), {"loss_scalarised", "mu", "lr", "sweeps", "wall_ms"});
    for (const auto& r : rec.rows) {
        std::vector<double> row;
        row.push_back(static_cast<double>(r.step));
        row.insert(row.end(), r.losses.begin(), r.losses.end());
        row.insert(row.end(), r.lambdas.begin(), r.lambdas.end());
        row.push_back(r.scalarised);
        row.push_back(r.mu);
        row.push_back(r.lr);
        row.push_back(static_cast<double>(r.sweeps));
        row.push_back(r.wall_ms);
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

RunRecord read_run_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    RunRecord rec;
    std::size_t i = 1;
    while (i < t.header.size() && t.header[i].rfind("loss_", 0) == 0 &&
           t.header[i] != "loss_scalarised") {
        rec.term_labels.push_back(t.header[i].substr(5));
        ++i;
    }
    const std::size_t k = rec.term_labels.size();
    for (const auto& row : t.rows) {
        StepRow r;
        r.step = static_cast<long>(row[0]);
        r.losses.assign(row.begin() + 1, row.begin() + 1 + k);
        r.lambdas.assign(row.begin() + 1 + k, row.begin() + 1 + 2 * k);
        r.scalarised = row[1 + 2 * k];
        r.mu = row[2 + 2 * k];
        r.lr = row[3 + 2 * k];
        r.sweeps = static_cast<long>(row[4 + 2 * k]);
        r.wall_ms = row[5 + 2 * k];
        rec.rows.push_back(std::move(r));
    }
    if (!rec.rows.empty()) rec.steps_run = rec.rows.back().step + 1;
    return rec;
}

}  // namespace pinn
