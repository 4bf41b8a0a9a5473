#pragma once

// CSV emission and parsing. Values are printed with max_digits10 precision so
// every file round-trips exactly; column layouts are described in
// docs/csv_schema.md.

#include <string>
#include <vector>

#include "pinn/training.hpp"

namespace pinn {

void write_run_csv(const std::string& path, const RunRecord& rec);
// Reads term labels and the per-step series back; final metrics are not
// stored in the CSV (they live in the experiment summary).
RunRecord read_run_csv(const std::string& path);

// Generic rectangular CSV with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

std::string format_full(double v);  // %.17g

}  // namespace pinn
