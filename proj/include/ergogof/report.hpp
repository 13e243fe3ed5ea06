#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ergogof/model.hpp"

namespace ergogof {

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
  std::size_t total() const;
};

/// Fixed-width bins on [lo, hi]; values outside are counted in the end bins.
Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct ReportFiles {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;
};

/// Tidy plot data from an experiment directory: hist_<scenario>_<statistic>.csv
/// (with the limit-sample overlay), power.csv and curves_<scenario>.csv.
/// Throws MissingInputs when report.json or rows.csv is absent.
ReportFiles make_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir,
                        std::size_t bins = 50);

/// Rejection counts in report.json against the sum of reject flags in rows.csv.
bool rows_match_report(const std::filesystem::path& results_dir);

}  // namespace ergogof
