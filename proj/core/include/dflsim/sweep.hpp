#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dflsim/metrics.hpp"
#include "dflsim/scenario.hpp"

namespace dflsim {

/// A base scenario plus axes; `points` is the cartesian product, first axis
/// slowest.
struct SweepGrid {
  ScenarioConfig base;
  std::vector<std::string> axis_keys;
  std::vector<ScenarioConfig> points;
};

inline constexpr std::size_t kDefaultMaxScenarios = 500;

/// JSON file: {"base": {...}, "axes": {"pnr_percent": [0, 50], "aggregator.name": ["krum"]},
/// "max_scenarios": 500}. Axis keys are dotted config paths.
SweepGrid parse_sweep(const std::filesystem::path& path);
SweepGrid parse_sweep_text(std::string_view text, const std::filesystem::path& base_dir = {});

SweepGrid single_scenario_grid(const ScenarioConfig& cfg);

/// Header of every results file.
inline constexpr std::string_view kCsvHeader =
    "scenario_id,paradigm,topology,aggregator,attack,pnr,seed,round,metric,value,sim_transfer_seconds,error";

struct SweepOptions {
  int parallel_scenarios = 1;
  int threads_per_scenario = 1;
  bool overwrite = false;
  /// Called after each scenario finishes, from the writer.
  std::function<void(std::size_t index, const ScenarioConfig&, const std::string& error)> on_scenario;
};

struct SweepSummary {
  std::size_t scenarios = 0;
  std::size_t failed = 0;
  std::size_t rows = 0;
};

/// Runs every grid point and writes one row per (scenario, round, metric) in
/// grid order. A failing scenario yields a single row carrying its error.
/// Refuses to touch an existing file unless overwrite is set.
SweepSummary run_sweep(const SweepGrid& grid, const std::filesystem::path& out, const SweepOptions& options = {});

struct TableSpec {
  MetricName metric = MetricName::f1_benign_avg;
  std::string rows = "aggregator";
  std::string cols = "pnr";
  /// column name -> required value
  std::map<std::string, std::string> where;
};

struct Table {
  std::string row_axis;
  std::string col_axis;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  /// cells[r][c], raw metric values.
  std::vector<std::vector<double>> cells;
};

/// Pivot of final-round values. Throws InvalidArgument listing every missing
/// or ambiguous (row, col) coordinate.
Table pivot_results(const std::filesystem::path& csv, const TableSpec& spec);

enum class TableFormat { text, csv };

/// Cells as percentages with one decimal.
std::string format_table(const Table& table, TableFormat format);

}  // namespace dflsim
