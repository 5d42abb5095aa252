#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fisher/market.hpp"
#include "fisher/solvers.hpp"

namespace fisher {

enum class ThresholdKind { PriceError, NormalizedGap };

std::string to_string(ThresholdKind k);
ThresholdKind threshold_kind_from_string(const std::string& s);

/// Experiment description, read from the same key-value text dialect as the
/// instance format. Either `instance_path` names a fixed instance, or the
/// generation fields (utility/distribution/budget/sizes/seed) describe a grid.
struct ExperimentConfig {
  UtilityClass utility = UtilityClass::Linear;
  ValueDistribution distribution = ValueDistribution::Uniform;
  BudgetMode budget_mode;
  std::vector<int> sizes = {50, 100, 150, 200};
  int m_factor = 2;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> solvers;
  ThresholdKind threshold_kind = ThresholdKind::NormalizedGap;
  std::vector<double> thresholds;
  long max_iters = 100000;
  double reference_gap = 1e-10;
  bool timing = false;         // off => elapsed column written as 0
  std::string instance_path;   // optional override of the generation grid
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

struct SummaryRow {
  std::string utility, distribution, budget_mode;
  int n = 0, m = 0;
  std::string solver;
  std::string threshold_kind;
  double threshold = 0;
  double mean_iters = 0, stderr_iters = 0;
  double mean_projections = 0, stderr_projections = 0;
};

/// Single solver run used by the harness; `ref_prices` feeds the
/// rel_price_error trace column and the PriceError criterion.
SolverReport run_named_solver(const std::string& name, const MarketInstance& inst,
                              const EquilibriumBounds& bounds,
                              const TerminationSpec& term);

/// Full protocol: per grid cell, generate (or load) instances, solve the
/// reference once, run every solver to the tightest threshold, write one
/// trace CSV per (instance, solver) into out_dir, and aggregate
/// counts-to-threshold over repeats. Deterministic given the config.
std::vector<SummaryRow> run_experiment(const ExperimentConfig& config,
                                       const std::string& out_dir);

/// Writes summary.csv plus plot_summary.py (matplotlib, mean +/- stderr vs n,
/// one panel per threshold).
void emit_report(const std::vector<SummaryRow>& summary, const std::string& out_dir);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace,
                     std::uint64_t seed);

}  // namespace fisher
