#include "fisher/bench.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fisher/errors.hpp"
#include "fisher/metrics.hpp"
#include "fisher/objectives.hpp"
#include "fisher/text_io.hpp"

namespace fisher {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0;
  const double mu = mean_of(xs);
  double ss = 0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / (xs.size() - 1)) / std::sqrt(double(xs.size()));
}

std::string csv_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

std::string budget_mode_name(const BudgetMode& b) {
  return b.kind == BudgetMode::Kind::Unit ? "unit" : "random_shifted";
}

/// Proportional-response driver for linear and QL markets; the trace mirrors
/// the projected-gradient drivers (prox steps count one per iteration).
SolverReport pr_solve(const MarketInstance& inst, const TerminationSpec& term) {
  const bool ql = inst.utility_class == UtilityClass::Quasilinear;
  Eigen::MatrixXd b;
  Eigen::VectorXd delta;
  if (ql) {
    auto init = ql_pr_initial(inst);
    b = std::move(init.first);
    delta = std::move(init.second);
  } else {
    b = linear_pr_initial(inst);
  }

  SolverReport rep;
  for (long t = 0;; ++t) {
    TraceRow r;
    r.iteration = t;
    r.cumulative_projections = t;
    const Eigen::VectorXd p = b.colwise().sum();
    if (ql) {
      r.objective = ql_shmyrev_raw_value(b, inst);
      r.duality_gap = duality_gap_ql(b, delta, inst);
    } else {
      r.objective = shmyrev_linear_value(b, inst);
      EquilibriumCandidate c;
      c.bids = b;
      c.prices = p;
      r.duality_gap = duality_gap_linear(c, inst);
    }
    r.normalized_gap = r.duality_gap / inst.n;
    if (term.ref_prices.size() > 0)
      r.rel_price_error = relative_price_error(p, term.ref_prices);
    rep.trace.push_back(r);

    if (r.objective <= term.objective_tol) {
      rep.termination_reason = StopReason::ObjectiveTol;
      break;
    }
    if (r.normalized_gap <= term.gap_threshold) {
      rep.termination_reason = StopReason::GapThreshold;
      break;
    }
    if (r.rel_price_error <= term.price_eta) {
      rep.termination_reason = StopReason::PriceError;
      break;
    }
    if (t >= term.max_iters) {
      rep.termination_reason = StopReason::MaxIters;
      break;
    }
    if (ql) {
      auto next = md_step_ql(b, delta, inst);
      b = std::move(next.first);
      delta = std::move(next.second);
    } else {
      b = pr_step_linear(b, inst);
    }
  }
  rep.iterations = static_cast<long>(rep.trace.size()) - 1;
  rep.projections_or_prox_count = rep.iterations;
  Eigen::MatrixXd bd(inst.n, inst.m + (ql ? 1 : 0));
  if (ql) {
    bd.leftCols(inst.m) = b;
    bd.col(inst.m) = delta;
  } else {
    bd = b;
  }
  rep.final_iterate = Eigen::Map<const Eigen::VectorXd>(bd.data(), bd.size());
  return rep;
}

SolverReport fw_solve_linear(const MarketInstance& inst,
                             const EquilibriumBounds& bounds, FwStepRule rule,
                             const TerminationSpec& term) {
  MatrixObjective objective = [&inst, &bounds](const Eigen::MatrixXd& x) {
    ObjectiveEval e = eg_linear_eval(x, inst, bounds);
    return Eval{e.value,
                Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), e.gradient.size())};
  };
  const double lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;
  auto gap_fn = [&inst, &bounds, lipschitz](const Eigen::MatrixXd& x) {
    EquilibriumCandidate c;
    c.allocation = x;
    c.prices = recover_prices_linear(x, 1.0 / lipschitz, inst, bounds);
    return duality_gap_linear(c, inst);
  };
  const Eigen::MatrixXd x0 =
      Eigen::MatrixXd::Constant(inst.n, inst.m, 1.0 / inst.n);
  return fw_solve(objective, x0, rule, term, gap_fn, inst.n);
}

long long find_first_index(const std::vector<TraceRow>& trace, ThresholdKind kind,
                           double threshold) {
  for (size_t t = 0; t < trace.size(); ++t) {
    const double v = kind == ThresholdKind::PriceError ? trace[t].rel_price_error
                                                       : trace[t].normalized_gap;
    if (v <= threshold) return static_cast<long long>(t);
  }
  return -1;
}

}  // namespace

std::string to_string(ThresholdKind k) {
  return k == ThresholdKind::PriceError ? "price_error" : "gap";
}

ThresholdKind threshold_kind_from_string(const std::string& s) {
  if (s == "price_error") return ThresholdKind::PriceError;
  if (s == "gap") return ThresholdKind::NormalizedGap;
  throw ParseError("unknown threshold kind: '" + s + "'");
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  cfg.sizes.clear();
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line without '=': '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    const auto fields = split_ws(value);
    if (key == "utility") {
      cfg.utility = utility_class_from_string(value);
    } else if (key == "distribution") {
      cfg.distribution = distribution_from_string(value);
    } else if (key == "budget_mode") {
      if (value == "unit")
        cfg.budget_mode = BudgetMode::unit();
      else if (value == "random_shifted")
        cfg.budget_mode.kind = BudgetMode::Kind::RandomShifted;
      else
        throw ParseError("unknown budget mode: '" + value + "'");
    } else if (key == "budget_scale") {
      cfg.budget_mode.scale = parse_double(value);
    } else if (key == "budget_offset") {
      cfg.budget_mode.offset = parse_double(value);
    } else if (key == "sizes") {
      for (auto f : fields) cfg.sizes.push_back(static_cast<int>(parse_int(f)));
    } else if (key == "m_factor") {
      cfg.m_factor = static_cast<int>(parse_int(value));
    } else if (key == "repeats") {
      cfg.repeats = static_cast<int>(parse_int(value));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "solvers") {
      for (auto f : fields) cfg.solvers.emplace_back(f);
    } else if (key == "threshold_kind") {
      cfg.threshold_kind = threshold_kind_from_string(value);
    } else if (key == "thresholds") {
      for (auto f : fields) cfg.thresholds.push_back(parse_double(f));
    } else if (key == "max_iters") {
      cfg.max_iters = parse_int(value);
    } else if (key == "reference_gap") {
      cfg.reference_gap = parse_double(value);
    } else if (key == "timing") {
      if (value == "on")
        cfg.timing = true;
      else if (value == "off")
        cfg.timing = false;
      else
        throw ParseError("timing must be on or off, got '" + value + "'");
    } else if (key == "instance") {
      cfg.instance_path = value;
    } else {
      throw ParseError("unknown config key: '" + key + "'");
    }
  }
  if (cfg.sizes.empty()) cfg.sizes = {50, 100, 150, 200};
  if (cfg.repeats < 1) throw ParseError("repeats must be >= 1");
  if (cfg.solvers.empty()) throw ParseError("config names no solvers");
  if (cfg.thresholds.empty()) throw ParseError("config names no thresholds");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  return parse_config(is);
}

SolverReport run_named_solver(const std::string& name, const MarketInstance& inst,
                              const EquilibriumBounds& bounds,
                              const TerminationSpec& term) {
  const UtilityClass cls = inst.utility_class;
  auto unsupported = [&]() -> SolverReport {
    throw SolverUnsupported("solver '" + name + "' does not support " +
                            to_string(cls) + " utilities");
  };
  auto make_problem = [&]() {
    switch (cls) {
      case UtilityClass::Linear:
        return make_linear_problem(inst, bounds);
      case UtilityClass::Quasilinear:
        return make_ql_problem(inst, bounds);
      case UtilityClass::Leontief:
        return make_leontief_problem(inst, bounds);
      default:
        throw SolverUnsupported(
            "iterative solvers do not apply to Cobb-Douglas markets");
    }
  };

  if (name == "pg") {
    FirstOrderProblem prob = make_problem();
    return pg_fixed(prob, 1.0 / prob.lipschitz, term);
  }
  if (name == "pgls") {
    FirstOrderProblem prob = make_problem();
    return pg_linesearch(prob, default_linesearch_params(prob), term);
  }
  if (name == "fw" || name == "fw_exact") {
    if (cls != UtilityClass::Linear) return unsupported();
    return fw_solve_linear(inst, bounds,
                           name == "fw" ? FwStepRule::Static : FwStepRule::ExactLine,
                           term);
  }
  if (name == "pr" || name == "md") {
    if (cls != UtilityClass::Linear && cls != UtilityClass::Quasilinear)
      return unsupported();
    return pr_solve(inst, term);
  }
  throw SolverUnsupported("unknown solver: '" + name + "'");
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace,
                     std::uint64_t seed) {
  os << "# seed=" << seed << "\n";
  os << "iteration,objective_value,duality_gap,normalized_gap,rel_price_error,"
        "backtracks_this_iter,cumulative_projections,elapsed_nanoseconds\n";
  for (const TraceRow& r : trace) {
    os << r.iteration << ',' << csv_double(r.objective) << ','
       << csv_double(r.duality_gap) << ',' << csv_double(r.normalized_gap) << ','
       << csv_double(r.rel_price_error) << ',' << r.backtracks << ','
       << r.cumulative_projections << ',' << r.elapsed_ns << "\n";
  }
}

std::vector<SummaryRow> run_experiment(const ExperimentConfig& config,
                                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  double tightest = config.thresholds.front();
  for (double t : config.thresholds) tightest = std::min(tightest, t);

  // cells[(size, solver, threshold)] -> per-repeat counts
  struct Cell {
    std::vector<double> iters, projections;
  };
  std::vector<SummaryRow> summary;

  // A fixed instance collapses the size grid to a single cell.
  const std::vector<int> sizes =
      config.instance_path.empty() ? config.sizes : std::vector<int>{0};

  std::uint64_t instance_counter = 0;
  for (int n : sizes) {
    const int m = n * config.m_factor;
    int real_n = n, real_m = m;
    std::vector<Cell> cells(config.solvers.size() * config.thresholds.size());

    for (int rep = 0; rep < config.repeats; ++rep) {
      MarketInstance inst;
      std::uint64_t seed = config.seed + instance_counter;
      ++instance_counter;
      if (!config.instance_path.empty()) {
        inst = load_instance(config.instance_path);
      } else {
        GenerationSpec spec;
        spec.distribution = config.distribution;
        spec.n = n;
        spec.m = m;
        spec.utility_class = config.utility;
        spec.budget_mode = config.budget_mode;
        spec.seed = seed;
        inst = generate_instance(spec);
      }
      validate_instance(inst);
      real_n = inst.n;
      real_m = inst.m;
      const EquilibriumBounds bounds = equilibrium_bounds(inst);
      const EquilibriumCandidate reference =
          reference_solve(inst, config.reference_gap);

      TerminationSpec term;
      term.max_iters = config.max_iters;
      term.record_timing = config.timing;
      term.ref_prices = reference.prices;
      if (config.threshold_kind == ThresholdKind::PriceError)
        term.price_eta = tightest;
      else
        term.gap_threshold = tightest;

      for (size_t s = 0; s < config.solvers.size(); ++s) {
        const SolverReport rep_out =
            run_named_solver(config.solvers[s], inst, bounds, term);

        std::ostringstream name;
        name << "trace_" << to_string(inst.utility_class) << "_" << inst.n << "x"
             << inst.m << "_r" << rep << "_" << config.solvers[s] << ".csv";
        std::ofstream os(fs::path(out_dir) / name.str(), std::ios::binary);
        if (!os) throw IoError("cannot write trace file: " + name.str());
        write_trace_csv(os, rep_out.trace, seed);

        for (size_t h = 0; h < config.thresholds.size(); ++h) {
          const long long idx = find_first_index(rep_out.trace, config.threshold_kind,
                                                 config.thresholds[h]);
          Cell& cell = cells[s * config.thresholds.size() + h];
          if (idx >= 0) {
            cell.iters.push_back(double(rep_out.trace[idx].iteration));
            cell.projections.push_back(
                double(rep_out.trace[idx].cumulative_projections));
          } else {
            // Censored at the run length: the threshold was not reached.
            cell.iters.push_back(double(rep_out.trace.back().iteration));
            cell.projections.push_back(
                double(rep_out.trace.back().cumulative_projections));
          }
        }
      }
    }

    for (size_t s = 0; s < config.solvers.size(); ++s) {
      for (size_t h = 0; h < config.thresholds.size(); ++h) {
        const Cell& cell = cells[s * config.thresholds.size() + h];
        SummaryRow row;
        row.utility = to_string(config.utility);
        row.distribution = to_string(config.distribution);
        row.budget_mode = budget_mode_name(config.budget_mode);
        row.n = real_n;
        row.m = real_m;
        row.solver = config.solvers[s];
        row.threshold_kind = to_string(config.threshold_kind);
        row.threshold = config.thresholds[h];
        row.mean_iters = cell.iters.empty() ? kNaN : mean_of(cell.iters);
        row.stderr_iters = stderr_of(cell.iters);
        row.mean_projections =
            cell.projections.empty() ? kNaN : mean_of(cell.projections);
        row.stderr_projections = stderr_of(cell.projections);
        summary.push_back(row);
      }
    }
  }
  return summary;
}

void emit_report(const std::vector<SummaryRow>& summary, const std::string& out_dir) {
  if (summary.empty()) throw EmptyInput("emit_report: empty summary");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  std::ofstream os(fs::path(out_dir) / "summary.csv", std::ios::binary);
  if (!os) throw IoError("cannot write summary.csv");
  os << "utility,distribution,budget_mode,n,m,solver,threshold_kind,threshold,"
        "mean_iters,stderr_iters,mean_projections,stderr_projections\n";
  for (const SummaryRow& r : summary) {
    os << r.utility << ',' << r.distribution << ',' << r.budget_mode << ',' << r.n
       << ',' << r.m << ',' << r.solver << ',' << r.threshold_kind << ','
       << csv_double(r.threshold) << ',' << csv_double(r.mean_iters) << ','
       << csv_double(r.stderr_iters) << ',' << csv_double(r.mean_projections) << ','
       << csv_double(r.stderr_projections) << "\n";
  }
  os.close();

  std::ofstream py(fs::path(out_dir) / "plot_summary.py", std::ios::binary);
  if (!py) throw IoError("cannot write plot_summary.py");
  py << R"PY(#!/usr/bin/env python3
"""Plot mean iteration/projection counts vs market size from summary.csv."""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "summary.csv"
rows = list(csv.DictReader(open(path, newline="", encoding="utf-8")))

panels = defaultdict(lambda: defaultdict(list))
for r in rows:
    key = (r["utility"], r["threshold_kind"], r["threshold"])
    panels[key][r["solver"]].append(
        (int(r["n"]), float(r["mean_iters"]), float(r["stderr_iters"]),
         float(r["mean_projections"]), float(r["stderr_projections"]))
    )

for (utility, kind, threshold), per_solver in sorted(panels.items()):
    fig, ax = plt.subplots(figsize=(5, 4))
    for solver, pts in sorted(per_solver.items()):
        pts.sort()
        ns = [p[0] for p in pts]
        # Linesearch methods are compared by projection counts, the rest by
        # iterations.
        use_proj = solver == "pgls"
        ys = [p[3] if use_proj else p[1] for p in pts]
        es = [p[4] if use_proj else p[2] for p in pts]
        label = f"{solver} ({'projections' if use_proj else 'iterations'})"
        ax.errorbar(ns, ys, yerr=es, marker="o", capsize=3, label=label)
    ax.set_xlabel("n")
    ax.set_ylabel("count to threshold")
    ax.set_title(f"{utility}, {kind} <= {threshold}")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    out = f"panel_{utility}_{kind}_{threshold}.png"
    fig.savefig(out, dpi=150)
    print(out)
)PY";
}

}  // namespace fisher
