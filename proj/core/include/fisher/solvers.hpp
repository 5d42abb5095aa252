#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "fisher/market.hpp"
#include "fisher/metrics.hpp"

namespace fisher {

struct Eval {
  double value = 0;
  Eigen::VectorXd grad;
};

using Objective = std::function<Eval(const Eigen::VectorXd&)>;
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Backtracking linesearch parameters; defaults follow the benchmark setup
/// (alpha = 1.02, beta = 0.8, Gamma = 100 L ||A||^2 supplied by the caller).
struct LinesearchParams {
  double alpha = 1.02;
  double beta = 0.8;
  double gamma_max = 1.0;
  /// Hard cap on backtracks per call; <= 0 means "derive from theory" when
  /// the Lipschitz bound is known (4x the theoretical cap), else 200.
  int max_backtracks = 0;
};

/// Stop at the first satisfied criterion; unset criteria are disabled.
struct TerminationSpec {
  long max_iters = 100000;
  double objective_tol = std::numeric_limits<double>::quiet_NaN();
  double gap_threshold = std::numeric_limits<double>::quiet_NaN();  // on dgap/n
  double price_eta = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd ref_prices;
  bool record_timing = false;
};

struct TraceRow {
  long iteration = 0;
  double objective = 0;
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  double normalized_gap = std::numeric_limits<double>::quiet_NaN();
  double rel_price_error = std::numeric_limits<double>::quiet_NaN();
  int backtracks = 0;
  long cumulative_projections = 0;
  long long elapsed_ns = 0;
};

enum class StopReason { MaxIters, ObjectiveTol, GapThreshold, PriceError };

struct SolverReport {
  Eigen::VectorXd final_iterate;
  long iterations = 0;
  long projections_or_prox_count = 0;
  std::vector<TraceRow> trace;
  StopReason termination_reason = StopReason::MaxIters;
};

/// A first-order problem in flattened-iterate form. Gap and price hooks are
/// optional; `lipschitz` is the L ||A||^2 bound used for default stepsizes.
struct FirstOrderProblem {
  Objective objective;
  Projector project;
  Eigen::VectorXd x0;
  std::function<double(const Eigen::VectorXd&)> duality_gap;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> prices;
  double lipschitz = 1.0;
  int n = 1;  // buyer count, normalizes the duality gap
};

/// Projected gradient with a fixed stepsize.
SolverReport pg_fixed(const FirstOrderProblem& problem, double gamma,
                      const TerminationSpec& term);

struct LinesearchResult {
  Eigen::VectorXd x_next;
  double gamma = 0;
  int backtracks = 0;
};

/// One linesearch-driven projected-gradient step: the candidate stepsize is
/// min{alpha gamma_prev, Gamma} after a backtrack-free iteration, else
/// gamma_prev, then backtracks by beta until the sufficient-decrease test
/// holds. Throws BacktrackOverflow past the configured cap.
LinesearchResult linesearch_step(const Objective& objective, const Projector& project,
                                 const Eigen::VectorXd& x, double gamma_prev,
                                 int k_prev, const LinesearchParams& params);

/// Projected gradient driven by linesearch_step; the projection counter sums
/// (k_t + 1) per iteration.
SolverReport pg_linesearch(const FirstOrderProblem& problem,
                           const LinesearchParams& params,
                           const TerminationSpec& term);

enum class FwStepRule { Static, ExactLine };

using MatrixObjective = std::function<Eval(const Eigen::MatrixXd&)>;

/// One Frank-Wolfe step on the product of item simplexes: the linear
/// minimization oracle picks, per item, the unit vector of the buyer with
/// the smallest gradient entry (ties to the smallest index).
Eigen::MatrixXd fw_step(const MatrixObjective& objective, const Eigen::MatrixXd& x,
                        long t, FwStepRule rule);

SolverReport fw_solve(const MatrixObjective& objective, const Eigen::MatrixXd& x0,
                      FwStepRule rule, const TerminationSpec& term,
                      const std::function<double(const Eigen::MatrixXd&)>& gap_fn,
                      int n);

/// One QL proportional-response step (mirror descent with unit stepsize on
/// the bid-space program). Preserves sum_j b_ij + delta_i = B_i.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> md_step_ql(const Eigen::MatrixXd& b,
                                                       const Eigen::VectorXd& delta,
                                                       const MarketInstance& inst);

/// One linear proportional-response step; preserves sum_j b_ij = B_i.
Eigen::MatrixXd pr_step_linear(const Eigen::MatrixXd& b, const MarketInstance& inst);

/// Theorem-style starts: uniform bids over the valued items (+ leftover slot
/// for QL).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ql_pr_initial(const MarketInstance& inst);
Eigen::MatrixXd linear_pr_initial(const MarketInstance& inst);

/// Closed-form Cobb-Douglas equilibrium.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> cobb_douglas_solve(
    const MarketInstance& inst);

// Flattened-problem builders (column-major flattening of the natural block).
FirstOrderProblem make_linear_problem(const MarketInstance& inst,
                                      const EquilibriumBounds& bounds);
FirstOrderProblem make_ql_problem(const MarketInstance& inst,
                                  const EquilibriumBounds& bounds);
FirstOrderProblem make_leontief_problem(const MarketInstance& inst,
                                        const EquilibriumBounds& bounds);

LinesearchParams default_linesearch_params(const FirstOrderProblem& problem);

/// High-accuracy self-reference: runs PG with linesearch to the target
/// normalized duality gap (default 1e-10), then a fixed number of polish
/// iterations, and packages prices / allocations / utilities.
EquilibriumCandidate reference_solve(const MarketInstance& inst, double target_gap);

struct ReferenceDidNotConverge : DidNotConverge {
  EquilibriumCandidate best;
  ReferenceDidNotConverge(const std::string& what, EquilibriumCandidate c)
      : DidNotConverge(what), best(std::move(c)) {}
};

// Candidate assembly from a converged flattened iterate (shared with the
// experiment harness, which reports prices along any solver's trajectory).
EquilibriumCandidate candidate_from_linear_iterate(const Eigen::VectorXd& x,
                                                   const MarketInstance& inst,
                                                   const EquilibriumBounds& bounds);
EquilibriumCandidate candidate_from_ql_iterate(const Eigen::VectorXd& bd,
                                               const MarketInstance& inst);
EquilibriumCandidate candidate_from_leontief_iterate(const Eigen::VectorXd& p,
                                                     const MarketInstance& inst);

}  // namespace fisher
