#include "fisher/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "fisher/errors.hpp"
#include "fisher/objectives.hpp"
#include "fisher/projections.hpp"

namespace fisher {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int rows, int cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

/// Shared trace/termination bookkeeping for the iterative solvers.
struct Monitor {
  const TerminationSpec& term;
  std::function<double(const Eigen::VectorXd&)> gap_fn;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> price_fn;
  int n = 1;
  Clock::time_point start = Clock::now();

  TraceRow record(long t, double value, const Eigen::VectorXd& x, int backtracks,
                  long projections) const {
    TraceRow r;
    r.iteration = t;
    r.objective = value;
    r.backtracks = backtracks;
    r.cumulative_projections = projections;
    if (gap_fn) {
      r.duality_gap = gap_fn(x);
      r.normalized_gap = r.duality_gap / n;
    }
    if (price_fn && term.ref_prices.size() > 0)
      r.rel_price_error = relative_price_error(price_fn(x), term.ref_prices);
    if (term.record_timing)
      r.elapsed_ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start)
              .count();
    return r;
  }

  // NaN thresholds (and NaN measurements) never satisfy a criterion.
  bool stop(const TraceRow& r, StopReason* reason) const {
    if (r.objective <= term.objective_tol) {
      *reason = StopReason::ObjectiveTol;
      return true;
    }
    if (r.normalized_gap <= term.gap_threshold) {
      *reason = StopReason::GapThreshold;
      return true;
    }
    if (r.rel_price_error <= term.price_eta) {
      *reason = StopReason::PriceError;
      return true;
    }
    return false;
  }
};

struct StepOutcome {
  Eigen::VectorXd x_next;
  double gamma = 0;
  int backtracks = 0;
};

int backtrack_cap(const LinesearchParams& params) {
  return params.max_backtracks > 0 ? params.max_backtracks : 200;
}

/// Algorithm core shared by linesearch_step and pg_linesearch; takes the
/// already-computed evaluation at x so the driver loop evaluates once per
/// iteration.
StepOutcome linesearch_from_eval(const Objective& objective, const Projector& project,
                                 const Eigen::VectorXd& x, const Eval& at_x,
                                 double gamma_prev, int k_prev,
                                 const LinesearchParams& params) {
  double gamma = k_prev == 0 ? std::min(params.alpha * gamma_prev, params.gamma_max)
                             : gamma_prev;
  const int cap = backtrack_cap(params);
  for (int k = 0;; ++k) {
    Eigen::VectorXd xk = project(x - gamma * at_x.grad);
    Eigen::VectorXd d = xk - x;
    const double rhs =
        at_x.value + at_x.grad.dot(d) + d.squaredNorm() / (2.0 * gamma);
    // just above the representation rounding of the two objective values; a
    // larger slack lets the iterate wander along flat directions of the
    // objective and leaves the duality gap stuck on a noise plateau well
    // above the achievable floor
    const double slack =
        2.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(at_x.value));
    if (objective(xk).value <= rhs + slack) return {std::move(xk), gamma, k};
    if (k + 1 > cap)
      throw BacktrackOverflow("linesearch exceeded " + std::to_string(cap) +
                              " backtracks; gradient or stepsize cap is suspect");
    gamma *= params.beta;
  }
}

double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

SolverReport pg_fixed(const FirstOrderProblem& problem, double gamma,
                      const TerminationSpec& term) {
  Monitor mon{term, problem.duality_gap, problem.prices, problem.n};
  SolverReport rep;
  Eigen::VectorXd x = problem.x0;
  for (long t = 0;; ++t) {
    const Eval e = problem.objective(x);
    if (!std::isfinite(e.value))
      throw NonFiniteObjective("pg_fixed: objective is not finite at iteration " +
                               std::to_string(t));
    TraceRow r = mon.record(t, e.value, x, 0, rep.projections_or_prox_count);
    rep.trace.push_back(r);
    StopReason why;
    if (mon.stop(r, &why)) {
      rep.termination_reason = why;
      break;
    }
    if (t >= term.max_iters) {
      rep.termination_reason = StopReason::MaxIters;
      break;
    }
    x = problem.project(x - gamma * e.grad);
    ++rep.projections_or_prox_count;
  }
  rep.final_iterate = std::move(x);
  rep.iterations = static_cast<long>(rep.trace.size()) - 1;
  return rep;
}

LinesearchResult linesearch_step(const Objective& objective, const Projector& project,
                                 const Eigen::VectorXd& x, double gamma_prev,
                                 int k_prev, const LinesearchParams& params) {
  StepOutcome s = linesearch_from_eval(objective, project, x, objective(x),
                                       gamma_prev, k_prev, params);
  return {std::move(s.x_next), s.gamma, s.backtracks};
}

SolverReport pg_linesearch(const FirstOrderProblem& problem,
                           const LinesearchParams& params,
                           const TerminationSpec& term) {
  Monitor mon{term, problem.duality_gap, problem.prices, problem.n};
  SolverReport rep;
  Eigen::VectorXd x = problem.x0;
  double gamma = params.gamma_max;
  int k_prev = 0;
  int last_backtracks = 0;
  for (long t = 0;; ++t) {
    const Eval e = problem.objective(x);
    if (!std::isfinite(e.value))
      throw NonFiniteObjective(
          "pg_linesearch: objective is not finite at iteration " +
          std::to_string(t));
    TraceRow r = mon.record(t, e.value, x, last_backtracks,
                            rep.projections_or_prox_count);
    rep.trace.push_back(r);
    StopReason why;
    if (mon.stop(r, &why)) {
      rep.termination_reason = why;
      break;
    }
    if (t >= term.max_iters) {
      rep.termination_reason = StopReason::MaxIters;
      break;
    }
    StepOutcome s = linesearch_from_eval(problem.objective, problem.project, x, e,
                                         gamma, k_prev, params);
    x = std::move(s.x_next);
    gamma = s.gamma;
    k_prev = s.backtracks;
    last_backtracks = s.backtracks;
    rep.projections_or_prox_count += s.backtracks + 1;
  }
  rep.final_iterate = std::move(x);
  rep.iterations = static_cast<long>(rep.trace.size()) - 1;
  return rep;
}

Eigen::MatrixXd fw_step(const MatrixObjective& objective, const Eigen::MatrixXd& x,
                        long t, FwStepRule rule) {
  const Eval e = objective(x);
  Eigen::Map<const Eigen::MatrixXd> grad(e.grad.data(), x.rows(), x.cols());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    int best = 0;
    for (int i = 1; i < x.rows(); ++i)
      if (grad(i, j) < grad(best, j)) best = i;
    w(best, j) = 1.0;
  }
  double gamma;
  if (rule == FwStepRule::Static) {
    gamma = 2.0 / (2.0 + static_cast<double>(t));
  } else {
    const Eigen::MatrixXd d = w - x;
    gamma = golden_section_min(
        [&](double g) { return objective(x + g * d).value; }, 0.0, 1.0, 1e-12);
  }
  return x + gamma * (w - x);
}

SolverReport fw_solve(const MatrixObjective& objective, const Eigen::MatrixXd& x0,
                      FwStepRule rule, const TerminationSpec& term,
                      const std::function<double(const Eigen::MatrixXd&)>& gap_fn,
                      int n) {
  Monitor mon{term, nullptr, nullptr, n};
  if (gap_fn) {
    const int rows = static_cast<int>(x0.rows());
    const int cols = static_cast<int>(x0.cols());
    mon.gap_fn = [gap_fn, rows, cols](const Eigen::VectorXd& v) {
      return gap_fn(unflatten(v, rows, cols));
    };
  }
  SolverReport rep;
  Eigen::MatrixXd x = x0;
  for (long t = 0;; ++t) {
    const Eval e = objective(x);
    if (!std::isfinite(e.value))
      throw NonFiniteObjective("fw_solve: objective is not finite at iteration " +
                               std::to_string(t));
    TraceRow r = mon.record(t, e.value, flatten(x), 0, t);
    rep.trace.push_back(r);
    StopReason why;
    if (mon.stop(r, &why)) {
      rep.termination_reason = why;
      break;
    }
    if (t >= term.max_iters) {
      rep.termination_reason = StopReason::MaxIters;
      break;
    }
    x = fw_step(objective, x, t, rule);
  }
  rep.final_iterate = flatten(x);
  rep.iterations = static_cast<long>(rep.trace.size()) - 1;
  rep.projections_or_prox_count = rep.iterations;
  return rep;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> md_step_ql(const Eigen::MatrixXd& b,
                                                       const Eigen::VectorXd& delta,
                                                       const MarketInstance& inst) {
  if (b.rows() != inst.n || b.cols() != inst.m || delta.size() != inst.n)
    throw DimensionMismatch("md_step_ql: bid/leftover shape");
  const Eigen::VectorXd p = b.colwise().sum();
  for (int j = 0; j < inst.m; ++j)
    if (p[j] <= 0.0) throw ZeroPrice(j, "md_step_ql: item " + std::to_string(j) +
                                            " has nonpositive price");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each(
      [&](int i, int j, double v) { u[i] += v * b(i, j) / p[j]; });
  Eigen::MatrixXd b_next = Eigen::MatrixXd::Zero(inst.n, inst.m);
  Eigen::VectorXd delta_next(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    const double denom = u[i] + delta[i];
    if (denom <= 0.0)
      throw ZeroUtility(i, "md_step_ql: buyer " + std::to_string(i) +
                               " has zero utility and zero leftover");
    delta_next[i] = inst.budgets[i] * delta[i] / denom;
  }
  inst.values.for_each([&](int i, int j, double v) {
    b_next(i, j) = inst.budgets[i] * v * (b(i, j) / p[j]) / (u[i] + delta[i]);
  });
  return {std::move(b_next), std::move(delta_next)};
}

Eigen::MatrixXd pr_step_linear(const Eigen::MatrixXd& b, const MarketInstance& inst) {
  if (b.rows() != inst.n || b.cols() != inst.m)
    throw DimensionMismatch("pr_step_linear: bid shape");
  const Eigen::VectorXd p = b.colwise().sum();
  for (int j = 0; j < inst.m; ++j)
    if (p[j] <= 0.0)
      throw ZeroPrice(j, "pr_step_linear: item " + std::to_string(j) +
                             " has nonpositive price");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each(
      [&](int i, int j, double v) { u[i] += v * b(i, j) / p[j]; });
  for (int i = 0; i < inst.n; ++i)
    if (u[i] <= 0.0)
      throw ZeroUtility(i, "pr_step_linear: buyer " + std::to_string(i) +
                               " has zero utility");
  Eigen::MatrixXd b_next = Eigen::MatrixXd::Zero(inst.n, inst.m);
  inst.values.for_each([&](int i, int j, double v) {
    b_next(i, j) = inst.budgets[i] * v * (b(i, j) / p[j]) / u[i];
  });
  return b_next;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ql_pr_initial(const MarketInstance& inst) {
  Eigen::MatrixXd b(inst.n, inst.m);
  Eigen::VectorXd delta(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    const double share = inst.budgets[i] / (inst.m + 1);
    b.row(i).setConstant(share);
    delta[i] = share;
  }
  return {std::move(b), std::move(delta)};
}

Eigen::MatrixXd linear_pr_initial(const MarketInstance& inst) {
  Eigen::MatrixXd b(inst.n, inst.m);
  for (int i = 0; i < inst.n; ++i)
    b.row(i).setConstant(inst.budgets[i] / inst.m);
  return b;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> cobb_douglas_solve(
    const MarketInstance& inst) {
  if (inst.utility_class != UtilityClass::CobbDouglas)
    throw WrongUtilityClass("cobb_douglas_solve: instance is " +
                            to_string(inst.utility_class));
  Eigen::VectorXd p = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each(
      [&](int i, int j, double lam) { p[j] += inst.budgets[i] * lam; });
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(inst.n, inst.m);
  inst.values.for_each([&](int i, int j, double lam) {
    if (p[j] > 0.0) x(i, j) = inst.budgets[i] * lam / p[j];
  });
  return {std::move(x), std::move(p)};
}

FirstOrderProblem make_linear_problem(const MarketInstance& inst,
                                      const EquilibriumBounds& bounds) {
  auto pi = std::make_shared<const MarketInstance>(inst);
  auto pb = std::make_shared<const EquilibriumBounds>(bounds);
  const int n = inst.n, m = inst.m;
  FirstOrderProblem prob;
  prob.n = n;
  prob.lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;
  prob.x0 = flatten(Eigen::MatrixXd::Constant(n, m, 1.0 / n));
  prob.objective = [pi, pb, n, m](const Eigen::VectorXd& xf) {
    ObjectiveEval e = eg_linear_eval(unflatten(xf, n, m), *pi, *pb);
    return Eval{e.value, flatten(e.gradient)};
  };
  prob.project = [n, m](const Eigen::VectorXd& xf) {
    return flatten(project_product_simplexes(unflatten(xf, n, m)).first);
  };
  const double gamma0 = 1.0 / prob.lipschitz;
  prob.prices = [pi, pb, n, m, gamma0](const Eigen::VectorXd& xf) {
    return recover_prices_linear(unflatten(xf, n, m), gamma0, *pi, *pb);
  };
  prob.duality_gap = [pi, pb, n, m, gamma0](const Eigen::VectorXd& xf) {
    EquilibriumCandidate c;
    c.allocation = unflatten(xf, n, m);
    c.prices = recover_prices_linear(*c.allocation, gamma0, *pi, *pb);
    return duality_gap_linear(c, *pi);
  };
  return prob;
}

FirstOrderProblem make_ql_problem(const MarketInstance& inst,
                                  const EquilibriumBounds& bounds) {
  auto pi = std::make_shared<const MarketInstance>(inst);
  auto pb = std::make_shared<const EquilibriumBounds>(bounds);
  const int n = inst.n, m = inst.m;
  FirstOrderProblem prob;
  prob.n = n;
  prob.lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;

  // Feasible start: budget spread over a buyer's valued items plus the
  // leftover slot.
  Eigen::MatrixXd start = Eigen::MatrixXd::Zero(n, m + 1);
  for (int i = 0; i < n; ++i) {
    const double share = inst.budgets[i] / (inst.values.row_nnz(i) + 1);
    inst.values.for_each_in_row(i, [&](int j, double) { start(i, j) = share; });
    start(i, m) = share;
  }
  prob.x0 = flatten(start);

  prob.objective = [pi, pb, n, m](const Eigen::VectorXd& bdf) {
    const Eigen::MatrixXd bd = unflatten(bdf, n, m + 1);
    ObjectiveEval e = ql_shmyrev_eval(bd.leftCols(m), bd.col(m), *pi, *pb);
    return Eval{e.value, flatten(e.gradient)};
  };
  // Row-wise projection onto B_i * simplex over {valued items} + leftover;
  // bids on unvalued items stay identically zero.
  prob.project = [pi, n, m](const Eigen::VectorXd& bdf) {
    const Eigen::MatrixXd bd = unflatten(bdf, n, m + 1);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, m + 1);
    for (int i = 0; i < n; ++i) {
      const int s = pi->values.row_nnz(i);
      Eigen::VectorXd y(s + 1);
      std::vector<int> idx(s + 1);
      int k = 0;
      pi->values.for_each_in_row(i, [&](int j, double) {
        y[k] = bd(i, j);
        idx[k] = j;
        ++k;
      });
      y[s] = bd(i, m);
      idx[s] = m;
      const Eigen::VectorXd z = project_simplex(y, pi->budgets[i]).point;
      for (int q = 0; q <= s; ++q) out(i, idx[q]) = z[q];
    }
    return flatten(out);
  };
  prob.prices = [n, m](const Eigen::VectorXd& bdf) {
    const Eigen::MatrixXd bd = unflatten(bdf, n, m + 1);
    return Eigen::VectorXd(bd.leftCols(m).colwise().sum());
  };
  prob.duality_gap = [pi, n, m](const Eigen::VectorXd& bdf) {
    const Eigen::MatrixXd bd = unflatten(bdf, n, m + 1);
    return duality_gap_ql(bd.leftCols(m), bd.col(m), *pi);
  };
  return prob;
}

FirstOrderProblem make_leontief_problem(const MarketInstance& inst,
                                        const EquilibriumBounds& bounds) {
  auto pi = std::make_shared<const MarketInstance>(inst);
  auto pb = std::make_shared<const EquilibriumBounds>(bounds);
  const int m = inst.m;
  const double radius = inst.budget_total();
  FirstOrderProblem prob;
  prob.n = inst.n;
  prob.lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;
  prob.x0 = Eigen::VectorXd::Constant(m, radius / m);
  prob.objective = [pi, pb](const Eigen::VectorXd& p) {
    ObjectiveEval e = leontief_dual_eval(p, *pi, *pb);
    return Eval{e.value, flatten(e.gradient)};
  };
  prob.project = [radius](const Eigen::VectorXd& p) {
    return project_simplex(p, radius).point;
  };
  prob.prices = [](const Eigen::VectorXd& p) { return p; };
  prob.duality_gap = [pi](const Eigen::VectorXd& p) {
    return duality_gap_leontief(p, *pi);
  };
  return prob;
}

LinesearchParams default_linesearch_params(const FirstOrderProblem& problem) {
  LinesearchParams params;
  params.gamma_max = 100.0 * problem.lipschitz;
  const double gamma_tilde =
      std::min(params.gamma_max, params.beta / problem.lipschitz);
  const double cap =
      1.0 + std::log(params.gamma_max / gamma_tilde) / std::log(1.0 / params.beta);
  params.max_backtracks = 4 * static_cast<int>(std::ceil(cap));
  return params;
}

EquilibriumCandidate candidate_from_linear_iterate(const Eigen::VectorXd& xf,
                                                   const MarketInstance& inst,
                                                   const EquilibriumBounds& bounds) {
  EquilibriumCandidate c;
  const Eigen::MatrixXd x = unflatten(xf, inst.n, inst.m);
  c.allocation = x;
  const double lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;
  c.prices = recover_prices_linear(x, 1.0 / lipschitz, inst, bounds);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double v) { u[i] += v * x(i, j); });
  c.utilities = std::move(u);
  return c;
}

EquilibriumCandidate candidate_from_ql_iterate(const Eigen::VectorXd& bdf,
                                               const MarketInstance& inst) {
  EquilibriumCandidate c;
  const Eigen::MatrixXd bd = unflatten(bdf, inst.n, inst.m + 1);
  const Eigen::MatrixXd b = bd.leftCols(inst.m);
  const Eigen::VectorXd delta = bd.col(inst.m);
  const Eigen::VectorXd p = b.colwise().sum();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(inst.n, inst.m);
  inst.values.for_each([&](int i, int j, double) {
    if (p[j] > 0.0) x(i, j) = b(i, j) / p[j];
  });
  Eigen::VectorXd u = delta;
  inst.values.for_each([&](int i, int j, double v) { u[i] += v * x(i, j); });
  c.allocation = x;
  c.prices = p;
  c.bids = b;
  c.leftovers = delta;
  c.utilities = std::move(u);
  return c;
}

EquilibriumCandidate candidate_from_leontief_iterate(const Eigen::VectorXd& p,
                                                     const MarketInstance& inst) {
  EquilibriumCandidate c;
  c.prices = p;
  const Eigen::VectorXd u = leontief_utilities_from_prices(p, inst);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(inst.n, inst.m);
  inst.values.for_each([&](int i, int j, double a) { x(i, j) = u[i] * a; });
  c.allocation = std::move(x);
  c.utilities = u;
  return c;
}

EquilibriumCandidate reference_solve(const MarketInstance& inst, double target_gap) {
  validate_instance(inst);
  if (inst.utility_class == UtilityClass::CobbDouglas) {
    auto [x, p] = cobb_douglas_solve(inst);
    EquilibriumCandidate c;
    Eigen::VectorXd logu = Eigen::VectorXd::Zero(inst.n);
    inst.values.for_each([&](int i, int j, double lam) {
      if (x(i, j) > 0.0) logu[i] += lam * std::log(x(i, j));
    });
    c.allocation = std::move(x);
    c.prices = std::move(p);
    c.utilities = logu.array().exp();
    return c;
  }

  const EquilibriumBounds bounds = equilibrium_bounds(inst);
  FirstOrderProblem prob;
  switch (inst.utility_class) {
    case UtilityClass::Linear:
      prob = make_linear_problem(inst, bounds);
      break;
    case UtilityClass::Quasilinear:
      prob = make_ql_problem(inst, bounds);
      break;
    case UtilityClass::Leontief:
      prob = make_leontief_problem(inst, bounds);
      break;
    default:
      throw WrongUtilityClass("reference_solve: unsupported class");
  }
  const LinesearchParams params = default_linesearch_params(prob);

  auto package = [&](const Eigen::VectorXd& x) {
    switch (inst.utility_class) {
      case UtilityClass::Linear:
        return candidate_from_linear_iterate(x, inst, bounds);
      case UtilityClass::Quasilinear:
        return candidate_from_ql_iterate(x, inst);
      default:
        return candidate_from_leontief_iterate(x, inst);
    }
  };

  TerminationSpec term;
  term.max_iters = 500000;
  term.gap_threshold = target_gap;
  SolverReport rep = pg_linesearch(prob, params, term);
  if (rep.termination_reason != StopReason::GapThreshold)
    throw ReferenceDidNotConverge(
        "reference_solve: normalized gap did not reach target within " +
            std::to_string(term.max_iters) + " iterations",
        package(rep.final_iterate));

  // Polish past the gap target, keeping the best-gap iterate seen: with the
  // stepsize allowed to grow between backtracks the trajectory orbits the
  // optimum, so later iterates are not uniformly better than earlier ones.
  Eigen::VectorXd x = rep.final_iterate;
  Eigen::VectorXd best_x = x;
  double best_gap = prob.duality_gap(x);
  double gamma = 1.0 / prob.lipschitz;
  int k_prev = 1;
  for (int t = 0; t < 100; ++t) {
    LinesearchResult step =
        linesearch_step(prob.objective, prob.project, x, gamma, k_prev, params);
    x = std::move(step.x_next);
    gamma = step.gamma;
    k_prev = step.backtracks;
    const double gap = prob.duality_gap(x);
    if (gap < best_gap) {
      best_gap = gap;
      best_x = x;
    }
  }
  return package(best_x);
}

}  // namespace fisher
