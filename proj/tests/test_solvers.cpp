#include <doctest.h>

#include <cmath>

#include "fisher/market.hpp"
#include "fisher/metrics.hpp"
#include "fisher/objectives.hpp"
#include "fisher/solvers.hpp"

using namespace fisher;

namespace {

MarketInstance make_instance(Eigen::MatrixXd v, Eigen::VectorXd b, UtilityClass cls) {
  MarketInstance inst;
  inst.n = static_cast<int>(v.rows());
  inst.m = static_cast<int>(v.cols());
  inst.utility_class = cls;
  inst.values = ValueMatrix::from_dense(std::move(v));
  inst.budgets = std::move(b);
  return inst;
}

MarketInstance symmetric_linear(int n, int m) {
  return make_instance(Eigen::MatrixXd::Ones(n, m), Eigen::VectorXd::Ones(n),
                       UtilityClass::Linear);
}

MarketInstance random_instance(UtilityClass cls, int n, int m, std::uint64_t seed) {
  GenerationSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  spec.utility_class = cls;
  if (cls == UtilityClass::Quasilinear)
    spec.budget_mode = BudgetMode::random_shifted(5.0, 5.0);
  return generate_instance(spec);
}

// f(x) = ||x||^2 / 2, unconstrained: the break test of the linesearch holds
// exactly when gamma <= 1 (gradient Lipschitz constant 1).
Objective quadratic = [](const Eigen::VectorXd& x) {
  return Eval{0.5 * x.squaredNorm(), x};
};
Projector identity = [](const Eigen::VectorXd& x) { return x; };

}  // namespace

TEST_CASE("pg_fixed terminates immediately at the symmetric equilibrium") {
  auto inst = symmetric_linear(3, 3);
  auto bounds = equilibrium_bounds(inst);
  auto prob = make_linear_problem(inst, bounds);
  TerminationSpec term;
  term.gap_threshold = 1e-8;
  auto rep = pg_fixed(prob, 1.0 / prob.lipschitz, term);
  CHECK(rep.iterations == 0);
  CHECK(rep.termination_reason == StopReason::GapThreshold);
}

TEST_CASE("pg_fixed objective is non-increasing") {
  auto inst = random_instance(UtilityClass::Linear, 3, 4, 51);
  auto bounds = equilibrium_bounds(inst);
  auto prob = make_linear_problem(inst, bounds);
  TerminationSpec term;
  term.max_iters = 300;
  auto rep = pg_fixed(prob, 1.0 / prob.lipschitz, term);
  REQUIRE(rep.trace.size() == 301);
  for (size_t t = 1; t < rep.trace.size(); ++t)
    CHECK(rep.trace[t].objective <= rep.trace[t - 1].objective + 1e-12);
}

TEST_CASE("pg_fixed gap decays log-linearly on a random instance") {
  auto inst = random_instance(UtilityClass::Linear, 5, 10, 52);
  auto bounds = equilibrium_bounds(inst);
  auto prob = make_linear_problem(inst, bounds);
  TerminationSpec term;
  term.max_iters = 2000;
  auto rep = pg_fixed(prob, 1.0 / prob.lipschitz, term);
  // least-squares fit of log(gap) on the second half of the trace
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int count = 0;
  for (size_t t = rep.trace.size() / 2; t < rep.trace.size(); ++t) {
    const double g = rep.trace[t].duality_gap;
    if (!(g > 0) || !std::isfinite(g)) continue;
    const double x = double(t), y = std::log(g);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++count;
  }
  REQUIRE(count > 100);
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double r_num = count * sxy - sx * sy;
  const double r2 = r_num * r_num / ((count * sxx - sx * sx) * (count * syy - sy * sy));
  CHECK(slope < 0.0);
  CHECK(r2 >= 0.9);
}

TEST_CASE("linesearch accepts the theory stepsize without backtracking") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 2.0);
  LinesearchParams params;
  params.gamma_max = 1.0;
  auto res = linesearch_step(quadratic, identity, x, 0.9, 1, params);
  CHECK(res.backtracks == 0);
  CHECK(res.gamma == doctest::Approx(0.9));
  CHECK(res.x_next.isApprox(x - 0.9 * x));
}

TEST_CASE("backtrack count from a huge stepsize matches the closed form") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 2.0);
  const double big = 1e6;
  LinesearchParams params;
  params.gamma_max = big;
  params.max_backtracks = 200;
  auto res = linesearch_step(quadratic, identity, x, big, 1, params);
  // smallest k with big * beta^k <= 1 (L_f = 1)
  const int expected =
      static_cast<int>(std::ceil(std::log(1.0 / big) / std::log(params.beta)));
  CHECK(res.backtracks == expected);
}

TEST_CASE("backtrack overflow throws") {
  LinesearchParams params;
  params.gamma_max = 1e6;
  params.max_backtracks = 3;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 2.0);
  CHECK_THROWS_AS(linesearch_step(quadratic, identity, x, 1e6, 1, params),
                  BacktrackOverflow);
}

TEST_CASE("degenerate linesearch reproduces pg_fixed") {
  auto inst = random_instance(UtilityClass::Linear, 3, 4, 53);
  auto bounds = equilibrium_bounds(inst);
  auto prob = make_linear_problem(inst, bounds);
  const double gamma = 1.0 / prob.lipschitz;
  LinesearchParams params;
  params.alpha = 1.0;
  params.gamma_max = gamma;
  TerminationSpec term;
  term.max_iters = 50;
  auto ls = pg_linesearch(prob, params, term);
  auto fixed = pg_fixed(prob, gamma, term);
  REQUIRE(ls.trace.size() == fixed.trace.size());
  for (size_t t = 0; t < ls.trace.size(); ++t) {
    CHECK(ls.trace[t].objective == doctest::Approx(fixed.trace[t].objective));
    CHECK(ls.trace[t].backtracks == 0);
  }
  CHECK((ls.final_iterate - fixed.final_iterate).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("pgls reaches a modest gap in fewer projections than pg_fixed iterations") {
  auto inst = random_instance(UtilityClass::Linear, 5, 10, 54);
  auto bounds = equilibrium_bounds(inst);
  auto prob = make_linear_problem(inst, bounds);
  TerminationSpec term;
  term.max_iters = 200000;
  term.gap_threshold = 1e-5;
  auto ls = pg_linesearch(prob, default_linesearch_params(prob), term);
  auto fixed = pg_fixed(prob, 1.0 / prob.lipschitz, term);
  CHECK(ls.termination_reason == StopReason::GapThreshold);
  CHECK(fixed.termination_reason == StopReason::GapThreshold);
  CHECK(ls.projections_or_prox_count < fixed.iterations);
}

TEST_CASE("fw LMO picks the smallest gradient entry per column") {
  // objective with constant gradient (3, 1, 2) in the single column
  MatrixObjective objective = [](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd g(3, 1);
    g << 3, 1, 2;
    return Eval{(x.array() * g.array()).sum(),
                Eigen::Map<const Eigen::VectorXd>(g.data(), 3)};
  };
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 1, 1.0 / 3.0);
  auto next = fw_step(objective, x, 0, FwStepRule::Static);
  // static rule at t = 0 jumps all the way to the vertex e_2
  CHECK(next(0, 0) == doctest::Approx(0.0));
  CHECK(next(1, 0) == doctest::Approx(1.0));
  CHECK(next(2, 0) == doctest::Approx(0.0));
}

TEST_CASE("fw with exact linesearch does not increase the objective") {
  auto inst = random_instance(UtilityClass::Linear, 4, 6, 55);
  auto bounds = equilibrium_bounds(inst);
  MatrixObjective objective = [&](const Eigen::MatrixXd& x) {
    auto e = eg_linear_eval(x, inst, bounds);
    return Eval{e.value,
                Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), e.gradient.size())};
  };
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 6, 0.25);
  double prev = objective(x).value;
  for (long t = 0; t < 50; ++t) {
    x = fw_step(objective, x, t, FwStepRule::ExactLine);
    const double cur = objective(x).value;
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("md step on the 1x1 QL example") {
  Eigen::MatrixXd v(1, 1);
  v << 2.0;
  auto inst = make_instance(v, Eigen::VectorXd::Ones(1), UtilityClass::Quasilinear);
  Eigen::MatrixXd b(1, 1);
  b << 0.5;
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, 0.5);
  auto [bn, dn] = md_step_ql(b, delta, inst);
  CHECK(bn(0, 0) == doctest::Approx(0.8));
  CHECK(dn[0] == doctest::Approx(0.2));
}

TEST_CASE("md step equals the independent entropic prox oracle") {
  Rng rng(56);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int m = 2 + static_cast<int>(rng.uniform() * 4);
    auto inst = random_instance(UtilityClass::Quasilinear, n, m,
                                1000 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd b(inst.n, inst.m);
    Eigen::VectorXd delta(inst.n);
    for (int i = 0; i < inst.n; ++i) {
      double s = 0;
      for (int j = 0; j < inst.m; ++j) {
        b(i, j) = 0.05 + rng.uniform();
        s += b(i, j);
      }
      delta[i] = 0.05 + rng.uniform();
      s += delta[i];
      b.row(i) *= inst.budgets[i] / s;
      delta[i] *= inst.budgets[i] / s;
    }
    // Entropic prox with unit stepsize: minimize <g, y> + KL(y||cur) over the
    // budget simplex; closed form y_k proportional to cur_k exp(-g_k). The
    // raw objective gradient is g_ij = log(p_j / v_ij), g_idelta = 0.
    Eigen::VectorXd p = b.colwise().sum();
    auto [bn, dn] = md_step_ql(b, delta, inst);
    for (int i = 0; i < inst.n; ++i) {
      Eigen::VectorXd w(inst.m + 1);
      for (int j = 0; j < inst.m; ++j) {
        const double v = inst.values.to_dense()(i, j);
        w[j] = v > 0 ? b(i, j) * std::exp(-std::log(p[j] / v)) : 0.0;
      }
      w[inst.m] = delta[i];
      w *= inst.budgets[i] / w.sum();
      for (int j = 0; j < inst.m; ++j)
        CHECK(bn(i, j) == doctest::Approx(w[j]).epsilon(1e-12));
      CHECK(dn[i] == doctest::Approx(w[inst.m]).epsilon(1e-12));
    }
  }
}

TEST_CASE("pr fixed points") {
  // uniform values: uniform bids are stationary
  auto inst = symmetric_linear(3, 4);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(3, 4, 0.25);
  auto next = pr_step_linear(b, inst);
  CHECK(next.isApprox(b, 1e-12));

  // single item: everyone bids their whole budget
  Eigen::MatrixXd v(2, 1);
  v << 0.7, 0.2;
  auto single = make_instance(v, Eigen::VectorXd::Constant(2, 1.5),
                              UtilityClass::Linear);
  Eigen::MatrixXd b1(2, 1);
  b1 << 1.5, 1.5;
  CHECK(pr_step_linear(b1, single).isApprox(b1, 1e-14));
}

TEST_CASE("shmyrev objective is non-increasing along linear pr") {
  auto inst = random_instance(UtilityClass::Linear, 4, 6, 57);
  Eigen::MatrixXd b = linear_pr_initial(inst);
  double prev = shmyrev_linear_value(b, inst);
  for (int t = 0; t < 200; ++t) {
    b = pr_step_linear(b, inst);
    const double cur = shmyrev_linear_value(b, inst);
    CHECK(cur <= prev + 1e-10);
    prev = cur;
  }
}

TEST_CASE("md step stays on the budget simplexes") {
  auto inst = random_instance(UtilityClass::Quasilinear, 4, 6, 58);
  auto [b, delta] = ql_pr_initial(inst);
  for (int t = 0; t < 50; ++t) {
    auto [bn, dn] = md_step_ql(b, delta, inst);
    b = bn;
    delta = dn;
    for (int i = 0; i < inst.n; ++i)
      CHECK(b.row(i).sum() + delta[i] ==
            doctest::Approx(inst.budgets[i]).epsilon(1e-12));
  }
}

TEST_CASE("cobb douglas closed form on symmetric data") {
  Eigen::MatrixXd lam = Eigen::MatrixXd::Constant(2, 2, 0.5);
  auto inst = make_instance(lam, Eigen::VectorXd::Ones(2), UtilityClass::CobbDouglas);
  auto [x, p] = cobb_douglas_solve(inst);
  CHECK(p.isApprox(Eigen::VectorXd::Ones(2)));
  CHECK(x.isApproxToConstant(0.5));
}

TEST_CASE("cobb douglas single buyer takes everything") {
  Eigen::MatrixXd lam(1, 3);
  lam << 0.2, 0.3, 0.5;
  auto inst = make_instance(lam, Eigen::VectorXd::Constant(1, 2.0),
                            UtilityClass::CobbDouglas);
  auto [x, p] = cobb_douglas_solve(inst);
  for (int j = 0; j < 3; ++j) {
    CHECK(x(0, j) == doctest::Approx(1.0));
    CHECK(p[j] == doctest::Approx(2.0 * lam(0, j)));
  }
}

TEST_CASE("cobb douglas output passes verification at 1e-12") {
  GenerationSpec spec;
  spec.n = 4;
  spec.m = 6;
  spec.seed = 59;
  spec.utility_class = UtilityClass::CobbDouglas;
  auto inst = generate_instance(spec);
  auto ref = reference_solve(inst, 1e-10);
  auto rep = verify_equilibrium(ref, inst, 1e-12);
  CHECK(rep.passed);
}

TEST_CASE("cobb douglas solve rejects other classes") {
  auto inst = symmetric_linear(2, 2);
  CHECK_THROWS_AS(cobb_douglas_solve(inst), WrongUtilityClass);
}

TEST_CASE("reference solve on the symmetric instance") {
  auto inst = symmetric_linear(4, 4);
  auto ref = reference_solve(inst, 1e-10);
  CHECK(ref.prices.isApprox(Eigen::VectorXd::Ones(4), 1e-6));
  CHECK(ref.allocation->isApproxToConstant(0.25, 1e-6));
}

TEST_CASE("reference solve meets its gap target and verifies") {
  auto inst = random_instance(UtilityClass::Linear, 3, 3, 60);
  auto ref = reference_solve(inst, 1e-10);
  EquilibriumCandidate gap_probe;
  gap_probe.allocation = ref.allocation;
  gap_probe.prices = ref.prices;
  CHECK(duality_gap_linear(gap_probe, inst) / inst.n <= 1e-10);
  CHECK(verify_equilibrium(ref, inst, 1e-6).passed);
}
