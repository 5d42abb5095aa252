#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fisher/market.hpp"
#include "fisher/metrics.hpp"
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

Eigen::MatrixXd random_feasible_allocation(const MarketInstance& inst, Rng& rng) {
  Eigen::MatrixXd x(inst.n, inst.m);
  for (int j = 0; j < inst.m; ++j) {
    double s = 0;
    for (int i = 0; i < inst.n; ++i) {
      x(i, j) = 0.05 + rng.uniform();
      s += x(i, j);
    }
    x.col(j) /= s;
  }
  return x;
}

Eigen::MatrixXd random_feasible_bids(const MarketInstance& inst, Rng& rng) {
  Eigen::MatrixXd b(inst.n, inst.m);
  for (int i = 0; i < inst.n; ++i) {
    double s = 0;
    for (int j = 0; j < inst.m; ++j) {
      b(i, j) = 0.05 + rng.uniform();
      s += b(i, j);
    }
    b.row(i) *= inst.budgets[i] / s;
  }
  return b;
}

}  // namespace

TEST_CASE("price recovery at the symmetric equilibrium") {
  auto inst = symmetric_linear(2, 2);
  auto bounds = equilibrium_bounds(inst);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 2, 0.5);
  auto p = recover_prices_linear(x, 0.01, inst, bounds);
  CHECK(p.isApprox(Eigen::VectorXd::Ones(2), 1e-10));
}

TEST_CASE("price recovery for a single buyer") {
  Eigen::MatrixXd v(1, 2);
  v << 3.0, 1.0;
  auto inst =
      make_instance(v, Eigen::VectorXd::Constant(1, 2.0), UtilityClass::Linear);
  auto bounds = equilibrium_bounds(inst);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 2);  // buyer takes everything
  auto p = recover_prices_linear(x, 0.05, inst, bounds);
  // KKT: p_j = B v_j / <v, 1>
  CHECK(p[0] == doctest::Approx(2.0 * 3.0 / 4.0));
  CHECK(p[1] == doctest::Approx(2.0 * 1.0 / 4.0));
}

TEST_CASE("linear gap vanishes at the symmetric equilibrium (both routes)") {
  auto inst = symmetric_linear(3, 3);
  EquilibriumCandidate alloc_route;
  alloc_route.allocation = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  alloc_route.prices = Eigen::VectorXd::Ones(3);
  CHECK(duality_gap_linear(alloc_route, inst) == doctest::Approx(0.0).epsilon(1e-10));

  EquilibriumCandidate bid_route;
  bid_route.bids = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  bid_route.prices = Eigen::VectorXd::Ones(3);
  CHECK(duality_gap_linear(bid_route, inst) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("linear gap is nonnegative on random feasible points") {
  GenerationSpec spec;
  spec.n = 4;
  spec.m = 6;
  spec.seed = 41;
  auto inst = generate_instance(spec);
  auto bounds = equilibrium_bounds(inst);
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    EquilibriumCandidate c;
    c.allocation = random_feasible_allocation(inst, rng);
    c.prices = recover_prices_linear(*c.allocation, 0.01, inst, bounds);
    CHECK(duality_gap_linear(c, inst) >= -1e-12);

    EquilibriumCandidate cb;
    cb.bids = random_feasible_bids(inst, rng);
    CHECK(duality_gap_linear(cb, inst) >= -1e-12);
  }
}

TEST_CASE("ql gap is nonnegative on random feasible bids") {
  GenerationSpec spec;
  spec.n = 4;
  spec.m = 6;
  spec.seed = 43;
  spec.utility_class = UtilityClass::Quasilinear;
  auto inst = generate_instance(spec);
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd b = random_feasible_bids(inst, rng);
    Eigen::VectorXd delta(inst.n);
    for (int i = 0; i < inst.n; ++i) {
      const double f = 0.5 * rng.uniform();
      delta[i] = f * inst.budgets[i];
      b.row(i) *= 1.0 - f;
    }
    CHECK(duality_gap_ql(b, delta, inst) >= -1e-12);
  }
}

TEST_CASE("leontief gap on the 1x1 instance is zero") {
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  auto inst = make_instance(a, Eigen::VectorXd::Ones(1), UtilityClass::Leontief);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(1);
  CHECK(leontief_utilities_from_prices(p, inst)[0] == doctest::Approx(1.0));
  CHECK(duality_gap_leontief(p, inst) == doctest::Approx(0.0));
}

TEST_CASE("leontief gap nonnegative and u feasible on random prices") {
  GenerationSpec spec;
  spec.n = 4;
  spec.m = 6;
  spec.seed = 45;
  spec.utility_class = UtilityClass::Leontief;
  auto inst = generate_instance(spec);
  Rng rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd p(inst.m);
    double s = 0;
    for (int j = 0; j < inst.m; ++j) {
      p[j] = 0.05 + rng.uniform();
      s += p[j];
    }
    p *= inst.budget_total() / s;
    auto u = leontief_utilities_from_prices(p, inst);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(inst.m);
    inst.values.for_each([&](int i, int j, double a) { load[j] += a * u[i]; });
    CHECK(load.maxCoeff() <= 1.0 + 1e-12);
    CHECK(duality_gap_leontief(p, inst) >= -1e-12);
  }
}

TEST_CASE("relative price error basics") {
  Eigen::VectorXd ref(3);
  ref << 1.0, 2.0, 4.0;
  CHECK(relative_price_error(ref, ref) == 0.0);
  CHECK(relative_price_error(1.1 * ref, ref) == doctest::Approx(0.1));
  Eigen::VectorXd p = ref;
  p[2] *= 0.5;
  CHECK(relative_price_error(p, ref) == doctest::Approx(0.5));
}

TEST_CASE("verification accepts the exact symmetric equilibrium") {
  auto inst = symmetric_linear(4, 4);
  EquilibriumCandidate c;
  c.allocation = Eigen::MatrixXd::Constant(4, 4, 0.25);
  c.prices = Eigen::VectorXd::Ones(4);
  auto rep = verify_equilibrium(c, inst, 1e-12);
  CHECK(rep.passed);
}

TEST_CASE("verification rejects a perturbed price vector") {
  auto inst = symmetric_linear(4, 4);
  EquilibriumCandidate c;
  c.allocation = Eigen::MatrixXd::Constant(4, 4, 0.25);
  c.prices = Eigen::VectorXd::Ones(4);
  c.prices[0] = 2.0;
  auto rep = verify_equilibrium(c, inst, 1e-6);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_budget_violation > 1e-6);
}

TEST_CASE("candidate io round-trips bit-exactly") {
  EquilibriumCandidate c;
  c.allocation = Eigen::MatrixXd::Random(2, 3).cwiseAbs();
  c.prices = Eigen::VectorXd::Random(3).cwiseAbs();
  c.bids = Eigen::MatrixXd::Random(2, 3).cwiseAbs();
  c.leftovers = Eigen::VectorXd::Random(2).cwiseAbs();
  c.utilities = Eigen::VectorXd::Random(2).cwiseAbs();
  std::stringstream ss;
  write_candidate(ss, c, 2, 3);
  auto back = read_candidate(ss);
  CHECK(*back.allocation == *c.allocation);
  CHECK(back.prices == c.prices);
  CHECK(*back.bids == *c.bids);
  CHECK(*back.leftovers == *c.leftovers);
  CHECK(*back.utilities == *c.utilities);
}

TEST_CASE("price recovery at the reference matches reference prices") {
  GenerationSpec spec;
  spec.n = 5;
  spec.m = 10;
  spec.seed = 47;
  auto inst = generate_instance(spec);
  auto bounds = equilibrium_bounds(inst);
  auto ref = reference_solve(inst, 1e-10);
  const double lipschitz = bounds.L * bounds.op_norm_A * bounds.op_norm_A;
  auto p = recover_prices_linear(*ref.allocation, 1.0 / lipschitz, inst, bounds);
  CHECK(relative_price_error(p, ref.prices) <= 1e-6);
}
