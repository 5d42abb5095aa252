#include "fisher/objectives.hpp"

#include <cmath>

#include "fisher/errors.hpp"

namespace fisher {

std::pair<double, double> SmoothedLogTerm::eval(double u) const {
  const double B = weight, t = threshold;
  if (u > t) return {-B * std::log(u), -B / u};
  const double h = -B * std::log(t);
  const double h1 = -B / t;
  const double h2 = B / (t * t);
  const double du = u - t;
  return {0.5 * h2 * du * du + h1 * du + h, h2 * du + h1};
}

std::pair<double, double> SmoothedEntropyTerm::eval(double x) const {
  const double t = threshold;
  if (x > t) return {x * std::log(x), 1.0 + std::log(x)};
  const double h = t * std::log(t);
  const double h1 = 1.0 + std::log(t);
  const double h2 = 1.0 / t;
  const double dx = x - t;
  return {0.5 * h2 * dx * dx + h1 * dx + h, h2 * dx + h1};
}

std::pair<double, double> smoothed_log(double u, const SmoothedLogTerm& term) {
  return term.eval(u);
}

ObjectiveEval eg_linear_eval(const Eigen::MatrixXd& x, const MarketInstance& inst,
                             const EquilibriumBounds& bounds) {
  if (x.rows() != inst.n || x.cols() != inst.m)
    throw DimensionMismatch("eg_linear_eval: allocation shape");

  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double v) { u[i] += v * x(i, j); });

  ObjectiveEval out;
  out.gradient = Eigen::MatrixXd::Zero(inst.n, inst.m);
  Eigen::VectorXd slope(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    SmoothedLogTerm term{inst.budgets[i], bounds.u_lower[i]};
    auto [val, der] = term.eval(u[i]);
    out.value += val;
    slope[i] = der;
  }
  inst.values.for_each(
      [&](int i, int j, double v) { out.gradient(i, j) = slope[i] * v; });
  return out;
}

ObjectiveEval ql_shmyrev_eval(const Eigen::MatrixXd& b, const Eigen::VectorXd& delta,
                              const MarketInstance& inst,
                              const EquilibriumBounds& bounds) {
  if (b.rows() != inst.n || b.cols() != inst.m || delta.size() != inst.n)
    throw DimensionMismatch("ql_shmyrev_eval: bid/leftover shape");
  (void)delta;  // the objective does not reference the leftovers

  Eigen::VectorXd p = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double) { p[j] += b(i, j); });

  ObjectiveEval out;
  out.gradient = Eigen::MatrixXd::Zero(inst.n, inst.m + 1);
  Eigen::VectorXd hslope(inst.m);
  for (int j = 0; j < inst.m; ++j) {
    SmoothedEntropyTerm term{bounds.p_lower[j]};
    auto [val, der] = term.eval(p[j]);
    out.value += val;
    hslope[j] = der;
  }
  inst.values.for_each([&](int i, int j, double v) {
    const double coeff = 1.0 + std::log(v);
    out.value -= coeff * b(i, j);
    out.gradient(i, j) = -coeff + hslope[j];
  });
  return out;
}

ObjectiveEval leontief_dual_eval(const Eigen::VectorXd& p, const MarketInstance& inst,
                                 const EquilibriumBounds& bounds) {
  if (p.size() != inst.m) throw DimensionMismatch("leontief_dual_eval: price shape");

  Eigen::VectorXd r = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double a) { r[i] += a * p[j]; });

  ObjectiveEval out;
  out.gradient = Eigen::MatrixXd::Zero(inst.m, 1);
  Eigen::VectorXd slope(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    SmoothedLogTerm term{inst.budgets[i], bounds.r_lower[i]};
    auto [val, der] = term.eval(r[i]);
    out.value += val;
    slope[i] = der;
  }
  inst.values.for_each(
      [&](int i, int j, double a) { out.gradient(j, 0) += slope[i] * a; });
  return out;
}

double shmyrev_linear_value(const Eigen::MatrixXd& b, const MarketInstance& inst) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double) { p[j] += b(i, j); });
  double value = 0;
  for (int j = 0; j < inst.m; ++j) {
    if (p[j] <= 0.0) throw ZeroPrice(j, "shmyrev_linear_value: zero price");
    value += p[j] * std::log(p[j]);
  }
  inst.values.for_each(
      [&](int i, int j, double v) { value -= std::log(v) * b(i, j); });
  return value;
}

double ql_shmyrev_raw_value(const Eigen::MatrixXd& b, const MarketInstance& inst) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double) { p[j] += b(i, j); });
  double value = 0;
  for (int j = 0; j < inst.m; ++j) {
    if (p[j] < 0.0) throw ZeroPrice(j, "ql_shmyrev_raw_value: negative price");
    if (p[j] > 0.0) value += p[j] * std::log(p[j]);
  }
  inst.values.for_each(
      [&](int i, int j, double v) { value -= (1.0 + std::log(v)) * b(i, j); });
  return value;
}

}  // namespace fisher
