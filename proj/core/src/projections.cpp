#include "fisher/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fisher/errors.hpp"

namespace fisher {

SimplexProjection project_simplex(const Eigen::VectorXd& y, double radius) {
  const int d = static_cast<int>(y.size());
  if (d == 0) throw EmptyInput("project_simplex: empty input");

  // x_i = y_i - lambda > 0 and x_i <= radius force y_i > y_max - radius,
  // so everything else can be dropped before sorting.
  const double ymax = y.maxCoeff();
  std::vector<int> cand;
  cand.reserve(d);
  for (int i = 0; i < d; ++i)
    if (y[i] > ymax - radius) cand.push_back(i);

  std::sort(cand.begin(), cand.end(), [&](int a, int b) {
    return y[a] != y[b] ? y[a] > y[b] : a < b;
  });

  double cum = 0;
  double lambda = y[cand[0]] - radius;
  int active = 0;
  for (int k = 0; k < static_cast<int>(cand.size()); ++k) {
    const double yk = y[cand[k]];
    const double cand_lambda = (cum + yk - radius) / (k + 1);
    if (yk - cand_lambda <= 0) break;
    cum += yk;
    lambda = (cum - radius) / (k + 1);
    active = k + 1;
  }
  (void)active;

  SimplexProjection out;
  out.multiplier = lambda;
  out.point = (y.array() - lambda).max(0.0);
  return out;
}

Eigen::VectorXd project_box_simplex(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, double radius) {
  const int d = static_cast<int>(y.size());
  if (d == 0) throw EmptyInput("project_box_simplex: empty input");
  if (lower.size() != d || upper.size() != d)
    throw DimensionMismatch("project_box_simplex: bound dimensions");

  const double lo_sum = lower.sum();
  double up_sum = 0;
  for (int i = 0; i < d; ++i) up_sum += upper[i];  // may be inf
  if (radius < lo_sum - 1e-15 * (1.0 + std::abs(lo_sum)) || radius > up_sum)
    throw InfeasibleBox("radius outside [sum lower, sum upper]");

  // Infinite upper bounds do not change the feasible set once capped at
  // l_i + (radius - sum lower), which keeps the bisection bracket finite.
  Eigen::VectorXd u_eff(d);
  const double slack = radius - lo_sum;
  for (int i = 0; i < d; ++i) u_eff[i] = std::min(upper[i], lower[i] + slack);

  auto mass = [&](double lam) {
    double s = 0;
    for (int i = 0; i < d; ++i)
      s += std::clamp(y[i] - lam, lower[i], u_eff[i]);
    return s;
  };

  double lam_lo = std::numeric_limits<double>::infinity();
  double lam_hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    lam_lo = std::min(lam_lo, y[i] - u_eff[i]);
    lam_hi = std::max(lam_hi, y[i] - lower[i]);
  }
  const double tol = 1e-14 * (1.0 + y.cwiseAbs().maxCoeff());
  while (lam_hi - lam_lo > tol) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (mass(mid) >= radius)
      lam_lo = mid;
    else
      lam_hi = mid;
  }
  double lam = 0.5 * (lam_lo + lam_hi);

  // Exact pivot: solve for lambda on the active set found by the bisection.
  const double cls = 16 * tol;
  double fixed = 0;
  double free_sum = 0;
  int free_count = 0;
  for (int i = 0; i < d; ++i) {
    const double xi = y[i] - lam;
    if (xi <= lower[i] + cls) {
      fixed += lower[i];
    } else if (xi >= u_eff[i] - cls) {
      fixed += u_eff[i];
    } else {
      free_sum += y[i];
      ++free_count;
    }
  }
  if (free_count > 0) lam = (free_sum - (radius - fixed)) / free_count;

  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = std::clamp(y[i] - lam, lower[i], u_eff[i]);
  return x;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> project_product_simplexes(
    const Eigen::MatrixXd& x) {
  const int m = static_cast<int>(x.cols());
  Eigen::MatrixXd out(x.rows(), m);
  Eigen::VectorXd multipliers(m);
  for (int j = 0; j < m; ++j) {
    SimplexProjection pj = project_simplex(x.col(j), 1.0);
    out.col(j) = pj.point;
    multipliers[j] = pj.multiplier;
  }
  return {std::move(out), std::move(multipliers)};
}

}  // namespace fisher
