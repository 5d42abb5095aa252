#pragma once

#include <Eigen/Dense>
#include <utility>

namespace fisher {

/// Euclidean projection onto {x >= 0, sum x = radius} with its multiplier:
/// point = (input - multiplier)_+ and sum (y_i - multiplier)_+ = radius.
struct SimplexProjection {
  Eigen::VectorXd point;
  double multiplier = 0;
};

/// Sorting-based simplex projection. Only candidate entries (those that can
/// be active, y_i > max(y) - radius) are sorted, so the cost is
/// O(k log k) in the candidate count k. Ties sort by (value desc, index asc).
SimplexProjection project_simplex(const Eigen::VectorXd& y, double radius);

/// Projection onto {lower <= x <= upper, sum x = radius}: bisection on the
/// shift multiplier with clip(y - lambda, lower, upper), then one exact
/// pivot on the identified active set. Upper bounds may be +inf.
Eigen::VectorXd project_box_simplex(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, double radius);

/// Column-wise projection of an n-by-m matrix onto (Delta_n)^m; returns the
/// projected matrix and the per-column multiplier vector.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> project_product_simplexes(
    const Eigen::MatrixXd& x);

}  // namespace fisher
