#pragma once

#include <Eigen/Dense>
#include <utility>

#include "fisher/market.hpp"

namespace fisher {

/// -B log u below-threshold quadratic extrapolation: the quadratic branch is
/// the second-order Taylor polynomial of -B log at the threshold, so value
/// and derivative glue C^1 there and the curvature is B / threshold^2.
struct SmoothedLogTerm {
  double weight = 1.0;     // B_i
  double threshold = 1.0;  // lower bound on the composite argument

  std::pair<double, double> eval(double u) const;  // (value, derivative)
};

/// x log x with the same quadratic gluing below the threshold.
struct SmoothedEntropyTerm {
  double threshold = 1.0;

  std::pair<double, double> eval(double x) const;
};

/// Convenience wrapper for SmoothedLogTerm::eval.
std::pair<double, double> smoothed_log(double u, const SmoothedLogTerm& term);

struct ObjectiveEval {
  double value = 0;
  Eigen::MatrixXd gradient;  // shaped like the iterate block
};

/// Smoothed EG objective for linear utilities on an n-by-m allocation:
/// sum_i h~_i(<v_i, x_i>) with thresholds bounds.u_lower. O(nnz(v)).
ObjectiveEval eg_linear_eval(const Eigen::MatrixXd& x, const MarketInstance& inst,
                             const EquilibriumBounds& bounds);

/// Smoothed QL-Shmyrev objective on bids b (n-by-m) and leftovers delta (n).
/// Sums run over cells with v_ij > 0 only; the gradient w.r.t. delta is 0.
/// Returns the gradient as an n-by-(m+1) block with the last column = d/d delta.
ObjectiveEval ql_shmyrev_eval(const Eigen::MatrixXd& b, const Eigen::VectorXd& delta,
                              const MarketInstance& inst,
                              const EquilibriumBounds& bounds);

/// Smoothed reformulated EG dual for Leontief utilities on prices p (m):
/// sum_i h~_i(<a_i, p>) with thresholds bounds.r_lower.
ObjectiveEval leontief_dual_eval(const Eigen::VectorXd& p, const MarketInstance& inst,
                                 const EquilibriumBounds& bounds);

/// Unsmoothed bid-space objective for linear utilities,
/// -sum_{v_ij>0} (log v_ij) b_ij + sum_j p_j(b) log p_j(b); used to monitor
/// linear proportional response, whose iterates keep prices positive.
double shmyrev_linear_value(const Eigen::MatrixXd& b, const MarketInstance& inst);

/// Unsmoothed QL-Shmyrev objective value (same sums restricted to v_ij > 0).
double ql_shmyrev_raw_value(const Eigen::MatrixXd& b, const MarketInstance& inst);

}  // namespace fisher
