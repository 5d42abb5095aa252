#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>

#include "fisher/market.hpp"

namespace fisher {

/// A candidate equilibrium submitted to the verifier. Optional fields are
/// present depending on which solver produced the candidate.
struct EquilibriumCandidate {
  std::optional<Eigen::MatrixXd> allocation;  // n-by-m
  Eigen::VectorXd prices;                     // m
  std::optional<Eigen::MatrixXd> bids;        // n-by-m
  std::optional<Eigen::VectorXd> leftovers;   // n (QL)
  std::optional<Eigen::VectorXd> utilities;   // n
};

struct VerificationReport {
  double max_clearance_violation = 0;
  double max_budget_violation = 0;
  double max_dual_feasibility_violation = 0;
  double max_complementary_slackness = 0;
  bool passed = false;
};

/// Equilibrium prices from the allocation iterate: per item, the simplex
/// projection multiplier of column j of (x - gamma grad f(x)), divided by
/// gamma. Equals the equilibrium prices at an optimal x.
Eigen::VectorXd recover_prices_linear(const Eigen::MatrixXd& x, double gamma,
                                      const MarketInstance& inst,
                                      const EquilibriumBounds& bounds);

/// EG-pair duality gap for a candidate with allocation and prices:
/// raw primal -sum B_i log <v_i, x_i> plus the dual value at
/// beta_i = min_j p_j / v_ij. When the candidate carries bids instead, the
/// bid-space (Shmyrev) gap is used. Returns +inf when the dual point is
/// infeasible (some beta_i <= 0).
double duality_gap_linear(const EquilibriumCandidate& candidate,
                          const MarketInstance& inst);

/// Bid-space QL gap: raw QL objective value plus the dual value at
/// beta_i = min{min_j p_j / v_ij, 1}.
double duality_gap_ql(const Eigen::MatrixXd& b, const Eigen::VectorXd& delta,
                      const MarketInstance& inst);

/// Leontief gap from a feasible price vector on the scaled simplex: builds
/// the feasible utility vector u from p and returns P(u) - g(p).
double duality_gap_leontief(const Eigen::VectorXd& p, const MarketInstance& inst);

/// max_j |p_j - p_ref_j| / p_ref_j
double relative_price_error(const Eigen::VectorXd& p, const Eigen::VectorXd& p_ref);

/// The primal-feasible utility vector used inside duality_gap_leontief.
Eigen::VectorXd leontief_utilities_from_prices(const Eigen::VectorXd& p,
                                               const MarketInstance& inst);

/// Theorem-style KKT verification: market clearance, budget exhaustion,
/// buyer optimality via dual feasibility, complementary slackness.
VerificationReport verify_equilibrium(const EquilibriumCandidate& candidate,
                                      const MarketInstance& inst, double tol);

// Candidate text file (same key-value dialect as the instance format).
void write_candidate(std::ostream& os, const EquilibriumCandidate& c, int n, int m);
EquilibriumCandidate read_candidate(std::istream& is);
void save_candidate(const std::string& path, const EquilibriumCandidate& c, int n, int m);
EquilibriumCandidate load_candidate(const std::string& path);

}  // namespace fisher
