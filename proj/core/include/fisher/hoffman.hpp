#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fisher {

struct HoffmanResult {
  double value = 0;
  std::vector<int> witness;  // row subset attaining the maximum, sorted
};

/// Brute-force Hoffman constant of M (k rows): max over row subsets S with
/// full row rank of 1 / sigma_min(M_S). Subsets larger than the column count
/// are skipped (they cannot have full row rank). Rows k > 20 throw TooLarge.
/// Among subsets attaining the maximum (exact fp tie), the lexicographically
/// smallest witness is kept.
HoffmanResult hoffman_brute(const Eigen::MatrixXd& M);

}  // namespace fisher
