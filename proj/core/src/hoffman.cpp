#include "fisher/hoffman.hpp"

#include <Eigen/SVD>
#include <string>

#include "fisher/errors.hpp"

namespace fisher {

HoffmanResult hoffman_brute(const Eigen::MatrixXd& M) {
  const int k = static_cast<int>(M.rows());
  const int d = static_cast<int>(M.cols());
  if (k == 0 || d == 0) throw EmptyInput("hoffman_brute: empty matrix");
  if (k > 20)
    throw TooLarge("hoffman_brute: " + std::to_string(k) +
                   " rows exceed the 20-row enumeration cap");

  const double sigma_max_M =
      Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
  const double rank_tol = 1e-10 * sigma_max_M;

  HoffmanResult best;
  best.value = 0;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) rows.push_back(i);
    if (static_cast<int>(rows.size()) > d) continue;  // cannot be full row rank

    Eigen::MatrixXd sub(rows.size(), d);
    for (size_t r = 0; r < rows.size(); ++r) sub.row(r) = M.row(rows[r]);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(sub).singularValues();
    const double sigma_min = sv(sv.size() - 1);
    if (sigma_min <= rank_tol) continue;  // row-rank deficient

    const double h = 1.0 / sigma_min;
    // Exact ties resolve to the lexicographically smallest index list.
    if (h > best.value || best.witness.empty() ||
        (h == best.value && rows < best.witness)) {
      best.value = h;
      best.witness = rows;
    }
  }
  return best;
}

}  // namespace fisher
