#include <doctest.h>

#include <Eigen/SVD>

#include "fisher/errors.hpp"
#include "fisher/hoffman.hpp"
#include "fisher/market.hpp"

using namespace fisher;

namespace {

Eigen::MatrixXd random_matrix(int k, int d, Rng& rng) {
  Eigen::MatrixXd M(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = 2.0 * rng.uniform() - 1.0;
  return M;
}

double sigma_min(const Eigen::MatrixXd& M) {
  auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
  return sv(sv.size() - 1);
}

}  // namespace

TEST_CASE("identity matrix has H = 1") {
  auto res = hoffman_brute(Eigen::MatrixXd::Identity(2, 2));
  CHECK(res.value == doctest::Approx(1.0));
}

TEST_CASE("diag(1, 2) has H = 1") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
  M(0, 0) = 1.0;
  M(1, 1) = 2.0;
  auto res = hoffman_brute(M);
  CHECK(res.value == doctest::Approx(1.0));
  // witness is the lexicographically smallest subset attaining sigma_min = 1
  CHECK(res.witness == std::vector<int>{0});
}

TEST_CASE("single short row has H = 1/sigma") {
  Eigen::MatrixXd M(1, 2);
  M << 0.5, 0.0;
  auto res = hoffman_brute(M);
  CHECK(res.value == doctest::Approx(2.0));
  CHECK(res.witness == std::vector<int>{0});
}

TEST_CASE("rank-deficient subsets are skipped") {
  Eigen::MatrixXd M(2, 2);
  M << 1.0, 1.0, 1.0, 1.0;  // the pair is singular; singletons are not
  auto res = hoffman_brute(M);
  CHECK(res.value == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(res.witness.size() == 1);
}

TEST_CASE("stacking rows can only grow H") {
  Rng rng(61);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd A = random_matrix(2, 3, rng);
    Eigen::MatrixXd C = random_matrix(2, 3, rng);
    Eigen::MatrixXd stacked(4, 3);
    stacked << A, C;
    auto hs = hoffman_brute(stacked);
    auto ha = hoffman_brute(A);
    CHECK(hs.value >= ha.value - 1e-12);
    CHECK(hs.value >= 1.0 / sigma_min(A) - 1e-12);
  }
}

TEST_CASE("H scales inversely with the matrix") {
  Rng rng(62);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd M = random_matrix(3, 2, rng);
    auto h1 = hoffman_brute(M);
    auto h2 = hoffman_brute(2.0 * M);
    CHECK(h2.value == doctest::Approx(h1.value / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("oversized inputs are rejected") {
  CHECK_THROWS_AS(hoffman_brute(Eigen::MatrixXd::Ones(21, 2)), TooLarge);
  CHECK_THROWS_AS(hoffman_brute(Eigen::MatrixXd()), EmptyInput);
}
