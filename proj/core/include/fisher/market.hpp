#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fisher/errors.hpp"

namespace fisher {

enum class UtilityClass { Linear, Quasilinear, Leontief, CobbDouglas };

std::string to_string(UtilityClass c);
UtilityClass utility_class_from_string(const std::string& s);

/// Nonnegative n-by-m value matrix with dense or triplet storage.
///
/// Both storages expose the same nonzero-iteration contract; everything
/// downstream (utilities, gradients, bounds) touches only nonzeros, so the
/// cost of those operations is O(nnz).
class ValueMatrix {
 public:
  struct Entry {
    int i, j;
    double v;
  };

  ValueMatrix() = default;
  static ValueMatrix from_dense(Eigen::MatrixXd m);
  static ValueMatrix from_triplets(int rows, int cols, std::vector<Entry> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  long nnz() const { return static_cast<long>(cells_.size()); }
  bool is_dense_storage() const { return dense_storage_; }

  /// f(j, v) over nonzeros of row i, in increasing j.
  template <class F>
  void for_each_in_row(int i, F&& f) const {
    for (int k = row_start_[i]; k < row_start_[i + 1]; ++k)
      f(cells_[k].j, cells_[k].v);
  }

  /// f(i, v) over nonzeros of column j, in increasing i.
  template <class F>
  void for_each_in_col(int j, F&& f) const {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      const Entry& e = cells_[col_order_[k]];
      f(e.i, e.v);
    }
  }

  template <class F>
  void for_each(F&& f) const {
    for (const Entry& e : cells_) f(e.i, e.j, e.v);
  }

  double row_l1(int i) const { return row_l1_[i]; }
  double row_l2(int i) const { return row_l2_[i]; }
  double row_max(int i) const { return row_max_[i]; }
  int row_nnz(int i) const { return row_start_[i + 1] - row_start_[i]; }
  int col_nnz(int j) const { return col_start_[j + 1] - col_start_[j]; }

  Eigen::MatrixXd to_dense() const;

 private:
  void build_index();

  int rows_ = 0, cols_ = 0;
  bool dense_storage_ = true;
  std::vector<Entry> cells_;          // sorted by (i, j)
  std::vector<int> row_start_;        // size rows+1
  std::vector<int> col_order_;        // cells_ indices sorted by (j, i)
  std::vector<int> col_start_;        // size cols+1
  std::vector<double> row_l1_, row_l2_, row_max_;
};

/// The problem datum: buyers' values, budgets and the utility class.
struct MarketInstance {
  int n = 0;
  int m = 0;
  UtilityClass utility_class = UtilityClass::Linear;
  ValueMatrix values;
  Eigen::VectorXd budgets;

  double budget_total() const { return budgets.sum(); }
};

/// Per-buyer / per-item equilibrium bounds and the derived smoothing moduli.
struct EquilibriumBounds {
  Eigen::VectorXd u_lower, u_upper;  // linear: utility bounds
  Eigen::VectorXd p_lower, p_upper;  // QL: price bounds
  Eigen::VectorXd r_lower, r_upper;  // Leontief: <a_i, p> bounds
  double mu = 0;
  double L = 0;
  double op_norm_A = 0;
};

enum class ValueDistribution { Uniform, Exponential, Lognormal, AbsGaussian };

std::string to_string(ValueDistribution d);
ValueDistribution distribution_from_string(const std::string& s);

struct BudgetMode {
  enum class Kind { Unit, RandomShifted } kind = Kind::Unit;
  double scale = 1.0;
  double offset = 0.0;

  static BudgetMode unit() { return {}; }
  static BudgetMode random_shifted(double scale, double offset) {
    return {Kind::RandomShifted, scale, offset};
  }
};

struct GenerationSpec {
  ValueDistribution distribution = ValueDistribution::Uniform;
  int n = 1;
  int m = 1;
  UtilityClass utility_class = UtilityClass::Linear;
  BudgetMode budget_mode;
  std::uint64_t seed = 0;
};

/// Deterministic random stream; all draws are derived from splitmix-seeded
/// mt19937_64 through explicit transforms so that a fixed seed reproduces
/// instances bit-for-bit on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();      // (0, 1)
  double normal();       // N(0, 1), Box-Muller, no cached spare
  double draw(ValueDistribution d);

 private:
  std::uint64_t next_u64();
  std::uint64_t state_[4];
};

/// Checks the nondegeneracy and positivity invariants; throws ValidationError.
const MarketInstance& validate_instance(const MarketInstance& inst);

/// Deterministic instance generation per spec; resamples degenerate
/// rows/columns up to 100 times before failing.
MarketInstance generate_instance(const GenerationSpec& spec);

/// Bounds on equilibrium quantities for the instance's utility class,
/// plus the smoothing moduli (mu, L) and the operator norm of the
/// class-specific linear map.
EquilibriumBounds equilibrium_bounds(const MarketInstance& inst);

// Line-oriented text format: header (n=, m=, utility=, budgets=) then a
// `dense` or `sparse` body. Decimal fields round-trip bit-exactly.
void write_instance(std::ostream& os, const MarketInstance& inst);
MarketInstance read_instance(std::istream& is);
void save_instance(const std::string& path, const MarketInstance& inst);
MarketInstance load_instance(const std::string& path);

}  // namespace fisher
