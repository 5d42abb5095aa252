#include "fisher/market.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fisher/text_io.hpp"

namespace fisher {

std::string to_string(UtilityClass c) {
  switch (c) {
    case UtilityClass::Linear: return "linear";
    case UtilityClass::Quasilinear: return "ql";
    case UtilityClass::Leontief: return "leontief";
    case UtilityClass::CobbDouglas: return "cobbdouglas";
  }
  return "?";
}

UtilityClass utility_class_from_string(const std::string& s) {
  if (s == "linear") return UtilityClass::Linear;
  if (s == "ql" || s == "quasilinear") return UtilityClass::Quasilinear;
  if (s == "leontief") return UtilityClass::Leontief;
  if (s == "cobbdouglas" || s == "cobb-douglas") return UtilityClass::CobbDouglas;
  throw ParseError("unknown utility class: " + s);
}

std::string to_string(ValueDistribution d) {
  switch (d) {
    case ValueDistribution::Uniform: return "uniform";
    case ValueDistribution::Exponential: return "exponential";
    case ValueDistribution::Lognormal: return "lognormal";
    case ValueDistribution::AbsGaussian: return "absgaussian";
  }
  return "?";
}

ValueDistribution distribution_from_string(const std::string& s) {
  if (s == "uniform") return ValueDistribution::Uniform;
  if (s == "exponential") return ValueDistribution::Exponential;
  if (s == "lognormal") return ValueDistribution::Lognormal;
  if (s == "absgaussian" || s == "gaussian") return ValueDistribution::AbsGaussian;
  throw ParseError("unknown distribution: " + s);
}

// ---------------------------------------------------------------------------
// ValueMatrix

ValueMatrix ValueMatrix::from_dense(Eigen::MatrixXd m) {
  ValueMatrix vm;
  vm.rows_ = static_cast<int>(m.rows());
  vm.cols_ = static_cast<int>(m.cols());
  vm.dense_storage_ = true;
  for (int i = 0; i < vm.rows_; ++i)
    for (int j = 0; j < vm.cols_; ++j)
      if (m(i, j) != 0.0) vm.cells_.push_back({i, j, m(i, j)});
  vm.build_index();
  return vm;
}

ValueMatrix ValueMatrix::from_triplets(int rows, int cols, std::vector<Entry> entries) {
  ValueMatrix vm;
  vm.rows_ = rows;
  vm.cols_ = cols;
  vm.dense_storage_ = false;
  std::erase_if(entries, [](const Entry& e) { return e.v == 0.0; });
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  vm.cells_ = std::move(entries);
  vm.build_index();
  return vm;
}

void ValueMatrix::build_index() {
  row_start_.assign(rows_ + 1, 0);
  col_start_.assign(cols_ + 1, 0);
  for (const Entry& e : cells_) {
    ++row_start_[e.i + 1];
    ++col_start_[e.j + 1];
  }
  for (int i = 0; i < rows_; ++i) row_start_[i + 1] += row_start_[i];
  for (int j = 0; j < cols_; ++j) col_start_[j + 1] += col_start_[j];
  col_order_.resize(cells_.size());
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int k = 0; k < static_cast<int>(cells_.size()); ++k)
    col_order_[fill[cells_[k].j]++] = k;

  row_l1_.assign(rows_, 0.0);
  row_l2_.assign(rows_, 0.0);
  row_max_.assign(rows_, 0.0);
  for (const Entry& e : cells_) {
    row_l1_[e.i] += std::abs(e.v);
    row_l2_[e.i] += e.v * e.v;
    row_max_[e.i] = std::max(row_max_[e.i], std::abs(e.v));
  }
  for (double& x : row_l2_) x = std::sqrt(x);
}

Eigen::MatrixXd ValueMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
  for (const Entry& e : cells_) m(e.i, e.j) = e.v;
  return m;
}

// ---------------------------------------------------------------------------
// Rng: xoshiro256++ seeded via splitmix64. Fully specified arithmetic, so a
// fixed seed reproduces the same stream on any platform.

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  auto rotl = [](std::uint64_t v, int k) { return std::rotl(v, k); };
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  // (0,1): never returns exactly 0, so log() below is safe
  double u = (next_u64() >> 11) * 0x1.0p-53;
  return u == 0.0 ? 0x1.0p-53 : u;
}

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::draw(ValueDistribution d) {
  switch (d) {
    case ValueDistribution::Uniform: return uniform();
    case ValueDistribution::Exponential: return -std::log(uniform());
    case ValueDistribution::Lognormal: return std::exp(normal());
    case ValueDistribution::AbsGaussian: return std::abs(normal());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate / generate / bounds

const MarketInstance& validate_instance(const MarketInstance& inst) {
  if (inst.n != inst.values.rows() || inst.m != inst.values.cols() ||
      inst.budgets.size() != inst.n)
    throw DimensionMismatch("instance dimensions are inconsistent");
  for (int i = 0; i < inst.n; ++i)
    if (inst.budgets[i] <= 0.0)
      throw ValidationError(ValidationError::Kind::NonpositiveBudget, i,
                            "budget of buyer " + std::to_string(i) + " is not positive");
  for (int i = 0; i < inst.n; ++i)
    if (inst.values.row_nnz(i) == 0)
      throw ValidationError(ValidationError::Kind::ZeroRow, i,
                            "row " + std::to_string(i) + " of values is all zero");
  for (int j = 0; j < inst.m; ++j)
    if (inst.values.col_nnz(j) == 0)
      throw ValidationError(ValidationError::Kind::ZeroColumn, j,
                            "column " + std::to_string(j) + " of values is all zero");
  bool negative = false;
  inst.values.for_each([&](int, int, double v) { negative |= v < 0.0; });
  if (negative) throw Error("value matrix has a negative entry");
  if (inst.utility_class == UtilityClass::CobbDouglas) {
    for (int i = 0; i < inst.n; ++i) {
      if (std::abs(inst.values.row_l1(i) - 1.0) > 1e-9)
        throw ValidationError(ValidationError::Kind::SimplexViolation, i,
                              "Cobb-Douglas row " + std::to_string(i) +
                                  " does not lie on the unit simplex");
    }
  }
  return inst;
}

MarketInstance generate_instance(const GenerationSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw Error("generation sizes must be >= 1");
  Rng rng(spec.seed);

  Eigen::MatrixXd v(spec.n, spec.m);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.m; ++j) v(i, j) = rng.draw(spec.distribution);

  // Continuous distributions make degeneracy almost surely impossible; the
  // repair loop resamples offending rows/columns a bounded number of times.
  for (int attempt = 0;; ++attempt) {
    bool ok = true;
    for (int i = 0; i < spec.n && ok; ++i)
      if (v.row(i).isZero()) ok = false;
    for (int j = 0; j < spec.m && ok; ++j)
      if (v.col(j).isZero()) ok = false;
    if (ok) break;
    if (attempt >= 100) throw Error("could not generate a nondegenerate instance");
    for (int i = 0; i < spec.n; ++i)
      if (v.row(i).isZero())
        for (int j = 0; j < spec.m; ++j) v(i, j) = rng.draw(spec.distribution);
    for (int j = 0; j < spec.m; ++j)
      if (v.col(j).isZero())
        for (int i = 0; i < spec.n; ++i) v(i, j) = rng.draw(spec.distribution);
  }

  if (spec.utility_class == UtilityClass::CobbDouglas)
    for (int i = 0; i < spec.n; ++i) v.row(i) /= v.row(i).sum();

  Eigen::VectorXd budgets(spec.n);
  if (spec.budget_mode.kind == BudgetMode::Kind::Unit) {
    budgets.setOnes();
  } else {
    // |draw| keeps budgets positive even for heavy-tailed draws
    for (int i = 0; i < spec.n; ++i)
      budgets[i] = spec.budget_mode.offset +
                   spec.budget_mode.scale * std::abs(rng.draw(spec.distribution));
  }

  MarketInstance inst;
  inst.n = spec.n;
  inst.m = spec.m;
  inst.utility_class = spec.utility_class;
  inst.values = ValueMatrix::from_dense(std::move(v));
  inst.budgets = std::move(budgets);
  validate_instance(inst);
  return inst;
}

namespace {

double spectral_norm(const ValueMatrix& a) {
  // power iteration on a^T a, deterministic start
  const int m = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  double sigma = 0;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd ax = Eigen::VectorXd::Zero(a.rows());
    a.for_each([&](int i, int j, double v) { ax[i] += v * x[j]; });
    Eigen::VectorXd atax = Eigen::VectorXd::Zero(m);
    a.for_each([&](int i, int j, double v) { atax[j] += v * ax[i]; });
    double nrm = atax.norm();
    if (nrm == 0) return 0;
    double next = std::sqrt(nrm);
    atax /= nrm;
    if (std::abs(next - sigma) <= 1e-10 * std::max(1.0, next)) {
      sigma = next;
      break;
    }
    sigma = next;
    x = atax;
  }
  return sigma;
}

}  // namespace

EquilibriumBounds equilibrium_bounds(const MarketInstance& inst) {
  EquilibriumBounds b;
  const int n = inst.n, m = inst.m;
  const double btot = inst.budget_total();

  switch (inst.utility_class) {
    case UtilityClass::Linear: {
      b.u_lower.resize(n);
      b.u_upper.resize(n);
      double mu = std::numeric_limits<double>::infinity();
      double L = 0, opn = 0;
      for (int i = 0; i < n; ++i) {
        const double l1 = inst.values.row_l1(i);
        const double Bi = inst.budgets[i];
        b.u_lower[i] = Bi * l1 / btot;
        b.u_upper[i] = l1;
        mu = std::min(mu, Bi / (l1 * l1));
        L = std::max(L, btot * btot * l1 / Bi);
        opn = std::max(opn, inst.values.row_l2(i));
      }
      b.mu = mu;
      b.L = L;
      b.op_norm_A = opn;
      break;
    }
    case UtilityClass::Quasilinear: {
      b.p_lower = Eigen::VectorXd::Zero(m);
      b.p_upper = Eigen::VectorXd::Zero(m);
      inst.values.for_each([&](int i, int j, double v) {
        const double Bi = inst.budgets[i];
        b.p_lower[j] = std::max(b.p_lower[j], v * Bi / (inst.values.row_l1(i) + Bi));
        b.p_upper[j] = std::max(b.p_upper[j], v);
      });
      b.mu = 1.0 / b.p_upper.maxCoeff();
      b.L = 1.0 / b.p_lower.minCoeff();
      // spectral norm of the bid-aggregation map p_j(b) = sum_i b_ij
      b.op_norm_A = std::sqrt(double(n));
      break;
    }
    case UtilityClass::Leontief: {
      b.r_lower.resize(n);
      b.r_upper.resize(n);
      double mu = std::numeric_limits<double>::infinity();
      double L = 0;
      for (int i = 0; i < n; ++i) {
        const double amax = inst.values.row_max(i);
        const double Bi = inst.budgets[i];
        b.r_lower[i] = Bi * amax;
        b.r_upper[i] = btot * amax;
        mu = std::min(mu, Bi / (b.r_upper[i] * b.r_upper[i]));
        L = std::max(L, Bi / (b.r_lower[i] * b.r_lower[i]));
      }
      b.mu = mu;
      b.L = L;
      b.op_norm_A = spectral_norm(inst.values);
      break;
    }
    case UtilityClass::CobbDouglas:
      throw WrongUtilityClass("equilibrium bounds are not defined for Cobb-Douglas");
  }
  return b;
}

// ---------------------------------------------------------------------------
// Text format

void write_instance(std::ostream& os, const MarketInstance& inst) {
  os << "n=" << inst.n << "\n";
  os << "m=" << inst.m << "\n";
  os << "utility=" << to_string(inst.utility_class) << "\n";
  os << "budgets=";
  for (int i = 0; i < inst.n; ++i) {
    if (i) os << ' ';
    os << format_double(inst.budgets[i]);
  }
  os << "\n";
  if (inst.values.is_dense_storage()) {
    os << "dense\n";
    Eigen::MatrixXd d = inst.values.to_dense();
    for (int i = 0; i < inst.n; ++i) {
      for (int j = 0; j < inst.m; ++j) {
        if (j) os << ' ';
        os << format_double(d(i, j));
      }
      os << "\n";
    }
  } else {
    os << "sparse\n";
    os << "nnz=" << inst.values.nnz() << "\n";
    inst.values.for_each([&](int i, int j, double v) {
      os << i << ' ' << j << ' ' << format_double(v) << "\n";
    });
  }
}

MarketInstance read_instance(std::istream& is) {
  auto next_line = [&](std::string& line) {
    if (!std::getline(is, line)) throw ParseError("unexpected end of instance file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto expect_kv = [&](const std::string& key) {
    std::string line;
    next_line(line);
    const std::string prefix = key + "=";
    if (line.rfind(prefix, 0) != 0)
      throw ParseError("expected '" + prefix + "...', got '" + line + "'");
    return line.substr(prefix.size());
  };

  MarketInstance inst;
  inst.n = static_cast<int>(parse_int(expect_kv("n")));
  inst.m = static_cast<int>(parse_int(expect_kv("m")));
  inst.utility_class = utility_class_from_string(expect_kv("utility"));
  {
    const std::string budgets_line = expect_kv("budgets");
    auto toks = split_ws(budgets_line);
    if (static_cast<int>(toks.size()) != inst.n)
      throw ParseError("expected " + std::to_string(inst.n) + " budgets");
    inst.budgets.resize(inst.n);
    for (int i = 0; i < inst.n; ++i) inst.budgets[i] = parse_double(toks[i]);
  }
  std::string body;
  next_line(body);
  if (body == "dense") {
    Eigen::MatrixXd v(inst.n, inst.m);
    std::string line;
    for (int i = 0; i < inst.n; ++i) {
      next_line(line);
      auto toks = split_ws(line);
      if (static_cast<int>(toks.size()) != inst.m)
        throw ParseError("dense row " + std::to_string(i) + " has wrong arity");
      for (int j = 0; j < inst.m; ++j) v(i, j) = parse_double(toks[j]);
    }
    inst.values = ValueMatrix::from_dense(std::move(v));
  } else if (body == "sparse") {
    long nnz = parse_int(expect_kv("nnz"));
    std::vector<ValueMatrix::Entry> entries;
    entries.reserve(nnz);
    std::string line;
    for (long k = 0; k < nnz; ++k) {
      next_line(line);
      auto toks = split_ws(line);
      if (toks.size() != 3) throw ParseError("sparse entry has wrong arity");
      entries.push_back({static_cast<int>(parse_int(toks[0])),
                         static_cast<int>(parse_int(toks[1])),
                         parse_double(toks[2])});
    }
    inst.values = ValueMatrix::from_triplets(inst.n, inst.m, std::move(entries));
  } else {
    throw ParseError("expected 'dense' or 'sparse', got '" + body + "'");
  }
  return inst;
}

void save_instance(const std::string& path, const MarketInstance& inst) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_instance(os, inst);
  if (!os) throw IoError("failed writing " + path);
}

MarketInstance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_instance(is);
}

}  // namespace fisher
