#include "fisher/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fisher/errors.hpp"
#include "fisher/objectives.hpp"
#include "fisher/projections.hpp"
#include "fisher/text_io.hpp"

namespace fisher {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd bid_prices(const Eigen::MatrixXd& b, const MarketInstance& inst) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double) { p[j] += b(i, j); });
  return p;
}

// beta_i = min over valued items of p_j / v_ij; +inf if the buyer values none
Eigen::VectorXd dual_beta(const Eigen::VectorXd& p, const MarketInstance& inst) {
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(inst.n, kInf);
  inst.values.for_each([&](int i, int j, double v) {
    beta[i] = std::min(beta[i], p[j] / v);
  });
  return beta;
}
}  // namespace

Eigen::VectorXd recover_prices_linear(const Eigen::MatrixXd& x, double gamma,
                                      const MarketInstance& inst,
                                      const EquilibriumBounds& bounds) {
  ObjectiveEval eval = eg_linear_eval(x, inst, bounds);
  Eigen::MatrixXd shifted = x - gamma * eval.gradient;
  auto [proj, multipliers] = project_product_simplexes(shifted);
  (void)proj;
  return multipliers / gamma;
}

double duality_gap_linear(const EquilibriumCandidate& candidate,
                          const MarketInstance& inst) {
  if (candidate.bids) {
    // Bid-space route: the Lagrangian of the bid program with row multipliers
    // lambda_i = 1 + log beta_i gives the lower bound
    //   g(lambda) = sum_i B_i lambda_i - sum_j max_i v_ij beta_i,
    // which meets the primal value at equilibrium.
    const Eigen::MatrixXd& b = *candidate.bids;
    const double primal = shmyrev_linear_value(b, inst);
    const Eigen::VectorXd p = bid_prices(b, inst);
    const Eigen::VectorXd beta = dual_beta(p, inst);
    double bound = 0;
    for (int i = 0; i < inst.n; ++i) {
      if (!(beta[i] > 0.0) || !std::isfinite(beta[i])) return kInf;
      bound += inst.budgets[i] * (1.0 + std::log(beta[i]));
    }
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(inst.m);
    inst.values.for_each([&](int i, int j, double v) {
      colmax[j] = std::max(colmax[j], v * beta[i]);
    });
    return primal - (bound - colmax.sum());
  }
  if (!candidate.allocation)
    throw Error("duality_gap_linear: candidate has neither bids nor allocation");

  // Allocation route: primal -sum B_i log<v_i, x_i> against the dual value
  //   g(p) = sum_j p_j - sum_i B_i (1 - log B_i) - sum_i B_i log beta_i
  // with beta_i = min_j p_j / v_ij.
  const Eigen::MatrixXd& x = *candidate.allocation;
  double primal = 0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double v) { u[i] += v * x(i, j); });
  for (int i = 0; i < inst.n; ++i) {
    if (u[i] <= 0.0) throw ZeroUtility(i, "duality_gap_linear: zero utility");
    primal -= inst.budgets[i] * std::log(u[i]);
  }
  // Tighten the dual point before scoring it: re-derive prices from beta
  // (p'_j = max_i v_ij beta_i <= p_j keeps beta feasible and lowers sum p),
  // then scale (p', beta) by the optimal c = ||B||_1 / sum p'. Both moves
  // only improve the dual value, which matters when the supplied prices
  // carry projection noise near the optimum.
  const Eigen::VectorXd beta = dual_beta(candidate.prices, inst);
  for (int i = 0; i < inst.n; ++i)
    if (!(beta[i] > 0.0) || !std::isfinite(beta[i])) return kInf;
  Eigen::VectorXd tightened = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double v) {
    tightened[j] = std::max(tightened[j], v * beta[i]);
  });
  const double c = inst.budget_total() / tightened.sum();
  double dual = c * tightened.sum();
  for (int i = 0; i < inst.n; ++i) {
    const double Bi = inst.budgets[i];
    dual += Bi * (std::log(Bi) - 1.0) - Bi * std::log(c * beta[i]);
  }
  return primal + dual;
}

double duality_gap_ql(const Eigen::MatrixXd& b, const Eigen::VectorXd& delta,
                      const MarketInstance& inst) {
  (void)delta;  // the bound depends on bids only
  // Same Lagrangian construction as the linear bid route, with the leftover
  // slot forcing lambda_i <= 0, i.e. beta_i clipped at 1.
  const double primal = ql_shmyrev_raw_value(b, inst);
  const Eigen::VectorXd p = bid_prices(b, inst);
  const Eigen::VectorXd beta = dual_beta(p, inst);
  for (int i = 0; i < inst.n; ++i)
    if (!(beta[i] > 0.0) || !std::isfinite(beta[i])) return kInf;
  // min{c beta_i, 1} is dual-feasible for every c > 0, so score the best
  // scaling instead of c = 1. Near the optimum the raw beta can be off by a
  // common factor (price noise moves every beta_i together), and rescaling
  // tightens the bound by several orders of magnitude. The value is unimodal
  // in c, so a golden-section pass pins it down.
  auto dual_value = [&](double c) {
    double bound = 0;
    Eigen::VectorXd clipped(inst.n);
    for (int i = 0; i < inst.n; ++i) {
      clipped[i] = std::min(c * beta[i], 1.0);
      bound += inst.budgets[i] * std::log(clipped[i]);
    }
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(inst.m);
    inst.values.for_each([&](int i, int j, double v) {
      colmax[j] = std::max(colmax[j], v * clipped[i]);
    });
    return bound - colmax.sum();
  };
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.5, hi = 2.0;
  double a = hi - golden * (hi - lo), b2 = lo + golden * (hi - lo);
  double fa = dual_value(a), fb = dual_value(b2);
  for (int it = 0; it < 90; ++it) {
    if (fa < fb) {
      lo = a;
      a = b2;
      fa = fb;
      b2 = lo + golden * (hi - lo);
      fb = dual_value(b2);
    } else {
      hi = b2;
      b2 = a;
      fb = fa;
      a = hi - golden * (hi - lo);
      fa = dual_value(a);
    }
  }
  return primal - std::max({dual_value(1.0), fa, fb});
}

Eigen::VectorXd leontief_utilities_from_prices(const Eigen::VectorXd& p,
                                               const MarketInstance& inst) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double a) { r[i] += a * p[j]; });
  Eigen::VectorXd u_tilde(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    if (r[i] <= 0.0)
      throw ZeroDotProduct(i, "leontief utilities: <a_i, p> is not positive");
    u_tilde[i] = inst.budgets[i] / r[i];
  }
  // normalize so that sum_i u_i a_ij <= 1 for all j
  Eigen::VectorXd col_load = Eigen::VectorXd::Zero(inst.m);
  inst.values.for_each([&](int i, int j, double a) { col_load[j] += a * u_tilde[i]; });
  const double scale = col_load.maxCoeff();
  return u_tilde / scale;
}

double duality_gap_leontief(const Eigen::VectorXd& p, const MarketInstance& inst) {
  Eigen::VectorXd u = leontief_utilities_from_prices(p, inst);
  double primal = 0;
  for (int i = 0; i < inst.n; ++i) primal -= inst.budgets[i] * std::log(u[i]);

  Eigen::VectorXd r = Eigen::VectorXd::Zero(inst.n);
  inst.values.for_each([&](int i, int j, double a) { r[i] += a * p[j]; });
  double dual = -p.sum();
  for (int i = 0; i < inst.n; ++i) {
    const double Bi = inst.budgets[i];
    dual += Bi * std::log(r[i]) + Bi * (1.0 - std::log(Bi));
  }
  return primal - dual;
}

double relative_price_error(const Eigen::VectorXd& p, const Eigen::VectorXd& p_ref) {
  if (p.size() != p_ref.size())
    throw DimensionMismatch("relative_price_error: size mismatch");
  double err = 0;
  for (int j = 0; j < p.size(); ++j)
    err = std::max(err, std::abs(p[j] - p_ref[j]) / p_ref[j]);
  return err;
}

VerificationReport verify_equilibrium(const EquilibriumCandidate& candidate,
                                      const MarketInstance& inst, double tol) {
  if (!candidate.allocation)
    throw Error("verify_equilibrium: candidate is missing the allocation");
  if (candidate.prices.size() != inst.m)
    throw Error("verify_equilibrium: candidate is missing prices");
  const Eigen::MatrixXd& x = *candidate.allocation;
  const Eigen::VectorXd& p = candidate.prices;
  const double price_unit = inst.budget_total() / inst.m;
  const double active_price = tol * price_unit;

  VerificationReport rep;

  // (a) market clearance, with equality on positively priced items
  for (int j = 0; j < inst.m; ++j) {
    const double supply = x.col(j).sum();
    rep.max_clearance_violation =
        std::max(rep.max_clearance_violation, supply - 1.0);
    if (p[j] > active_price)
      rep.max_clearance_violation =
          std::max(rep.max_clearance_violation, std::abs(supply - 1.0));
    // (d) complementary slackness: price-weighted leftover supply
    rep.max_complementary_slackness =
        std::max(rep.max_complementary_slackness,
                 p[j] * std::max(1.0 - supply, 0.0) / price_unit);
  }

  // utilities: prefer the candidate's, else compute per class
  Eigen::VectorXd u;
  if (candidate.utilities) {
    u = *candidate.utilities;
  } else {
    u = Eigen::VectorXd::Zero(inst.n);
    if (inst.utility_class == UtilityClass::Leontief) {
      u.setConstant(kInf);
      inst.values.for_each(
          [&](int i, int j, double a) { u[i] = std::min(u[i], x(i, j) / a); });
    } else {
      inst.values.for_each([&](int i, int j, double v) { u[i] += v * x(i, j); });
    }
  }

  // (b) budget exhaustion
  for (int i = 0; i < inst.n; ++i) {
    double spend = p.dot(x.row(i).transpose());
    if (inst.utility_class == UtilityClass::Quasilinear) {
      const double leftover = candidate.leftovers
                                  ? (*candidate.leftovers)[i]
                                  : std::max(inst.budgets[i] - spend, 0.0);
      spend += leftover;
    }
    rep.max_budget_violation =
        std::max(rep.max_budget_violation,
                 std::abs(spend - inst.budgets[i]) / inst.budgets[i]);
  }

  // (c) buyer optimality via dual feasibility
  switch (inst.utility_class) {
    case UtilityClass::Linear:
    case UtilityClass::Quasilinear: {
      for (int i = 0; i < inst.n; ++i) {
        double ui = u[i];
        if (inst.utility_class == UtilityClass::Quasilinear) {
          // EG-form utility: item value plus leftover money
          double lin = 0;
          inst.values.for_each_in_row(
              i, [&](int j, double v) { lin += v * x(i, j); });
          const double spend = p.dot(x.row(i).transpose());
          const double leftover = candidate.leftovers
                                      ? (*candidate.leftovers)[i]
                                      : std::max(inst.budgets[i] - spend, 0.0);
          ui = lin + leftover;
        }
        if (ui <= 0.0) {
          rep.max_dual_feasibility_violation = kInf;
          continue;
        }
        const double beta = inst.budgets[i] / ui;
        if (inst.utility_class == UtilityClass::Quasilinear)
          rep.max_dual_feasibility_violation =
              std::max(rep.max_dual_feasibility_violation, beta - 1.0);
        inst.values.for_each_in_row(i, [&](int j, double v) {
          rep.max_dual_feasibility_violation =
              std::max(rep.max_dual_feasibility_violation,
                       (v * beta - p[j]) / price_unit);
        });
      }
      break;
    }
    case UtilityClass::Leontief: {
      for (int i = 0; i < inst.n; ++i) {
        double r = 0;
        inst.values.for_each_in_row(i, [&](int j, double a) { r += a * p[j]; });
        rep.max_dual_feasibility_violation =
            std::max(rep.max_dual_feasibility_violation,
                     std::abs(u[i] * r - inst.budgets[i]) / inst.budgets[i]);
      }
      break;
    }
    case UtilityClass::CobbDouglas: {
      // buyer optimality: x_ij p_j = B_i lambda_ij on the support
      inst.values.for_each([&](int i, int j, double lam) {
        rep.max_dual_feasibility_violation =
            std::max(rep.max_dual_feasibility_violation,
                     std::abs(x(i, j) * p[j] - inst.budgets[i] * lam) /
                         inst.budgets[i]);
      });
      break;
    }
  }

  rep.passed = rep.max_clearance_violation <= tol &&
               rep.max_budget_violation <= tol &&
               rep.max_dual_feasibility_violation <= tol &&
               rep.max_complementary_slackness <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Candidate io

namespace {
void write_vector(std::ostream& os, const char* key, const Eigen::VectorXd& v) {
  os << key << '=';
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_double(v[i]);
  }
  os << '\n';
}

void write_matrix(std::ostream& os, const char* key, const Eigen::MatrixXd& m) {
  os << key << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}
}  // namespace

void write_candidate(std::ostream& os, const EquilibriumCandidate& c, int n, int m) {
  os << "n=" << n << "\n";
  os << "m=" << m << "\n";
  write_vector(os, "prices", c.prices);
  if (c.utilities) write_vector(os, "utilities", *c.utilities);
  if (c.leftovers) write_vector(os, "leftovers", *c.leftovers);
  if (c.allocation) write_matrix(os, "allocation", *c.allocation);
  if (c.bids) write_matrix(os, "bids", *c.bids);
}

EquilibriumCandidate read_candidate(std::istream& is) {
  EquilibriumCandidate c;
  std::string line;
  int n = -1, m = -1;
  auto parse_vec = [&](std::string_view payload, int expect) {
    auto toks = split_ws(payload);
    if (expect >= 0 && static_cast<int>(toks.size()) != expect)
      throw ParseError("candidate vector has wrong arity");
    Eigen::VectorXd v(static_cast<int>(toks.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = parse_double(toks[i]);
    return v;
  };
  auto parse_mat = [&]() {
    if (n < 0 || m < 0) throw ParseError("candidate matrix before n=/m=");
    Eigen::MatrixXd mat(n, m);
    for (int i = 0; i < n; ++i) {
      if (!std::getline(is, line)) throw ParseError("truncated candidate matrix");
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto toks = split_ws(line);
      if (static_cast<int>(toks.size()) != m)
        throw ParseError("candidate matrix row has wrong arity");
      for (int j = 0; j < m; ++j) mat(i, j) = parse_double(toks[j]);
    }
    return mat;
  };

  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (line == "allocation") {
      c.allocation = parse_mat();
    } else if (line == "bids") {
      c.bids = parse_mat();
    } else if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      std::string_view payload = std::string_view(line).substr(eq + 1);
      if (key == "n")
        n = static_cast<int>(parse_int(payload));
      else if (key == "m")
        m = static_cast<int>(parse_int(payload));
      else if (key == "prices")
        c.prices = parse_vec(payload, m);
      else if (key == "utilities")
        c.utilities = parse_vec(payload, n);
      else if (key == "leftovers")
        c.leftovers = parse_vec(payload, n);
      else
        throw ParseError("unknown candidate key: " + key);
    } else {
      throw ParseError("bad candidate line: '" + line + "'");
    }
  }
  return c;
}

void save_candidate(const std::string& path, const EquilibriumCandidate& c, int n,
                    int m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_candidate(os, c, n, m);
}

EquilibriumCandidate load_candidate(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_candidate(is);
}

}  // namespace fisher
