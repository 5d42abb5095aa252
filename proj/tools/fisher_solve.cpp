// Command-line front end: instance generation, experiment runs, equilibrium
// verification, and Hoffman-constant evaluation.
//
// Exit codes: 0 success, 1 validation/parse failure, 2 convergence failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "fisher/bench.hpp"
#include "fisher/errors.hpp"
#include "fisher/hoffman.hpp"
#include "fisher/market.hpp"
#include "fisher/metrics.hpp"
#include "fisher/solvers.hpp"
#include "fisher/text_io.hpp"

namespace {

// A generation request file: same key-value dialect as instances/configs.
// Keys: utility, distribution, budget_mode/budget_scale/budget_offset, n, m,
// seed, count (number of instances, seeds seed..seed+count-1).
struct GenRequest {
  fisher::GenerationSpec spec;
  int count = 1;
};

GenRequest parse_gen_request(std::istream& is) {
  GenRequest req;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw fisher::ParseError("spec line without '=': '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "utility")
      req.spec.utility_class = fisher::utility_class_from_string(value);
    else if (key == "distribution")
      req.spec.distribution = fisher::distribution_from_string(value);
    else if (key == "budget_mode") {
      if (value == "unit")
        req.spec.budget_mode = fisher::BudgetMode::unit();
      else if (value == "random_shifted")
        req.spec.budget_mode.kind = fisher::BudgetMode::Kind::RandomShifted;
      else
        throw fisher::ParseError("unknown budget mode: '" + value + "'");
    } else if (key == "budget_scale")
      req.spec.budget_mode.scale = fisher::parse_double(value);
    else if (key == "budget_offset")
      req.spec.budget_mode.offset = fisher::parse_double(value);
    else if (key == "n")
      req.spec.n = static_cast<int>(fisher::parse_int(value));
    else if (key == "m")
      req.spec.m = static_cast<int>(fisher::parse_int(value));
    else if (key == "seed")
      req.spec.seed = static_cast<std::uint64_t>(fisher::parse_int(value));
    else if (key == "count")
      req.count = static_cast<int>(fisher::parse_int(value));
    else
      throw fisher::ParseError("unknown spec key: '" + key + "'");
  }
  if (req.count < 1) throw fisher::ParseError("count must be >= 1");
  return req;
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw fisher::IoError("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    for (auto f : fisher::split_ws(line)) row.push_back(fisher::parse_double(f));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw fisher::EmptyInput("matrix file has no rows: " + path);
  Eigen::MatrixXd M(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw fisher::ParseError("ragged matrix in " + path);
    for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir) {
  std::ifstream is(spec_path);
  if (!is) throw fisher::IoError("cannot open spec file: " + spec_path);
  const GenRequest req = parse_gen_request(is);
  std::filesystem::create_directories(out_dir);
  for (int k = 0; k < req.count; ++k) {
    fisher::GenerationSpec spec = req.spec;
    spec.seed = req.spec.seed + static_cast<std::uint64_t>(k);
    const fisher::MarketInstance inst = fisher::generate_instance(spec);
    const std::string name = "instance_" + fisher::to_string(spec.utility_class) +
                             "_" + std::to_string(spec.n) + "x" +
                             std::to_string(spec.m) + "_seed" +
                             std::to_string(spec.seed) + ".txt";
    fisher::save_instance((std::filesystem::path(out_dir) / name).string(), inst);
    std::cout << name << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const fisher::ExperimentConfig config = fisher::load_config(config_path);
  const auto summary = fisher::run_experiment(config, out_dir);
  fisher::emit_report(summary, out_dir);
  std::cout << "wrote " << summary.size() << " summary rows to " << out_dir
            << "/summary.csv\n";
  return 0;
}

int cmd_verify(const std::string& instance_path, const std::string& candidate_path,
               double tol) {
  const fisher::MarketInstance inst = fisher::load_instance(instance_path);
  fisher::validate_instance(inst);
  const fisher::EquilibriumCandidate candidate =
      fisher::load_candidate(candidate_path);
  const fisher::VerificationReport report =
      fisher::verify_equilibrium(candidate, inst, tol);
  std::cout << "clearance:     " << report.max_clearance_violation << "\n"
            << "budget:        " << report.max_budget_violation << "\n"
            << "dual:          " << report.max_dual_feasibility_violation << "\n"
            << "comp_slack:    " << report.max_complementary_slackness << "\n"
            << (report.passed ? "PASS" : "FAIL") << " at tol " << tol << "\n";
  return report.passed ? 0 : 2;
}

int cmd_hoffman(const std::string& matrix_path) {
  const Eigen::MatrixXd M = load_matrix(matrix_path);
  const fisher::HoffmanResult result = fisher::hoffman_brute(M);
  std::cout << "H = " << fisher::format_double(result.value) << "\nwitness =";
  for (int i : result.witness) std::cout << ' ' << i;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-market equilibrium solver and benchmark harness"};
  app.require_subcommand(1);

  std::string spec_path, out_dir = ".", config_path, instance_path, candidate_path,
              matrix_path;
  double tol = 1e-6;

  auto* gen = app.add_subcommand("gen", "Generate instances from a spec file");
  gen->add_option("--spec", spec_path, "generation spec file")->required();
  gen->add_option("--out", out_dir, "output directory");

  auto* run = app.add_subcommand("run", "Run a benchmark experiment");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "Verify an equilibrium candidate");
  verify->add_option("--instance", instance_path, "instance file")->required();
  verify->add_option("--candidate", candidate_path, "candidate file")->required();
  verify->add_option("--tol", tol, "verification tolerance");

  auto* hoffman = app.add_subcommand("hoffman", "Hoffman constant of a matrix");
  hoffman->add_option("--matrix", matrix_path, "whitespace-separated matrix file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(spec_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (verify->parsed()) return cmd_verify(instance_path, candidate_path, tol);
    if (hoffman->parsed()) return cmd_hoffman(matrix_path);
  } catch (const fisher::DidNotConverge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fisher::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
