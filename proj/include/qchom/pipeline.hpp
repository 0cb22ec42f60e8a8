#ifndef QCHOM_PIPELINE_HPP
#define QCHOM_PIPELINE_HPP

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchom/cellsolve.hpp"
#include "qchom/effective.hpp"
#include "qchom/material.hpp"
#include "qchom/projection.hpp"

namespace qchom {

enum ExitCode : int {
  kExitOk = 0,
  kExitCriterionViolation = 2,
  kExitSolverFailure = 3,
  kExitIoFailure = 4,
  kExitUsage = 64,
};

enum class ProblemKind { conductivity, elasticity, quasistatic_magnetic };

inline std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::conductivity: return "conductivity";
    case ProblemKind::elasticity: return "elasticity";
    case ProblemKind::quasistatic_magnetic: return "quasistatic_magnetic";
  }
  return "?";
}

struct RunConfig {
  ProblemKind problem = ProblemKind::conductivity;
  nlohmann::json projection;  // builtin name (string) or matrix document
  nlohmann::json material;    // {"builtin": ...} or {"dump": path}
  int grid_n = 16;
  int criterion_kmax = 10;
  SolverConfig solver;
  std::filesystem::path outputs = "out";
  std::uint64_t seed = 1;
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  const std::string prob = j.at("problem").get<std::string>();
  if (prob == "conductivity")
    cfg.problem = ProblemKind::conductivity;
  else if (prob == "elasticity")
    cfg.problem = ProblemKind::elasticity;
  else if (prob == "quasistatic_magnetic")
    cfg.problem = ProblemKind::quasistatic_magnetic;
  else
    throw std::invalid_argument("unknown problem: " + prob);
  cfg.projection = j.at("projection");
  cfg.material = j.at("material");
  cfg.grid_n = j.at("grid_N").get<int>();
  if (cfg.grid_n < 4 || cfg.grid_n % 2 != 0)
    throw std::invalid_argument("grid_N must be even and >= 4");
  cfg.criterion_kmax = j.value("criterion_kmax", 10);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.tol = s.value("tol", 1e-8);
    cfg.solver.max_iter = s.value("max_iter", 10000);
    cfg.solver.reference = s.value("reference", 0.0);
    cfg.solver.alpha = s.value("alpha", 0.0);
    const std::string acc = s.value("acceleration", "none");
    if (acc == "none")
      cfg.solver.acceleration = SolverConfig::Acceleration::none;
    else if (acc == "cg" || acc == "conjugate_gradient")
      cfg.solver.acceleration = SolverConfig::Acceleration::conjugate_gradient;
    else
      throw std::invalid_argument("unknown acceleration: " + acc);
  }
  if (j.contains("outputs"))
    cfg.outputs = j.at("outputs").get<std::string>();
  cfg.seed = j.value("seed", std::uint64_t{1});
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  is >> j;
  return parse_run_config(j);
}

inline ProjectionMatrix build_projection(const nlohmann::json& spec) {
  if (spec.is_string()) {
    const std::string name = spec.get<std::string>();
    if (name == "fibonacci2") return ProjectionMatrix::fibonacci2();
    if (name == "penrose4") return ProjectionMatrix::penrose4();
    throw std::invalid_argument("unknown builtin projection: " + name);
  }
  if (spec.is_object() && spec.contains("path")) {
    std::ifstream is(spec.at("path").get<std::string>());
    if (!is)
      throw IoError("cannot open projection file " +
                    spec.at("path").get<std::string>());
    nlohmann::json j;
    is >> j;
    return projection_from_json(j);
  }
  return projection_from_json(spec);
}

/// Builds the coefficient field named by the config. `n` is the physical
/// dimension of the problem being run.
inline MaterialField build_material(const nlohmann::json& spec,
                                    const Grid& grid, ProblemKind problem,
                                    int n, std::uint64_t seed) {
  const MaterialKind kind =
      problem == ProblemKind::elasticity ? MaterialKind::elasticity
      : problem == ProblemKind::quasistatic_magnetic
          ? MaterialKind::inverse_permittivity
          : MaterialKind::scalar_conductivity;
  if (spec.contains("dump"))
    return material_from_dump(kind, spec.at("dump").get<std::string>(), n);
  const std::string name = spec.at("builtin").get<std::string>();
  if (kind == MaterialKind::elasticity) {
    if (name == "constant") {
      const double lambda = spec.value("lambda", 1.0);
      const double mu = spec.value("mu", 1.0);
      return constant_tensor_material(grid, kind,
                                      isotropic_stiffness_mandel(n, lambda, mu));
    }
    if (name == "isotropic_two_phase") {
      const double mu_a = spec.value("mu_a", 1.0);
      const double mu_b = spec.value("mu_b", 4.0);
      const double lambda_a = spec.value("lambda_a", 1.0);
      const double lambda_b = spec.value("lambda_b", 4.0);
      const int m = grid.dim();
      auto blend = [m](const std::vector<double>& y) {
        double c = 0.0;
        for (int j = 0; j < m; ++j)
          c += std::cos(2.0 * std::numbers::pi * y[j]);
        return 0.5 * (1.0 + c / m);
      };
      return isotropic_elasticity_material(
          grid, n,
          [&](const std::vector<double>& y) {
            return lambda_a + (lambda_b - lambda_a) * blend(y);
          },
          [&](const std::vector<double>& y) {
            return mu_a + (mu_b - mu_a) * blend(y);
          });
    }
    throw std::invalid_argument("unknown elastic material builtin: " + name);
  }
  if (name == "constant")
    return constant_scalar_material(grid, kind, n, spec.value("value", 1.0));
  if (name == "cosine_laminate") return cosine_laminate_material(grid, kind, n);
  if (name == "fibonacci_checkerboard")
    return fibonacci_checkerboard_material(grid, kind, n,
                                           spec.value("sigma_a", 1.0),
                                           spec.value("sigma_b", 10.0));
  if (name == "smooth_two_phase")
    return smooth_two_phase_material(grid, kind, n,
                                     spec.value("sigma_a", 1.0),
                                     spec.value("sigma_b", 4.0));
  if (name == "random_smooth") {
    // Band-limited random positive coefficient; the seed pins it exactly.
    PeriodicField base = random_real_field(grid, FieldRank::scalar, 1,
                                           seed, /*zero_mean=*/false);
    double lo = 0.0;
    for (const auto& z : base.samples(0)) lo = std::min(lo, z.real());
    const double floor_val = spec.value("floor", 1.0);
    PeriodicField::Plane plane(grid.total());
    for (std::size_t p = 0; p < grid.total(); ++p)
      plane[p] = base.samples(0)[p].real() - lo + floor_val;
    std::vector<PeriodicField::Plane> planes{std::move(plane)};
    return make_material(kind,
                         PeriodicField::from_samples(grid, FieldRank::scalar,
                                                     std::move(planes)),
                         n);
  }
  throw std::invalid_argument("unknown material builtin: " + name);
}

inline int thread_cap() {
  if (const char* env = std::getenv("QCHOM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

/// Runs the cell solves of a problem, fanning out over directions up to
/// the QCHOM_THREADS cap. Results are ordered by direction either way.
inline std::vector<CellSolution> solve_all(ProblemKind problem,
                                           const MaterialField& mat,
                                           const ProjectionMatrix& R,
                                           const SolverConfig& cfg) {
  const int n = R.cols();
  std::vector<std::function<CellSolution()>> jobs;
  switch (problem) {
    case ProblemKind::conductivity:
      for (int k = 0; k < n; ++k)
        jobs.push_back([&, k] { return solve_scalar_cell(mat, k, R, cfg); });
      break;
    case ProblemKind::elasticity:
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          jobs.push_back(
              [&, k, l] { return solve_elastic_cell(mat, {k, l}, R, cfg); });
      break;
    case ProblemKind::quasistatic_magnetic:
      for (int k = 0; k < 3; ++k)
        jobs.push_back([&, k] { return solve_curl_cell(mat, k, R, cfg); });
      break;
  }

  std::vector<CellSolution> out;
  out.reserve(jobs.size());
  const int cap = thread_cap();
  if (cap <= 1) {
    for (auto& job : jobs) out.push_back(job());
    return out;
  }
  std::vector<std::future<CellSolution>> futures;
  futures.reserve(jobs.size());
  std::size_t next = 0;
  while (next < jobs.size() || !futures.empty()) {
    while (next < jobs.size() &&
           futures.size() < static_cast<std::size_t>(cap))
      futures.push_back(std::async(std::launch::async, jobs[next++]));
    out.push_back(futures.front().get());
    futures.erase(futures.begin());
  }
  return out;
}

inline EffectiveTensor assemble_effective(ProblemKind problem,
                                          const MaterialField& mat,
                                          const std::vector<CellSolution>& sols,
                                          const ProjectionMatrix& R) {
  switch (problem) {
    case ProblemKind::conductivity:
      return effective_conductivity(mat, sols, R);
    case ProblemKind::elasticity:
      return effective_elasticity(mat, sols, R);
    case ProblemKind::quasistatic_magnetic:
      return effective_inverse_permittivity(mat, sols, R);
  }
  throw std::logic_error("unreachable");
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_tensor_csv(const EffectiveTensor& t,
                             const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os << "i,j,value\n";
  for (int i = 0; i < t.entries.rows(); ++i)
    for (int j = 0; j < t.entries.cols(); ++j)
      os << i << "," << j << "," << format_g17(t.entries(i, j)) << "\n";
  if (!os) throw IoError("write failed: " + path.string());
}

inline nlohmann::ordered_json criterion_to_json(const CriterionReport& r) {
  nlohmann::ordered_json j;
  j["k_max"] = r.k_max;
  j["violations"] = r.violations;
  j["min_norm"] = r.min_norm;
  j["certified_exact"] = r.certified_exact;
  return j;
}

inline nlohmann::ordered_json solution_to_json(const CellSolution& s) {
  nlohmann::ordered_json j;
  j["direction"] = s.direction;
  j["iterations"] = s.iterations;
  j["residual_history"] = s.residual_history;
  j["min_xi_norm"] = s.min_xi_norm;
  j["reference"] = s.reference;
  return j;
}

/// Full pipeline: criterion scan, per-direction cell solves, tensor
/// assembly, reports. Returns a process exit code; failures are logged to
/// `log`. Reports carry no timestamps, so identical configs produce
/// byte-identical files.
inline int run_pipeline(const RunConfig& cfg, std::ostream& log,
                        bool quiet = false) {
  try {
    ProjectionMatrix R = build_projection(cfg.projection);
    CriterionReport crit = check_criterion(R, cfg.criterion_kmax);
    if (!crit.violations.empty()) {
      log << "criterion violated at k =";
      for (const auto& k : crit.violations) {
        log << " (";
        for (std::size_t i = 0; i < k.size(); ++i)
          log << (i ? "," : "") << k[i];
        log << ")";
      }
      log << "\n";
      return kExitCriterionViolation;
    }

    const int n = R.cols();
    if (cfg.problem == ProblemKind::quasistatic_magnetic && n != 3) {
      log << "quasistatic_magnetic requires a projection with n = 3\n";
      return kExitIoFailure;
    }
    Grid grid(R.rows(), cfg.grid_n);
    MaterialField mat =
        build_material(cfg.material, grid, cfg.problem, n, cfg.seed);

    std::vector<CellSolution> sols;
    try {
      sols = solve_all(cfg.problem, mat, R, cfg.solver);
    } catch (const ConvergenceError& e) {
      log << "solver failed: " << e.what() << "\n";
      if (!e.residual_history.empty()) {
        log << "last residuals:";
        std::size_t from = e.residual_history.size() > 5
                               ? e.residual_history.size() - 5
                               : 0;
        for (std::size_t i = from; i < e.residual_history.size(); ++i)
          log << " " << e.residual_history[i];
        log << "\n";
      }
      return kExitSolverFailure;
    }
    EffectiveTensor eff = assemble_effective(cfg.problem, mat, sols, R);

    namespace fs = std::filesystem;
    fs::create_directories(cfg.outputs / "fields");
    nlohmann::ordered_json report;
    report["problem"] = to_string(cfg.problem);
    report["projection"] = to_json(R);
    report["grid_N"] = cfg.grid_n;
    report["seed"] = cfg.seed;
    report["criterion"] = criterion_to_json(crit);
    report["material"] = {{"kind", to_string(mat.kind)},
                          {"c_min", mat.c_min},
                          {"c_max", mat.c_max}};
    report["effective"] = to_json(eff);
    auto sol_list = nlohmann::ordered_json::array();
    for (const auto& s : sols) {
      sol_list.push_back(solution_to_json(s));
      write_field_dump(s.corrector,
                       cfg.outputs / "fields" /
                           ("corrector_" + std::to_string(s.direction)));
    }
    report["solutions"] = sol_list;

    std::ofstream os(cfg.outputs / "report.json");
    if (!os) throw IoError("cannot open report.json for writing");
    os << report.dump(2) << "\n";
    write_tensor_csv(eff, cfg.outputs / "tensors.csv");

    if (!quiet) {
      log << "effective " << to_string(eff.kind) << " ("
          << eff.entries.rows() << "x" << eff.entries.cols() << ")\n"
          << eff.entries << "\n"
          << "symmetry defect " << eff.symmetry_defect
          << ", min eigenvalue " << eff.min_eigenvalue << "\n";
      if (!sols.empty() && sols.front().min_xi_norm < 1e-3)
        log << "warning: min |R^T k| = " << sols.front().min_xi_norm
            << " at this grid; the projected Green operator is poorly "
               "conditioned\n";
    }
    return kExitOk;
  } catch (const IoError& e) {
    log << "io error: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return kExitIoFailure;
  }
}

}  // namespace qchom

#endif
