// Command-line front end: criterion scans, quasicrystal generators, cell
// solves, effective tensors, and the 1D convergence / ergodic studies.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qchom/qchom.hpp"

namespace fs = std::filesystem;
using namespace qchom;

namespace {

ProjectionMatrix projection_from_flags(const std::string& builtin,
                                       const std::string& matrix_path) {
  if (!matrix_path.empty()) {
    std::ifstream is(matrix_path);
    if (!is) throw IoError("cannot open matrix file " + matrix_path);
    nlohmann::json j;
    is >> j;
    return projection_from_json(j);
  }
  nlohmann::json j = builtin;
  return build_projection(j);
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw IoError("cannot open " + (dir / name).string());
  return os;
}

/// Random trigonometric polynomial on Y^2 with modes |k|_inf <= 2 and a
/// fixed unit mean, used by the ergodic subcommand.
PeriodicField ergodic_test_polynomial(std::uint64_t seed) {
  Grid grid(2, 8);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.3);
  PeriodicField::Plane plane(grid.total());
  for (std::size_t flat = 0; flat < grid.total(); ++flat) {
    auto k = grid.mode_multi_index(flat);
    if (std::abs(k[0]) > 2 || std::abs(k[1]) > 2) continue;
    plane[flat] = {gauss(rng), gauss(rng)};
  }
  // Hermitian part, then pin the mean at 1.
  PeriodicField::Plane sym(grid.total());
  for (std::size_t flat = 0; flat < grid.total(); ++flat) {
    auto k = grid.mode_multi_index(flat);
    std::vector<int> neg(2);
    for (int j = 0; j < 2; ++j) neg[j] = grid.index_of_mode(-k[j]);
    sym[flat] = 0.5 * (plane[flat] + std::conj(plane[grid.flatten(neg)]));
  }
  sym[0] = 1.0;
  std::vector<PeriodicField::Plane> planes{std::move(sym)};
  return PeriodicField::from_coefficients(grid, FieldRank::scalar,
                                          std::move(planes));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qchom: effective tensors of quasiperiodic composites via "
               "cut-and-projection cell problems"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress output");

  // --- run ---------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "full pipeline from a config");
  std::string run_config;
  std::string run_out;
  cmd_run->add_option("--config", run_config, "run config (JSON)")
      ->required();
  cmd_run->add_option("--out", run_out, "override output directory");

  // --- criterion ----------------------------------------------------------
  auto* cmd_crit =
      app.add_subcommand("criterion", "scan R^T k over a finite box");
  std::string crit_builtin = "fibonacci2";
  std::string crit_matrix;
  int crit_kmax = 50;
  std::string crit_format = "text";
  cmd_crit->add_option("--builtin", crit_builtin,
                       "builtin projection {fibonacci2, penrose4}");
  cmd_crit->add_option("--matrix", crit_matrix, "projection JSON file");
  cmd_crit->add_option("--kmax", crit_kmax, "sup-norm scan bound")
      ->check(CLI::PositiveNumber);
  cmd_crit->add_option("--format", crit_format, "text or json");

  // --- fibonacci ----------------------------------------------------------
  auto* cmd_fib = app.add_subcommand("fibonacci", "quasicrystal words");
  int fib_length = 18;
  bool fib_cut = false;
  double fib_ratio = kGoldenRatio;
  double fib_offset = 0.0;
  cmd_fib->add_option("--length", fib_length, "letters to emit")
      ->check(CLI::PositiveNumber);
  cmd_fib->add_flag("--cut", fib_cut,
                    "use the geometric cut instead of the substitution");
  cmd_fib->add_option("--ratio", fib_ratio, "interval length ratio A/B");
  cmd_fib->add_option("--offset", fib_offset, "cut offset in the unit cell");

  // --- cell ----------------------------------------------------------------
  auto* cmd_cell = app.add_subcommand("cell", "single cell solve");
  std::string cell_config;
  std::string cell_out = "out";
  int cell_direction = 0;
  cmd_cell->add_option("--config", cell_config, "run config (JSON)")
      ->required();
  cmd_cell->add_option("--direction", cell_direction,
                       "load direction (0-based; elastic: k*n+l)");
  cmd_cell->add_option("--out", cell_out, "output directory");

  // --- effective ------------------------------------------------------------
  auto* cmd_eff =
      app.add_subcommand("effective", "all cell solves + tensor assembly");
  std::string eff_config;
  std::string eff_out;
  cmd_eff->add_option("--config", eff_config, "run config (JSON)")
      ->required();
  cmd_eff->add_option("--out", eff_out, "override output directory");

  // --- converge --------------------------------------------------------------
  auto* cmd_conv = app.add_subcommand(
      "converge", "1D fine-scale ladder against the homogenized limit");
  std::string conv_etas = "0.1,0.05,0.025";
  std::string conv_out = "out";
  int conv_grid = 64;
  int conv_meshfac = 40;
  bool conv_fibonacci = false;
  cmd_conv->add_option("--etas", conv_etas, "comma-separated eta ladder");
  cmd_conv->add_option("--grid", conv_grid, "cell grid N for the corrector");
  cmd_conv->add_option("--mesh-factor", conv_meshfac,
                       "fine mesh M = ceil(factor/eta)");
  cmd_conv->add_flag("--fibonacci", conv_fibonacci,
                     "use the discontinuous Fibonacci two-phase laminate");
  cmd_conv->add_option("--out", conv_out, "output directory");

  // --- ergodic -----------------------------------------------------------------
  auto* cmd_erg = app.add_subcommand(
      "ergodic", "box averages of a quasiperiodic trace vs the cell mean");
  std::string erg_a = "10,100,1000";
  long erg_samples = 200000;
  std::uint64_t erg_seed = 7;
  std::string erg_out = "out";
  cmd_erg->add_option("--A", erg_a, "comma-separated box half-widths");
  cmd_erg->add_option("--samples", erg_samples, "samples per axis");
  cmd_erg->add_option("--seed", erg_seed, "trig polynomial seed");
  cmd_erg->add_option("--out", erg_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_run->parsed() || cmd_eff->parsed()) {
      const std::string cfg_path = cmd_run->parsed() ? run_config : eff_config;
      const std::string out_override = cmd_run->parsed() ? run_out : eff_out;
      RunConfig cfg = load_run_config(cfg_path);
      if (!out_override.empty()) cfg.outputs = out_override;
      std::ostringstream sink;
      std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cout;
      int code = run_pipeline(cfg, log, quiet);
      if (quiet && code != kExitOk) std::cerr << sink.str();
      return code;
    }

    if (cmd_crit->parsed()) {
      ProjectionMatrix R = projection_from_flags(crit_builtin, crit_matrix);
      CriterionReport rep = check_criterion(R, crit_kmax);
      if (crit_format == "json") {
        std::cout << criterion_to_json(rep).dump(2) << "\n";
      } else {
        std::cout << "min_norm " << format_g17(rep.min_norm) << " over |k|_inf <= "
                  << rep.k_max
                  << (rep.certified_exact ? " (exact arithmetic)" : "")
                  << "\n";
        for (const auto& k : rep.violations) {
          std::cout << "violation at k = (";
          for (std::size_t i = 0; i < k.size(); ++i)
            std::cout << (i ? "," : "") << k[i];
          std::cout << ")\n";
        }
      }
      return rep.violations.empty() ? kExitOk : kExitCriterionViolation;
    }

    if (cmd_fib->parsed()) {
      std::cout << (fib_cut ? cut_sequence(fib_ratio, fib_length, fib_offset)
                            : fibonacci_word(fib_length))
                << "\n";
      return kExitOk;
    }

    if (cmd_cell->parsed()) {
      RunConfig cfg = load_run_config(cell_config);
      cfg.outputs = cell_out;
      ProjectionMatrix R = build_projection(cfg.projection);
      const int n = R.cols();
      Grid grid(R.rows(), cfg.grid_n);
      MaterialField mat =
          build_material(cfg.material, grid, cfg.problem, n, cfg.seed);
      CellSolution sol = [&] {
        switch (cfg.problem) {
          case ProblemKind::elasticity:
            return solve_elastic_cell(
                mat, {cell_direction / n, cell_direction % n}, R, cfg.solver);
          case ProblemKind::quasistatic_magnetic:
            return solve_curl_cell(mat, cell_direction, R, cfg.solver);
          default:
            return solve_scalar_cell(mat, cell_direction, R, cfg.solver);
        }
      }();
      fs::create_directories(cfg.outputs / "fields");
      write_field_dump(sol.corrector,
                       cfg.outputs / "fields" /
                           ("corrector_" + std::to_string(sol.direction)));
      auto os = open_out(cfg.outputs, "cell.json");
      os << solution_to_json(sol).dump(2) << "\n";
      if (!quiet)
        std::cout << "direction " << sol.direction << ": " << sol.iterations
                  << " iterations, residual "
                  << sol.residual_history.back() << "\n";
      return kExitOk;
    }

    if (cmd_conv->parsed()) {
      ProjectionMatrix R = ProjectionMatrix::fibonacci2();
      Grid grid(2, conv_grid);
      MaterialField mat =
          conv_fibonacci
              ? fibonacci_checkerboard_material(
                    grid, MaterialKind::scalar_conductivity, 1, 1.0, 10.0)
              : scalar_material_from_function(
                    grid, MaterialKind::scalar_conductivity, 1,
                    [](const std::vector<double>& y) {
                      return 2.5 +
                             0.7 * std::cos(2.0 * std::numbers::pi * y[0]) +
                             0.7 * std::cos(2.0 * std::numbers::pi * y[1]);
                    });
      SolverConfig scfg;
      scfg.tol = 1e-10;
      CellSolution cell = solve_scalar_cell(mat, 0, R, scfg);
      EffectiveTensor eff = effective_conductivity(mat, {cell}, R);
      const double sigma_h = eff.entries(0, 0);
      auto os = open_out(conv_out, "converge.csv");
      os << "eta,M,l2_error,h1_error,corrector_error\n";
      const SampleRule rule =
          conv_fibonacci ? SampleRule::nearest : SampleRule::trig;
      for (double eta : parse_double_list(conv_etas)) {
        const int mesh = static_cast<int>(std::ceil(conv_meshfac / eta));
        FineScaleRun run =
            solve_fine_1d(mat.values, R, [](double) { return 1.0; }, eta,
                          mesh, sigma_h, rule);
        corrector_error(run, cell, R);
        os << format_g17(eta) << "," << run.mesh << ","
           << format_g17(run.l2_error) << "," << format_g17(run.h1_error)
           << "," << format_g17(run.corrector_error) << "\n";
        if (!quiet)
          std::cout << "eta " << eta << ": L2 " << run.l2_error << ", H1 "
                    << run.h1_error << ", corrected " << run.corrector_error
                    << "\n";
      }
      return kExitOk;
    }

    if (cmd_erg->parsed()) {
      ProjectionMatrix R = ProjectionMatrix::fibonacci2();
      PeriodicField g = ergodic_test_polynomial(erg_seed);
      auto os = open_out(erg_out, "ergodic.csv");
      os << "A,gap\n";
      for (double a : parse_double_list(erg_a)) {
        ErgodicEstimate est = ergodic_mean(g, R, a, erg_samples);
        os << format_g17(a) << "," << format_g17(est.gap) << "\n";
        if (!quiet) std::cout << "A " << a << ": gap " << est.gap << "\n";
      }
      return kExitOk;
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failed: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoFailure;
  }
  return kExitUsage;
}
