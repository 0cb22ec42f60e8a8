#include <catch2/catch_amalgamated.hpp>

#include "qchom/cellsolve.hpp"
#include "qchom/effective.hpp"
#include "qchom/operators.hpp"

using namespace qchom;

namespace {

double max_field_distance(const PeriodicField& a, const PeriodicField& b) {
  double err = 0.0;
  for (std::size_t c = 0; c < a.components(); ++c)
    for (std::size_t i = 0; i < a.coefficients(c).size(); ++i)
      err = std::max(err,
                     std::abs(a.coefficients(c)[i] - b.coefficients(c)[i]));
  return err;
}

/// max over modes of the distance of the corrector coefficient from the
/// line spanned by xi (membership in the space of projected gradients).
double gradient_space_defect(const CellSolution& sol,
                             const ProjectionMatrix& R) {
  const Grid& g = sol.corrector.grid();
  ModeTable t = ModeTable::build(g, R);
  const int n = t.n;
  double defect = 0.0;
  for (std::size_t flat = 1; flat < g.total(); ++flat) {
    if (t.xi_norm2[flat] == 0.0) continue;
    std::complex<double> dot = 0.0;
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
      dot += t.xi[flat * n + j] * sol.corrector.coefficients(j)[flat];
      norm2 += std::norm(sol.corrector.coefficients(j)[flat]);
    }
    dot /= t.xi_norm2[flat];
    double off2 = 0.0;
    for (int j = 0; j < n; ++j)
      off2 += std::norm(sol.corrector.coefficients(j)[flat] -
                        t.xi[flat * n + j] * dot);
    defect = std::max(defect, std::sqrt(off2));
    (void)norm2;
  }
  return defect;
}

}  // namespace

TEST_CASE("constant conductivity has a zero corrector") {
  Grid grid(2, 8);
  MaterialField sigma =
      constant_scalar_material(grid, MaterialKind::scalar_conductivity, 1,
                               3.7);
  CellSolution sol =
      solve_scalar_cell(sigma, 0, ProjectionMatrix::fibonacci2());
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.corrector.max_abs() < 1e-12);
}

TEST_CASE("smooth laminate corrector matches the closed form") {
  // For n = 1 the converged flux is grid-constant, so the corrector is
  // 1 - hm/sigma pointwise with hm the grid harmonic mean.
  Grid grid(2, 32);
  MaterialField sigma = cosine_laminate_material(
      grid, MaterialKind::scalar_conductivity, 1);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  CellSolution sol = solve_scalar_cell(sigma, 0, R, cfg);
  CHECK(sol.converged);
  double hm_inv = 0.0;
  for (const auto& z : sigma.values.samples(0)) hm_inv += 1.0 / z.real();
  const double hm = static_cast<double>(grid.total()) / hm_inv;
  double err = 0.0;
  for (std::size_t p = 0; p < grid.total(); ++p) {
    const double want = 1.0 - hm / sigma.values.samples(0)[p].real();
    err = std::max(err,
                   std::abs(sol.corrector.samples(0)[p].real() - want));
  }
  // the corrector is band-limited (empty Nyquist planes), so it matches
  // the pointwise closed form only up to the spectral tail at N/2
  CHECK(err < 1e-8);
  CHECK(std::abs(sol.corrector.mean(0)) < 1e-12);
}

TEST_CASE("corrector lies in the projected-gradient space") {
  Grid grid(4, 8);
  MaterialField sigma = smooth_two_phase_material(
      grid, MaterialKind::scalar_conductivity, 2, 1.0, 4.0);
  ProjectionMatrix R = ProjectionMatrix::penrose4();
  CellSolution sol = solve_scalar_cell(sigma, 1, R);
  CHECK(sol.converged);
  CHECK(gradient_space_defect(sol, R) < 1e-10);
  CHECK(std::abs(sol.corrector.mean(0)) < 1e-13);
  CHECK(std::abs(sol.corrector.mean(1)) < 1e-13);
  CHECK(sol.min_xi_norm > 0.0);
}

TEST_CASE("scaling the material leaves the corrector unchanged") {
  Grid grid(2, 16);
  MaterialField sigma = cosine_laminate_material(
      grid, MaterialKind::scalar_conductivity, 1);
  MaterialField sigma2 = scalar_material_from_function(
      grid, MaterialKind::scalar_conductivity, 1,
      [](const std::vector<double>& y) {
        return 2.0 * (2.0 + std::cos(2 * std::numbers::pi * y[0]));
      });
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  SolverConfig cfg;
  cfg.tol = 1e-11;
  CellSolution a = solve_scalar_cell(sigma, 0, R, cfg);
  CellSolution b = solve_scalar_cell(sigma2, 0, R, cfg);
  CHECK(max_field_distance(a.corrector, b.corrector) < 1e-10);
}

TEST_CASE("doubling the grid does not move a resolved corrector") {
  // sigma = 2 + cos is resolved on both grids; the corrector's own
  // spectral tail decays like |2 - sqrt(3)|^|k|, so from N = 32 on the
  // aliasing sits below the 1e-8 comparison threshold.
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  SolverConfig cfg;
  cfg.tol = 1e-11;
  Grid coarse(2, 32), fine(2, 64);
  CellSolution a = solve_scalar_cell(
      cosine_laminate_material(coarse, MaterialKind::scalar_conductivity, 1),
      0, R, cfg);
  CellSolution b = solve_scalar_cell(
      cosine_laminate_material(fine, MaterialKind::scalar_conductivity, 1), 0,
      R, cfg);
  // compare on the coarse mode set
  double err = 0.0;
  for (std::size_t flat = 0; flat < coarse.total(); ++flat) {
    auto k = coarse.mode_multi_index(flat);
    std::vector<int> fidx(2);
    for (int j = 0; j < 2; ++j) fidx[j] = fine.index_of_mode(k[j]);
    err = std::max(err, std::abs(a.corrector.coefficients(0)[flat] -
                                 b.corrector.coefficients(0)[fine.flatten(
                                     fidx)]));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("energy bound on the corrector norm") {
  Grid grid(2, 32);
  MaterialField sigma = fibonacci_checkerboard_material(
      grid, MaterialKind::scalar_conductivity, 1, 1.0, 10.0);
  CellSolution sol =
      solve_scalar_cell(sigma, 0, ProjectionMatrix::fibonacci2());
  double norm = 0.0;
  for (const auto& z : sol.corrector.samples(0)) norm += std::norm(z);
  norm = std::sqrt(norm / static_cast<double>(grid.total()));
  CHECK(norm <= sigma.c_max / sigma.c_min + 1e-6);
}

TEST_CASE("conjugate gradients reach the same corrector") {
  Grid grid(2, 16);
  MaterialField sigma = fibonacci_checkerboard_material(
      grid, MaterialKind::scalar_conductivity, 1, 1.0, 10.0);
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  SolverConfig basic;
  basic.tol = 1e-10;
  SolverConfig cg = basic;
  cg.acceleration = SolverConfig::Acceleration::conjugate_gradient;
  CellSolution a = solve_scalar_cell(sigma, 0, R, basic);
  CellSolution b = solve_scalar_cell(sigma, 0, R, cg);
  CHECK(b.converged);
  CHECK(b.iterations < a.iterations);
  CHECK(max_field_distance(a.corrector, b.corrector) < 1e-7);
}

TEST_CASE("exhausting max_iter raises with the residual trace") {
  Grid grid(2, 16);
  MaterialField sigma = fibonacci_checkerboard_material(
      grid, MaterialKind::scalar_conductivity, 1, 1.0, 10.0);
  SolverConfig cfg;
  cfg.max_iter = 3;
  try {
    solve_scalar_cell(sigma, 0, ProjectionMatrix::fibonacci2(), cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual_history.size() == 3);
    CHECK(e.residual_history.front() > e.residual_history.back());
  }
}

TEST_CASE("coercivity violations are rejected up front") {
  Grid grid(2, 8);
  MaterialField bad = scalar_material_from_function(
      grid, MaterialKind::scalar_conductivity, 1,
      [](const std::vector<double>& y) {
        return std::cos(2 * std::numbers::pi * y[0]);
      });
  CHECK_THROWS_AS(solve_scalar_cell(bad, 0, ProjectionMatrix::fibonacci2()),
                  CoercivityError);
}

TEST_CASE("criterion violations at grid resolution are singular modes") {
  Grid grid(2, 8);
  MaterialField sigma = cosine_laminate_material(
      grid, MaterialKind::scalar_conductivity, 1);
  std::vector<std::vector<QuadExt>> q(2, std::vector<QuadExt>(1));
  q[0][0] = QuadExt(Rational(1));
  q[1][0] = QuadExt(Rational(1, 2));
  ProjectionMatrix bad(std::move(q));
  CHECK_THROWS_AS(solve_scalar_cell(sigma, 0, bad), SingularModeError);
}

TEST_CASE("regularized transport stays close for small alpha") {
  Grid grid(2, 16);
  MaterialField sigma = cosine_laminate_material(
      grid, MaterialKind::scalar_conductivity, 1);
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  SolverConfig plain;
  plain.tol = 1e-10;
  CellSolution a = solve_scalar_cell(sigma, 0, R, plain);

  SolverConfig reg = plain;
  reg.alpha = 0.05;
  reg.max_iter = 40000;
  CellSolution b = solve_scalar_cell(sigma, 0, R, reg);
  CHECK(b.converged);
  // the regularized corrector is a perturbation of the projected one
  double diff = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < grid.total(); ++p) {
    diff += std::norm(a.corrector.samples(0)[p] - b.corrector.samples(0)[p]);
    scale += std::norm(a.corrector.samples(0)[p]);
  }
  CHECK(std::sqrt(diff / scale) < 0.2);
}

TEST_CASE("constant stiffness has a zero strain corrector") {
  Grid grid(4, 4);
  MaterialField c = constant_tensor_material(
      grid, MaterialKind::elasticity, isotropic_stiffness_mandel(2, 1.0, 1.0));
  CellSolution sol =
      solve_elastic_cell(c, {0, 1}, ProjectionMatrix::penrose4());
  CHECK(sol.converged);
  CHECK(sol.corrector.max_abs() < 1e-12);
  CHECK(sol.corrector.components() == 4);
}

TEST_CASE("elastic corrector is symmetric and load-order invariant") {
  Grid grid(4, 8);
  MaterialField c = isotropic_elasticity_material(
      grid, 2,
      [](const std::vector<double>& y) {
        return 1.0 + 0.6 * std::cos(2 * std::numbers::pi * y[0]);
      },
      [](const std::vector<double>& y) {
        return 1.0 + 0.4 * std::sin(2 * std::numbers::pi * y[1]);
      });
  ProjectionMatrix R = ProjectionMatrix::penrose4();
  CellSolution kl = solve_elastic_cell(c, {0, 1}, R);
  CellSolution lk = solve_elastic_cell(c, {1, 0}, R);
  CHECK(kl.converged);
  // symmetry of the stored tensor components
  double asym = 0.0;
  for (std::size_t p = 0; p < grid.total(); ++p)
    asym = std::max(asym, std::abs(kl.corrector.samples(1)[p] -
                                   kl.corrector.samples(2)[p]));
  CHECK(asym < 1e-12);
  CHECK(max_field_distance(kl.corrector, lk.corrector) < 1e-9);
}

TEST_CASE("curl corrector is orthogonal to xi mode by mode") {
  Grid grid(4, 8);
  ProjectionMatrix R = ProjectionMatrix::golden_chain(3);
  MaterialField eps = smooth_two_phase_material(
      grid, MaterialKind::inverse_permittivity, 3, 1.0, 3.0);
  CellSolution sol = solve_curl_cell(eps, 2, R);
  CHECK(sol.converged);
  const Grid& g = sol.corrector.grid();
  ModeTable t = ModeTable::build(g, R);
  double defect = 0.0;
  for (std::size_t flat = 1; flat < g.total(); ++flat) {
    std::complex<double> dot = 0.0;
    for (int j = 0; j < 3; ++j)
      dot += t.xi[flat * 3 + j] * sol.corrector.coefficients(j)[flat];
    defect = std::max(defect, std::abs(dot) / std::sqrt(t.xi_norm2[flat]));
  }
  CHECK(defect < 1e-10);
}

TEST_CASE("curl cell weak form holds against random test fields") {
  Grid grid(4, 6);
  ProjectionMatrix R = ProjectionMatrix::golden_chain(3);
  MaterialField eps = smooth_two_phase_material(
      grid, MaterialKind::inverse_permittivity, 3, 1.0, 2.5);
  SolverConfig cfg;
  cfg.tol = 1e-10;
  CellSolution sol = solve_curl_cell(eps, 0, R, cfg);

  // flux = eps (e_0 - corrector) tested against curl_R of random fields
  std::vector<PeriodicField::Plane> fp(3, PeriodicField::Plane(grid.total()));
  for (std::size_t p = 0; p < grid.total(); ++p) {
    const double e = eps.values.samples(0)[p].real();
    for (int c = 0; c < 3; ++c) {
      const double load = c == 0 ? 1.0 : 0.0;
      fp[c][p] = e * (load - sol.corrector.samples(c)[p].real());
    }
  }
  PeriodicField flux =
      PeriodicField::from_samples(grid, FieldRank::vector, std::move(fp));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PeriodicField phi = random_real_field(grid, FieldRank::vector, 3,
                                          900 + seed);
    PeriodicField cphi = curl_r(phi, R);
    const double lhs = std::abs(l2_inner(flux, cphi));
    CHECK(lhs <= 10 * cfg.tol * l2_norm(flux) * l2_norm(cphi) + 1e-12);
  }
}

TEST_CASE("direction indices are validated") {
  Grid grid(2, 4);
  MaterialField sigma =
      constant_scalar_material(grid, MaterialKind::scalar_conductivity, 1,
                               1.0);
  CHECK_THROWS_AS(
      solve_scalar_cell(sigma, 1, ProjectionMatrix::fibonacci2()),
      std::invalid_argument);
}
