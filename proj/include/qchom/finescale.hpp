#ifndef QCHOM_FINESCALE_HPP
#define QCHOM_FINESCALE_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "qchom/cellsolve.hpp"
#include "qchom/field.hpp"
#include "qchom/projection.hpp"

namespace qchom {

/// One fine-scale 1D solve: -d/dx [sigma(R x / eta) du/dx] = f on (0,1),
/// homogeneous Dirichlet ends, compared against the homogenized solution
/// with constant coefficient sigma_h.
struct FineScaleRun {
  double eta = 0.0;
  int mesh = 0;
  std::vector<double> u_eta;        // nodal values, mesh+1 entries
  std::vector<double> u_hom;        // homogenized solve on the same mesh
  std::vector<double> coefficient;  // per-cell sigma(R x_c / eta)
  double l2_error = 0.0;            // ||u_eta - u_hom||_{L^2}
  double h1_error = 0.0;            // plain gradient error
  double corrector_error = -1.0;    // filled by corrector_error()
  double energy = 0.0;              // int sigma_eta |u_eta'|^2
  double sigma_h = 0.0;
};

namespace detail {

/// Tridiagonal FD/FV solve with per-cell coefficients a[0..M-1]:
/// flux continuity at the interior nodes, u(0) = u(1) = 0.
inline std::vector<double> tridiag_dirichlet(const std::vector<double>& a,
                                             const std::function<double(double)>& f) {
  const int M = static_cast<int>(a.size());
  const double h = 1.0 / M;
  const int n = M - 1;
  std::vector<double> diag(n), upper(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = a[i] + a[i + 1];
    upper[i] = -a[i + 1];
    rhs[i] = f((i + 1) * h) * h * h;
  }
  // Thomas algorithm (lower diagonal mirrors the upper one).
  std::vector<double> c(n), d(n);
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (int i = 1; i < n; ++i) {
    const double lower = -a[i];
    const double m = diag[i] - lower * c[i - 1];
    c[i] = upper[i] / m;
    d[i] = (rhs[i] - lower * d[i - 1]) / m;
  }
  std::vector<double> u(M + 1, 0.0);
  u[n] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i + 1] = d[i] - c[i] * u[i + 2];
  return u;
}

}  // namespace detail

/// Solves the fine-scale problem with the coefficient sampled at cell
/// midpoints as sigma(R x / eta); interior interface coefficients are the
/// harmonic means of the adjacent cell samples, the standard treatment
/// for discontinuous 1D coefficients. Requires n = 1 and M >= 20 / eta
/// so the microscale is resolved.
inline FineScaleRun solve_fine_1d(const PeriodicField& sigma_cell,
                                  const ProjectionMatrix& R,
                                  const std::function<double(double)>& f,
                                  double eta, int M, double sigma_h,
                                  SampleRule rule = SampleRule::trig) {
  if (R.cols() != 1)
    throw UnsupportedDimensionError("solve_fine_1d: n = 1 only");
  if (!(eta > 0)) throw std::invalid_argument("solve_fine_1d: eta > 0");
  if (M < 20.0 / eta)
    throw std::invalid_argument(
        "solve_fine_1d: mesh M = " + std::to_string(M) +
        " does not resolve the microscale (need M >= 20/eta = " +
        std::to_string(20.0 / eta) + ")");

  FineScaleRun run;
  run.eta = eta;
  run.mesh = M;
  run.sigma_h = sigma_h;
  const double h = 1.0 / M;

  // Nodal samples of the quasiperiodic coefficient, harmonically averaged
  // into per-cell flux coefficients.
  TrigEvaluator eval(sigma_cell);
  const int m = R.rows();
  std::vector<double> y(m);
  std::vector<double> nodal(M + 1);
  Eigen::VectorXd x(1);
  for (int i = 0; i <= M; ++i) {
    x[0] = i * h;
    if (rule == SampleRule::nearest) {
      nodal[i] =
          sample_quasiperiodic(sigma_cell, R, x, eta, SampleRule::nearest)
              .real();
    } else {
      for (int r = 0; r < m; ++r) {
        double v = R.entries()(r, 0) * x[0] / eta;
        y[r] = v - std::floor(v);
      }
      nodal[i] = eval(y).real();
    }
    if (!(nodal[i] > 0))
      throw CoercivityError("solve_fine_1d: nonpositive coefficient sample");
  }
  std::vector<double> cells(M);
  for (int i = 0; i < M; ++i)
    cells[i] = 2.0 / (1.0 / nodal[i] + 1.0 / nodal[i + 1]);
  run.coefficient = cells;

  run.u_eta = detail::tridiag_dirichlet(cells, f);
  std::vector<double> hom_cells(M, sigma_h);
  run.u_hom = detail::tridiag_dirichlet(hom_cells, f);

  // Errors and the energy.
  double l2 = 0.0, h1 = 0.0, energy = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double d = run.u_eta[i] - run.u_hom[i];
    const double w = (i == 0 || i == M) ? 0.5 : 1.0;
    l2 += w * d * d * h;
  }
  for (int i = 0; i < M; ++i) {
    const double du = (run.u_eta[i + 1] - run.u_eta[i]) / h;
    const double dv = (run.u_hom[i + 1] - run.u_hom[i]) / h;
    h1 += (du - dv) * (du - dv) * h;
    energy += cells[i] * du * du * h;
  }
  run.l2_error = std::sqrt(l2);
  run.h1_error = std::sqrt(h1);
  run.energy = energy;
  return run;
}

/// Corrector-adjusted gradient error of a fine-scale run:
/// || u_eta' - u_hom' (1 - gamma(R x / eta)) ||_{L^2(0,1)} where gamma is
/// the cell corrector (total microscopic field is load - gamma). For a
/// constant coefficient gamma = 0 and this reduces to the plain gradient
/// error.
inline double corrector_error(FineScaleRun& run,
                              const CellSolution& cell,
                              const ProjectionMatrix& R) {
  if (R.cols() != 1)
    throw UnsupportedDimensionError("corrector_error: n = 1 only");
  const int M = run.mesh;
  const double h = 1.0 / M;
  TrigEvaluator eval(cell.corrector, 0);
  const int m = R.rows();
  std::vector<double> y(m);
  double acc = 0.0;
  for (int i = 0; i < M; ++i) {
    const double xm = (i + 0.5) * h;
    for (int r = 0; r < m; ++r) {
      double v = R.entries()(r, 0) * xm / run.eta;
      y[r] = v - std::floor(v);
    }
    const double gamma = eval(y).real();
    const double du = (run.u_eta[i + 1] - run.u_eta[i]) / h;
    const double dv = (run.u_hom[i + 1] - run.u_hom[i]) / h;
    const double d = du - dv * (1.0 - gamma);
    acc += d * d * h;
  }
  run.corrector_error = std::sqrt(acc);
  return run.corrector_error;
}

}  // namespace qchom

#endif
