#ifndef QCHOM_CELLSOLVE_HPP
#define QCHOM_CELLSOLVE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "qchom/errors.hpp"
#include "qchom/field.hpp"
#include "qchom/material.hpp"
#include "qchom/operators.hpp"

namespace qchom {

struct SolverConfig {
  enum class Acceleration { none, conjugate_gradient };

  double reference = 0.0;  // reference medium sigma_0; 0 = (c_min+c_max)/2
  double tol = 1e-8;       // relative equilibrium residual
  int max_iter = 10000;
  Acceleration acceleration = Acceleration::none;
  double alpha = 0.0;      // transverse-transport regularization (scalar)
};

/// One converged cell problem. `corrector` is the field subtracted from
/// the unit load in the flux averages: the projected-gradient corrector
/// for the scalar problem (n components), the symmetrized strain
/// corrector for elasticity (n x n components, row-major), and the
/// R-curl corrector for the quasistatic magnetic problem (3 components).
struct CellSolution {
  PeriodicField corrector;
  int direction = 0;
  std::vector<double> residual_history;
  int iterations = 0;
  double min_xi_norm = 0.0;
  bool converged = false;
  double reference = 0.0;
};

namespace detail {

using Planes = std::vector<std::vector<std::complex<double>>>;

enum class ProjectorKind { along_xi, orthogonal_xi, strain };

/// Per-mode orthogonal projector onto the admissible corrector
/// coefficients: span(xi) for gradients, its complement for curls, and
/// {sym(xi ⊗ a)} in Mandel coordinates for strains.
struct ModeProjector {
  ProjectorKind kind;
  const ModeTable& table;
  int comps;
  std::vector<double> strain_p;  // total x comps^2 when kind == strain

  ModeProjector(ProjectorKind k, const ModeTable& t, int comps_)
      : kind(k), table(t), comps(comps_) {
    if (comps > 6)
      throw UnsupportedDimensionError("cell solver supports n <= 3");
    if (kind != ProjectorKind::strain) return;
    const int n = t.n;
    const int s = comps;
    const std::size_t total = t.xi_norm2.size();
    strain_p.assign(total * s * s, 0.0);
    auto pairs = mandel_pairs(n);
    Eigen::MatrixXd b(s, n);
    for (std::size_t flat = 1; flat < total; ++flat) {
      if (table.nyquist[flat] || table.xi_norm2[flat] == 0.0) continue;
      Eigen::VectorXd xi(n);
      for (int j = 0; j < n; ++j) xi[j] = t.xi[flat * n + j];
      xi /= xi.norm();
      for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        e.col(i) = 0.5 * xi;
        e.row(i) += 0.5 * xi.transpose();
        b.col(i) = mandel_of_sym(e);
      }
      // Gram of the basis is (I + xi xi^T)/2 with explicit inverse.
      Eigen::MatrixXd gram_inv =
          2.0 * (Eigen::MatrixXd::Identity(n, n) - 0.5 * xi * xi.transpose());
      Eigen::MatrixXd p = b * gram_inv * b.transpose();
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
          strain_p[(flat * s + i) * s + j] = p(i, j);
    }
  }

  /// In-place projection of spectral planes; zeroes the mean mode and the
  /// Nyquist planes (excluded from the corrector basis).
  void apply(Planes& f) const {
    const std::size_t total = table.xi_norm2.size();
    const int n = table.n;
    for (std::size_t flat = 0; flat < total; ++flat) {
      const bool drop = flat == 0 || table.nyquist[flat];
      if (drop) {
        for (int c = 0; c < comps; ++c) f[c][flat] = 0.0;
        continue;
      }
      switch (kind) {
        case ProjectorKind::along_xi: {
          std::complex<double> dot = 0.0;
          for (int j = 0; j < n; ++j) dot += table.xi[flat * n + j] * f[j][flat];
          dot /= table.xi_norm2[flat];
          for (int j = 0; j < n; ++j) f[j][flat] = table.xi[flat * n + j] * dot;
          break;
        }
        case ProjectorKind::orthogonal_xi: {
          std::complex<double> dot = 0.0;
          for (int j = 0; j < n; ++j) dot += table.xi[flat * n + j] * f[j][flat];
          dot /= table.xi_norm2[flat];
          for (int j = 0; j < n; ++j) f[j][flat] -= table.xi[flat * n + j] * dot;
          break;
        }
        case ProjectorKind::strain: {
          std::complex<double> tmp[6];
          for (int i = 0; i < comps; ++i) {
            std::complex<double> acc = 0.0;
            for (int j = 0; j < comps; ++j)
              acc += strain_p[(flat * comps + i) * comps + j] * f[j][flat];
            tmp[i] = acc;
          }
          for (int i = 0; i < comps; ++i) f[i][flat] = tmp[i];
          break;
        }
      }
    }
  }

  /// Squared equilibrium defect of a flux coefficient at one mode:
  /// |xi . f|^2, |xi x f|^2, or |sigma(f) xi|^2 for strains.
  double equilibrium2(std::size_t flat,
                      const std::vector<std::complex<double>*>& f) const {
    const int n = table.n;
    switch (kind) {
      case ProjectorKind::along_xi: {
        std::complex<double> dot = 0.0;
        for (int j = 0; j < n; ++j) dot += table.xi[flat * n + j] * f[j][flat];
        return std::norm(dot);
      }
      case ProjectorKind::orthogonal_xi: {
        const double x0 = table.xi[flat * 3 + 0];
        const double x1 = table.xi[flat * 3 + 1];
        const double x2 = table.xi[flat * 3 + 2];
        return std::norm(x1 * f[2][flat] - x2 * f[1][flat]) +
               std::norm(x2 * f[0][flat] - x0 * f[2][flat]) +
               std::norm(x0 * f[1][flat] - x1 * f[0][flat]);
      }
      case ProjectorKind::strain: {
        // divergence of the stress tensor encoded by the Mandel vector
        auto pairs = mandel_pairs(n);
        double out = 0.0;
        const double inv_rt2 = 1.0 / std::numbers::sqrt2;
        for (int i = 0; i < n; ++i) {
          std::complex<double> acc = 0.0;
          for (std::size_t a = 0; a < pairs.size(); ++a) {
            auto [p, q] = pairs[a];
            double w = (p == q) ? 1.0 : inv_rt2;
            if (p == i) acc += w * table.xi[flat * n + q] * f[a][flat];
            if (q == i && p != q) acc += w * table.xi[flat * n + p] * f[a][flat];
          }
          out += std::norm(acc);
        }
        return out;
      }
    }
    return 0.0;
  }
};

/// Pointwise coefficient application out = M(x) in for complex planes
/// holding real fields.
struct PointwiseMaterial {
  const MaterialField& mat;
  int d;
  std::vector<double> values;  // flattened real copies for the hot loop

  explicit PointwiseMaterial(const MaterialField& m)
      : mat(m), d(m.op_dim()) {
    if (d > 6)
      throw UnsupportedDimensionError("cell solver supports n <= 3");
    const std::size_t total = m.values.grid().total();
    if (m.is_scalar()) {
      values.resize(total);
      for (std::size_t p = 0; p < total; ++p)
        values[p] = m.values.samples(0)[p].real();
    } else {
      values.resize(total * d * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const auto& plane = m.values.samples(i * d + j);
          for (std::size_t p = 0; p < plane.size(); ++p)
            values[(p * d + i) * d + j] = plane[p].real();
        }
    }
  }

  /// out := M * in, optionally shifted by -shift * in.
  void apply(const Planes& in, Planes& out, double shift = 0.0) const {
    const std::size_t total = in[0].size();
    if (mat.is_scalar()) {
      for (int c = 0; c < d; ++c)
        for (std::size_t p = 0; p < total; ++p)
          out[c][p] = (values[p] - shift) * in[c][p];
      return;
    }
    std::complex<double> tmp[6];
    for (std::size_t p = 0; p < total; ++p) {
      for (int i = 0; i < d; ++i) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < d; ++j)
          acc += values[(p * d + i) * d + j] * in[j][p];
        tmp[i] = acc;
      }
      for (int i = 0; i < d; ++i) out[i][p] = tmp[i] - shift * in[i][p];
    }
  }
};

struct EngineSetup {
  const Grid& grid;
  const ModeTable& table;
  const ModeProjector& proj;
  const PointwiseMaterial& mat;
  Eigen::VectorXd load;  // constant macroscopic field E
  double sigma0;
  const SolverConfig& cfg;
};

inline double parseval_inner(const Planes& a, const Planes& b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t i = 0; i < a[c].size(); ++i)
      acc += a[c][i].real() * b[c][i].real() + a[c][i].imag() * b[c][i].imag();
  return acc;
}

/// Relative equilibrium residual of the flux spectrum:
/// 2 pi sqrt(sum_k defect(k)) / |mean flux|, over nonzero non-Nyquist
/// modes (the resolved test space of the discretization).
inline double equilibrium_residual(const EngineSetup& s, Planes& flux_hat) {
  std::vector<std::complex<double>*> ptr(flux_hat.size());
  for (std::size_t c = 0; c < flux_hat.size(); ++c) ptr[c] = flux_hat[c].data();
  double num2 = 0.0;
  for (std::size_t flat = 1; flat < s.grid.total(); ++flat) {
    if (s.table.nyquist[flat]) continue;
    num2 += s.proj.equilibrium2(flat, ptr);
  }
  double den2 = 0.0;
  for (std::size_t c = 0; c < flux_hat.size(); ++c)
    den2 += std::norm(flux_hat[c][0]);
  return 2.0 * std::numbers::pi * std::sqrt(num2) / std::sqrt(den2);
}

/// Shared fixed-point / CG driver. Unknown is the projected, mean-free
/// corrector w in spectral form; the total field is E + w and equilibrium
/// is monitored through the flux M (E + w).
inline std::pair<Planes, std::pair<std::vector<double>, int>> run_engine(
    const EngineSetup& s) {
  const std::size_t total = s.grid.total();
  const int comps = static_cast<int>(s.load.size());
  auto fft = Fft::shared(s.grid);

  auto forward_all = [&](Planes& p) {
    for (auto& plane : p) fft->forward(plane);
  };
  auto inverse_all = [&](const Planes& in, Planes& out) {
    for (int c = 0; c < comps; ++c)
      fft->inverse(in[c].data(), out[c].data());
  };

  Planes w_hat(comps, Planes::value_type(total));
  Planes e(comps, Planes::value_type(total));
  Planes work(comps, Planes::value_type(total));
  std::vector<double> history;

  auto total_field = [&](const Planes& what) {
    inverse_all(what, e);
    for (int c = 0; c < comps; ++c) {
      const std::complex<double> add = s.load[c];
      for (std::size_t p = 0; p < total; ++p) e[c][p] += add;
    }
  };

  auto flux_residual = [&](const Planes& what) {
    total_field(what);
    s.mat.apply(e, work);
    forward_all(work);  // work = flux spectrum
    return equilibrium_residual(s, work);
  };

  if (s.cfg.acceleration == SolverConfig::Acceleration::none) {
    for (int it = 0; it < s.cfg.max_iter; ++it) {
      double res = flux_residual(w_hat);
      history.push_back(res);
      if (res < s.cfg.tol)
        return {std::move(w_hat), {std::move(history), it + 1}};
      // w <- w - P(flux)/sigma0 on the resolved modes
      s.proj.apply(work);
      for (int c = 0; c < comps; ++c)
        for (std::size_t p = 0; p < total; ++p)
          w_hat[c][p] -= work[c][p] / s.sigma0;
    }
    throw ConvergenceError(
        "cell solve did not reach tol = " + std::to_string(s.cfg.tol) +
            " within " + std::to_string(s.cfg.max_iter) + " iterations",
        history);
  }

  // Conjugate gradients on A w = b with A = I + P (M - sigma0)/sigma0,
  // which is symmetric positive definite on the projected subspace.
  auto apply_a = [&](const Planes& in, Planes& out) {
    inverse_all(in, out);
    s.mat.apply(out, out, s.sigma0);
    forward_all(out);
    s.proj.apply(out);
    for (int c = 0; c < comps; ++c)
      for (std::size_t p = 0; p < total; ++p)
        out[c][p] = in[c][p] + out[c][p] / s.sigma0;
  };

  Planes b(comps, Planes::value_type(total));
  for (int c = 0; c < comps; ++c)
    for (std::size_t p = 0; p < total; ++p) b[c][p] = s.load[c];
  s.mat.apply(b, b);
  forward_all(b);
  s.proj.apply(b);
  for (int c = 0; c < comps; ++c)
    for (std::size_t p = 0; p < total; ++p) b[c][p] = -b[c][p] / s.sigma0;

  Planes r = b;
  Planes p = r;
  Planes ap(comps, Planes::value_type(total));
  double rr = parseval_inner(r, r);
  for (int it = 0; it < s.cfg.max_iter; ++it) {
    double res = flux_residual(w_hat);
    history.push_back(res);
    if (res < s.cfg.tol)
      return {std::move(w_hat), {std::move(history), it + 1}};
    apply_a(p, ap);
    double pap = parseval_inner(p, ap);
    double alpha = rr / pap;
    for (int c = 0; c < comps; ++c)
      for (std::size_t q = 0; q < total; ++q) {
        w_hat[c][q] += alpha * p[c][q];
        r[c][q] -= alpha * ap[c][q];
      }
    double rr_new = parseval_inner(r, r);
    double beta = rr_new / rr;
    rr = rr_new;
    for (int c = 0; c < comps; ++c)
      for (std::size_t q = 0; q < total; ++q)
        p[c][q] = r[c][q] + beta * p[c][q];
  }
  throw ConvergenceError("cell solve (cg) did not reach tol = " +
                             std::to_string(s.cfg.tol) + " within " +
                             std::to_string(s.cfg.max_iter) + " iterations",
                         history);
}

inline double pick_reference(const MaterialField& mat,
                             const SolverConfig& cfg) {
  if (cfg.reference > 0.0) return cfg.reference;
  return 0.5 * (mat.c_min + mat.c_max);
}

/// The corrector gamma satisfies total field = E - gamma, i.e. gamma is
/// the negative of the engine unknown w (flux = M (E + w)).
inline PeriodicField corrector_from(const Grid& grid, FieldRank rank,
                                    Planes w_hat) {
  for (auto& plane : w_hat)
    for (auto& z : plane) z = -z;
  return PeriodicField::from_coefficients(grid, rank, std::move(w_hat));
}

}  // namespace detail

/// Scalar conductivity cell problem for the unit load e_{k_dir}
/// (0-based): find the projected-gradient corrector gamma with
/// div_R(sigma (e_k - gamma)) = 0 on the resolved modes.
inline CellSolution solve_scalar_cell(const MaterialField& sigma, int k_dir,
                                      const ProjectionMatrix& R,
                                      const SolverConfig& cfg = {});

/// Elasticity cell problem for the symmetrized unit strain
/// sym(e_k (x) e_l); returns the strain corrector (n x n components).
inline CellSolution solve_elastic_cell(const MaterialField& stiffness,
                                       std::pair<int, int> load,
                                       const ProjectionMatrix& R,
                                       const SolverConfig& cfg = {});

/// Quasistatic magnetic (curl-curl) cell problem, n = 3: corrector lies
/// per mode in the orthogonal complement of xi.
inline CellSolution solve_curl_cell(const MaterialField& eps_inv, int k_dir,
                                    const ProjectionMatrix& R,
                                    const SolverConfig& cfg = {});

namespace detail {

inline CellSolution solve_projected(const MaterialField& mat,
                                    const Eigen::VectorXd& load,
                                    int direction, ProjectorKind pk,
                                    FieldRank out_rank,
                                    const ProjectionMatrix& R,
                                    const SolverConfig& cfg) {
  mat.require_coercive();
  R.require_full_rank();
  const Grid& grid = mat.values.grid();
  ModeTable table = ModeTable::build(grid, R);
  const int comps = static_cast<int>(load.size());
  ModeProjector proj(pk, table, comps);
  PointwiseMaterial pmat(mat);
  const double sigma0 = pick_reference(mat, cfg);
  EngineSetup setup{grid, table, proj, pmat, load, sigma0, cfg};
  auto [w_hat, meta] = run_engine(setup);

  CellSolution sol{
      corrector_from(grid, out_rank, std::move(w_hat)),
      direction,
      std::move(meta.first),
      meta.second,
      table.min_xi_norm,
      true,
      sigma0};
  return sol;
}

inline CellSolution solve_scalar_cell_regularized(const MaterialField& sigma,
                                                  int k_dir,
                                                  const ProjectionMatrix& R,
                                                  const SolverConfig& cfg);

}  // namespace detail

inline CellSolution solve_scalar_cell(const MaterialField& sigma, int k_dir,
                                      const ProjectionMatrix& R,
                                      const SolverConfig& cfg) {
  const int n = R.cols();
  if (k_dir < 0 || k_dir >= n)
    throw std::invalid_argument("solve_scalar_cell: direction out of range");
  if (sigma.kind == MaterialKind::elasticity)
    throw std::invalid_argument("solve_scalar_cell: wrong material kind");
  if (cfg.alpha > 0.0)
    return detail::solve_scalar_cell_regularized(sigma, k_dir, R, cfg);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
  load[k_dir] = 1.0;
  return detail::solve_projected(sigma, load, k_dir,
                                 detail::ProjectorKind::along_xi,
                                 FieldRank::vector, R, cfg);
}

inline CellSolution solve_elastic_cell(const MaterialField& stiffness,
                                       std::pair<int, int> load_pair,
                                       const ProjectionMatrix& R,
                                       const SolverConfig& cfg) {
  const int n = R.cols();
  auto [k, l] = load_pair;
  if (k < 0 || k >= n || l < 0 || l >= n)
    throw std::invalid_argument("solve_elastic_cell: load out of range");
  if (stiffness.kind != MaterialKind::elasticity)
    throw std::invalid_argument("solve_elastic_cell: wrong material kind");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  e(k, l) += 0.5;
  e(l, k) += 0.5;
  Eigen::VectorXd load = mandel_of_sym(e);
  CellSolution sol = detail::solve_projected(
      stiffness, load, k * n + l, detail::ProjectorKind::strain,
      FieldRank::tensor4, R, cfg);

  // Re-express the Mandel corrector planes as n x n tensor components.
  const Grid& grid = sol.corrector.grid();
  auto pairs = mandel_pairs(n);
  const double inv_rt2 = 1.0 / std::numbers::sqrt2;
  std::vector<PeriodicField::Plane> planes(n * n,
                                           PeriodicField::Plane(grid.total()));
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    auto [i, j] = pairs[a];
    const auto& src = sol.corrector.coefficients(a);
    for (std::size_t p = 0; p < grid.total(); ++p) {
      std::complex<double> v = (i == j) ? src[p] : src[p] * inv_rt2;
      planes[i * n + j][p] = v;
      planes[j * n + i][p] = v;
    }
  }
  sol.corrector = PeriodicField::from_coefficients(grid, FieldRank::tensor2,
                                                   std::move(planes));
  return sol;
}

inline CellSolution solve_curl_cell(const MaterialField& eps_inv, int k_dir,
                                    const ProjectionMatrix& R,
                                    const SolverConfig& cfg) {
  if (R.cols() != 3)
    throw UnsupportedDimensionError("solve_curl_cell requires n = 3");
  if (k_dir < 0 || k_dir >= 3)
    throw std::invalid_argument("solve_curl_cell: direction out of range");
  if (eps_inv.kind == MaterialKind::elasticity)
    throw std::invalid_argument("solve_curl_cell: wrong material kind");
  Eigen::VectorXd load = Eigen::VectorXd::Zero(3);
  load[k_dir] = 1.0;
  return detail::solve_projected(eps_inv, load, k_dir,
                                 detail::ProjectorKind::orthogonal_xi,
                                 FieldRank::vector, R, cfg);
}

namespace detail {

/// Regularized scalar solve: adds alpha * (I_m - R R^T) transport in the
/// ambient space, which lifts the degeneracy instead of projecting it
/// away. The unknown becomes the full m-dimensional potential gradient;
/// the corrector returned is its projection R^T H. Convergence degrades
/// as alpha -> 0 (the coefficient spread grows), so this path is meant
/// for moderate alpha.
inline CellSolution solve_scalar_cell_regularized(const MaterialField& sigma,
                                                  int k_dir,
                                                  const ProjectionMatrix& R,
                                                  const SolverConfig& cfg) {
  sigma.require_coercive();
  R.require_full_rank();
  const Grid& grid = sigma.values.grid();
  const int m = grid.dim();
  const int n = R.cols();
  const std::size_t total = grid.total();
  const double alpha = cfg.alpha;
  ModeTable table = ModeTable::build(grid, R);
  auto fft = Fft::shared(grid);

  // Integer-frequency projector onto span(k) per mode.
  std::vector<double> kvec(total * m), knorm2(total);
  {
    std::vector<int> digits;
    for (std::size_t flat = 0; flat < total; ++flat) {
      grid.unflatten(flat, digits);
      double s2 = 0.0;
      for (int i = 0; i < m; ++i) {
        double ki = grid.mode_of(digits[i]);
        kvec[flat * m + i] = ki;
        s2 += ki * ki;
      }
      knorm2[flat] = s2;
    }
  }

  const Eigen::MatrixXd& Rm = R.entries();
  std::vector<double> sig(total);
  for (std::size_t p = 0; p < total; ++p)
    sig[p] = sigma.values.samples(0)[p].real();

  // Source S = R sigma e_k and coefficient action A H = (sigma - alpha)
  // R R^T H + alpha H, both pointwise.
  Planes h_hat(m, Planes::value_type(total));
  Planes h(m, Planes::value_type(total));
  Planes flux(m, Planes::value_type(total));
  // The ambient coefficient has eigenvalues in
  // [min(c_min, alpha), max(c_max, alpha)].
  const double a0 = cfg.reference > 0.0
                        ? cfg.reference
                        : 0.5 * (std::min(sigma.c_min, alpha) +
                                 std::max(sigma.c_max, alpha));
  std::vector<double> history;

  auto iterate = [&]() -> double {
    for (int c = 0; c < m; ++c) {
      fft->inverse(h_hat[c].data(), h[c].data());
    }
    for (std::size_t p = 0; p < total; ++p) {
      // R^T H
      std::complex<double> proj[3];
      for (int j = 0; j < n; ++j) {
        std::complex<double> acc = 0.0;
        for (int i = 0; i < m; ++i) acc += Rm(i, j) * h[i][p];
        proj[j] = acc;
      }
      for (int i = 0; i < m; ++i) {
        std::complex<double> acc = alpha * h[i][p];
        for (int j = 0; j < n; ++j)
          acc += (sig[p] - alpha) * Rm(i, j) * proj[j];
        acc -= sig[p] * Rm(i, k_dir);  // minus source R sigma e_k
        flux[i][p] = acc;
      }
    }
    for (int c = 0; c < m; ++c) fft->forward(flux[c]);
    double num2 = 0.0;
    for (std::size_t flat = 1; flat < total; ++flat) {
      if (table.nyquist[flat]) continue;
      std::complex<double> dot = 0.0;
      for (int i = 0; i < m; ++i) dot += kvec[flat * m + i] * flux[i][flat];
      num2 += std::norm(dot);
    }
    double den2 = 0.0;
    for (int i = 0; i < m; ++i) den2 += std::norm(flux[i][0]);
    double res = 2.0 * std::numbers::pi * std::sqrt(num2 / den2);
    // H <- H - P(flux)/a0
    for (std::size_t flat = 1; flat < total; ++flat) {
      if (table.nyquist[flat] || knorm2[flat] == 0.0) continue;
      std::complex<double> dot = 0.0;
      for (int i = 0; i < m; ++i) dot += kvec[flat * m + i] * flux[i][flat];
      dot /= knorm2[flat] * a0;
      for (int i = 0; i < m; ++i)
        h_hat[i][flat] -= kvec[flat * m + i] * dot;
    }
    return res;
  };

  bool converged = false;
  int iters = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    double res = iterate();
    history.push_back(res);
    iters = it + 1;
    if (res < cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("regularized cell solve did not converge", history);

  // gamma = R^T H (the part of the ambient gradient seen by the slice)
  for (int c = 0; c < m; ++c) fft->inverse(h_hat[c].data(), h[c].data());
  std::vector<PeriodicField::Plane> gamma(n,
                                          PeriodicField::Plane(total));
  for (std::size_t p = 0; p < total; ++p)
    for (int j = 0; j < n; ++j) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < m; ++i) acc += Rm(i, j) * h[i][p];
      gamma[j][p] = acc;
    }
  CellSolution sol{
      PeriodicField::from_samples(grid, FieldRank::vector, std::move(gamma)),
      k_dir,
      std::move(history),
      iters,
      table.min_xi_norm,
      true,
      a0};
  return sol;
}

}  // namespace detail

}  // namespace qchom

#endif
