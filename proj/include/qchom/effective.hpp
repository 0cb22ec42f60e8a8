#ifndef QCHOM_EFFECTIVE_HPP
#define QCHOM_EFFECTIVE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchom/cellsolve.hpp"
#include "qchom/material.hpp"

namespace qchom {

/// Homogenized coefficient with its structural diagnostics. For
/// elasticity the entries are the Mandel matrix of the rank-4 tensor
/// (eigenvalues and symmetry defect carry over unchanged). The raw
/// assembly is reported without symmetrization; the defect doubles as a
/// solver-quality metric.
struct EffectiveTensor {
  MaterialKind kind;
  int n = 0;
  Eigen::MatrixXd entries;
  double symmetry_defect = 0.0;
  double min_eigenvalue = 0.0;
};

namespace detail {

inline void finish_diagnostics(EffectiveTensor& t) {
  t.symmetry_defect = (t.entries - t.entries.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (t.entries + t.entries.transpose()), Eigen::EigenvaluesOnly);
  t.min_eigenvalue = es.eigenvalues().minCoeff();
}

inline void require_converged(const std::vector<CellSolution>& sols,
                              std::size_t want) {
  if (sols.size() != want)
    throw std::invalid_argument("effective tensor: expected " +
                                std::to_string(want) + " cell solutions, got " +
                                std::to_string(sols.size()));
  for (const auto& s : sols)
    if (!s.converged)
      throw std::invalid_argument(
          "effective tensor: unconverged cell solution for direction " +
          std::to_string(s.direction) + " (last residual " +
          std::to_string(s.residual_history.empty()
                             ? -1.0
                             : s.residual_history.back()) +
          ")");
}

/// Grid mean of the flux M(y) (E - gamma(y)) for a vector-type problem.
inline Eigen::VectorXd mean_flux(const MaterialField& mat,
                                 const Eigen::VectorXd& load,
                                 const PeriodicField& gamma) {
  const std::size_t total = mat.values.grid().total();
  const int d = static_cast<int>(load.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::VectorXd e(d);
    for (int c = 0; c < d; ++c)
      e[c] = load[c] - gamma.samples(c)[p].real();
    if (mat.is_scalar()) {
      acc += mat.values.samples(0)[p].real() * e;
    } else {
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
          s += mat.values.samples(i * d + j)[p].real() * e[j];
        acc[i] += s;
      }
    }
  }
  return acc / static_cast<double>(total);
}

}  // namespace detail

/// sigma_h column k = <sigma (e_k - gamma^k)>: the mean flux under the
/// k-th unit load, equivalently the k = 0 Fourier coefficient of the
/// corrected flux.
inline EffectiveTensor effective_conductivity(
    const MaterialField& sigma, const std::vector<CellSolution>& solutions,
    const ProjectionMatrix& R) {
  const int n = R.cols();
  detail::require_converged(solutions, static_cast<std::size_t>(n));
  EffectiveTensor t{sigma.kind, n, Eigen::MatrixXd::Zero(n, n), 0.0, 0.0};
  for (const auto& sol : solutions) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
    load[sol.direction] = 1.0;
    t.entries.col(sol.direction) = detail::mean_flux(sigma, load, sol.corrector);
  }
  detail::finish_diagnostics(t);
  return t;
}

/// Rank-4 averaging C_h = <C (E^{kl} - eps^{kl})>, assembled in Mandel
/// coordinates. Duplicate (k,l)/(l,k) solutions are averaged.
inline EffectiveTensor effective_elasticity(
    const MaterialField& stiffness, const std::vector<CellSolution>& solutions,
    const ProjectionMatrix& R) {
  const int n = R.cols();
  detail::require_converged(solutions,
                            static_cast<std::size_t>(n) * n);
  const int s = mandel_dim(n);
  auto pairs = mandel_pairs(n);
  const std::size_t total = stiffness.values.grid().total();

  // Mean Mandel stress per (k,l) load.
  std::vector<Eigen::VectorXd> stress(static_cast<std::size_t>(n) * n);
  for (const auto& sol : solutions) {
    const int k = sol.direction / n;
    const int l = sol.direction % n;
    Eigen::MatrixXd e0 = Eigen::MatrixXd::Zero(n, n);
    e0(k, l) += 0.5;
    e0(l, k) += 0.5;
    Eigen::VectorXd load = mandel_of_sym(e0);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s);
    for (std::size_t p = 0; p < total; ++p) {
      Eigen::VectorXd eps(s);
      for (std::size_t a = 0; a < pairs.size(); ++a) {
        auto [i, j] = pairs[a];
        double w = (i == j) ? 1.0 : std::numbers::sqrt2;
        eps[a] = load[a] - w * sol.corrector.samples(i * n + j)[p].real();
      }
      for (int i = 0; i < s; ++i) {
        double v = 0.0;
        for (int j = 0; j < s; ++j)
          v += stiffness.values.samples(i * s + j)[p].real() * eps[j];
        acc[i] += v;
      }
    }
    stress[sol.direction] = acc / static_cast<double>(total);
  }

  EffectiveTensor t{MaterialKind::elasticity, n, Eigen::MatrixXd::Zero(s, s),
                    0.0, 0.0};
  for (int b = 0; b < s; ++b) {
    auto [k, l] = pairs[b];
    Eigen::VectorXd col;
    if (k == l) {
      col = stress[k * n + l];
    } else {
      col = 0.5 * (stress[k * n + l] + stress[l * n + k]);
    }
    // Columns for shear loads pick up the Mandel sqrt(2) weight.
    double wb = (k == l) ? 1.0 : std::numbers::sqrt2;
    t.entries.col(b) = wb * col;
  }
  detail::finish_diagnostics(t);
  return t;
}

/// Averages eps^{-1} (e_k - curl corrector) over the cell, n = 3.
inline EffectiveTensor effective_inverse_permittivity(
    const MaterialField& eps_inv, const std::vector<CellSolution>& solutions,
    const ProjectionMatrix& R) {
  if (R.cols() != 3)
    throw UnsupportedDimensionError(
        "effective_inverse_permittivity requires n = 3");
  detail::require_converged(solutions, 3);
  EffectiveTensor t{eps_inv.kind, 3, Eigen::MatrixXd::Zero(3, 3), 0.0, 0.0};
  for (const auto& sol : solutions) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(3);
    load[sol.direction] = 1.0;
    t.entries.col(sol.direction) =
        detail::mean_flux(eps_inv, load, sol.corrector);
  }
  detail::finish_diagnostics(t);
  return t;
}

inline nlohmann::ordered_json to_json(const EffectiveTensor& t) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(t.kind);
  j["n"] = t.n;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < t.entries.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int c = 0; c < t.entries.cols(); ++c) row.push_back(t.entries(i, c));
    rows.push_back(row);
  }
  j["entries"] = rows;
  j["symmetry_defect"] = t.symmetry_defect;
  j["min_eigenvalue"] = t.min_eigenvalue;
  return j;
}

}  // namespace qchom

#endif
