#ifndef QCHOM_MATERIAL_HPP
#define QCHOM_MATERIAL_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qchom/errors.hpp"
#include "qchom/field.hpp"

namespace qchom {

enum class MaterialKind { scalar_conductivity, elasticity, inverse_permittivity };

inline std::string to_string(MaterialKind k) {
  switch (k) {
    case MaterialKind::scalar_conductivity: return "conductivity";
    case MaterialKind::elasticity: return "elasticity";
    case MaterialKind::inverse_permittivity: return "inverse_permittivity";
  }
  return "?";
}

// --- Mandel (orthonormal Voigt) representation ---------------------------
//
// Symmetric n x n matrices are flattened to vectors of dimension
// s = n(n+1)/2 with sqrt(2) weights on the off-diagonal slots, so the
// Frobenius inner product, eigenvalue bounds and Loewner comparisons of
// rank-4 tensors carry over to their s x s matrices unchanged.

inline int mandel_dim(int n) { return n * (n + 1) / 2; }

inline std::vector<std::pair<int, int>> mandel_pairs(int n) {
  std::vector<std::pair<int, int>> p;
  for (int i = 0; i < n; ++i) p.emplace_back(i, i);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) p.emplace_back(i, j);
  return p;
}

inline Eigen::VectorXd mandel_of_sym(const Eigen::MatrixXd& e) {
  const int n = static_cast<int>(e.rows());
  auto pairs = mandel_pairs(n);
  Eigen::VectorXd v(pairs.size());
  const double rt2 = std::numbers::sqrt2;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    auto [i, j] = pairs[a];
    v[a] = (i == j) ? e(i, i) : rt2 * 0.5 * (e(i, j) + e(j, i));
  }
  return v;
}

inline Eigen::MatrixXd sym_of_mandel(const Eigen::VectorXd& v, int n) {
  auto pairs = mandel_pairs(n);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  const double inv_rt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    auto [i, j] = pairs[a];
    if (i == j)
      e(i, i) = v[a];
    else
      e(i, j) = e(j, i) = v[a] * inv_rt2;
  }
  return e;
}

/// Mandel matrix of the isotropic stiffness lambda*I(x)I + 2*mu*I_sym.
inline Eigen::MatrixXd isotropic_stiffness_mandel(int n, double lambda,
                                                  double mu) {
  const int s = mandel_dim(n);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(s);
  for (int i = 0; i < n; ++i) m[i] = 1.0;
  return lambda * (m * m.transpose()) +
         2.0 * mu * Eigen::MatrixXd::Identity(s, s);
}

/// Coefficient field of a cell problem: an isotropic scalar, a symmetric
/// n x n tensor per point, or a rank-4 stiffness stored as its Mandel
/// matrix per point. Eigenvalue bounds over the grid are computed once at
/// construction; c_min > 0 is the coercivity constant the solvers demand.
struct MaterialField {
  MaterialKind kind;
  PeriodicField values;
  int n = 0;       // physical dimension the coefficient acts in
  double c_min = 0.0;
  double c_max = 0.0;

  bool is_scalar() const { return values.rank() == FieldRank::scalar; }

  /// Dimension of the vectors the pointwise coefficient multiplies:
  /// n for tensor2 / scalar, mandel_dim(n) for stiffness tensors.
  int op_dim() const {
    return values.rank() == FieldRank::tensor4 ? mandel_dim(n) : n;
  }

  void require_coercive() const {
    if (!(c_min > 0.0))
      throw CoercivityError("material is not coercive: min eigenvalue " +
                            std::to_string(c_min));
  }
};

namespace detail {

inline void material_bounds(MaterialField& mat) {
  const std::size_t total = mat.values.grid().total();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (mat.values.rank() == FieldRank::scalar) {
    for (std::size_t p = 0; p < total; ++p) {
      double v = mat.values.samples(0)[p].real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  } else {
    const int d = mat.op_dim();
    Eigen::MatrixXd a(d, d);
    for (std::size_t p = 0; p < total; ++p) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          a(i, j) = mat.values.samples(i * d + j)[p].real();
      double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(
            "material tensor is not symmetric at a grid point (defect " +
            std::to_string(asym) + ")");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
  }
  mat.c_min = lo;
  mat.c_max = hi;
}

}  // namespace detail

/// Wraps a field as a material coefficient and computes its bounds.
/// Scalar fields are isotropic coefficients; tensor2 fields carry n x n
/// entries row-major over components; tensor4 fields carry the s x s
/// Mandel matrix row-major.
inline MaterialField make_material(MaterialKind kind, PeriodicField values,
                                   int n) {
  MaterialField mat{kind, std::move(values), n, 0.0, 0.0};
  const std::size_t comps = mat.values.components();
  const int d = mat.op_dim();
  const bool ok =
      (mat.values.rank() == FieldRank::scalar && comps == 1) ||
      (mat.values.rank() == FieldRank::tensor2 &&
       comps == static_cast<std::size_t>(n * n)) ||
      (mat.values.rank() == FieldRank::tensor4 &&
       comps == static_cast<std::size_t>(d * d) &&
       kind == MaterialKind::elasticity);
  if (!ok)
    throw std::invalid_argument("make_material: rank/components mismatch");
  if (kind == MaterialKind::elasticity && mat.values.rank() != FieldRank::tensor4)
    throw std::invalid_argument("make_material: elasticity needs tensor4");
  detail::material_bounds(mat);
  return mat;
}

inline MaterialField constant_scalar_material(const Grid& grid,
                                              MaterialKind kind, int n,
                                              double value) {
  PeriodicField::Plane plane(grid.total(), value);
  std::vector<PeriodicField::Plane> planes{std::move(plane)};
  return make_material(
      kind, PeriodicField::from_samples(grid, FieldRank::scalar,
                                        std::move(planes)),
      n);
}

inline MaterialField constant_tensor_material(const Grid& grid,
                                              MaterialKind kind,
                                              const Eigen::MatrixXd& a) {
  const int d = static_cast<int>(a.rows());
  std::vector<PeriodicField::Plane> planes(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      planes[i * d + j].assign(grid.total(), a(i, j));
  FieldRank rank = kind == MaterialKind::elasticity ? FieldRank::tensor4
                                                    : FieldRank::tensor2;
  int n = kind == MaterialKind::elasticity
              ? static_cast<int>((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0)
              : d;
  return make_material(
      kind, PeriodicField::from_samples(grid, rank, std::move(planes)), n);
}

template <typename Fn>
MaterialField scalar_material_from_function(const Grid& grid,
                                            MaterialKind kind, int n,
                                            Fn&& fn) {
  return make_material(kind, field_from_function(grid, std::forward<Fn>(fn)),
                       n);
}

/// sigma(y) = 2 + cos(2 pi y_1): the smooth laminate whose harmonic mean
/// over the cell is 1/sqrt(3).
inline MaterialField cosine_laminate_material(const Grid& grid,
                                              MaterialKind kind, int n) {
  return scalar_material_from_function(
      grid, kind, n, [](const std::vector<double>& y) {
        return 2.0 + std::cos(2.0 * std::numbers::pi * y[0]);
      });
}

/// Two-phase indicator on Y^2 whose trace along the slope-tau cut visits
/// the phases in Fibonacci-word order: phase A on {y_2 < tau * y_1}.
/// Area fraction of A is exactly 1 - 1/(2 tau).
inline double fibonacci_phase_fraction_a() {
  return 1.0 - 1.0 / (2.0 * kGoldenRatio);
}

inline MaterialField fibonacci_checkerboard_material(const Grid& grid,
                                                     MaterialKind kind, int n,
                                                     double sigma_a,
                                                     double sigma_b) {
  if (grid.dim() != 2)
    throw std::invalid_argument("fibonacci_checkerboard_material: m = 2 only");
  return scalar_material_from_function(
      grid, kind, n, [=](const std::vector<double>& y) {
        return y[1] < kGoldenRatio * y[0] ? sigma_a : sigma_b;
      });
}

/// Smooth two-phase blend sigma_a + (sigma_b - sigma_a) * s(y) with
/// s(y) = (1 + mean_j cos(2 pi y_j)) / 2 in [0, 1]; band-limited with
/// modes |k|_inf <= 1, hence resolved exactly on any grid with N >= 4.
inline MaterialField smooth_two_phase_material(const Grid& grid,
                                               MaterialKind kind, int n,
                                               double sigma_a,
                                               double sigma_b) {
  const int m = grid.dim();
  return scalar_material_from_function(
      grid, kind, n, [=](const std::vector<double>& y) {
        double c = 0.0;
        for (int j = 0; j < m; ++j)
          c += std::cos(2.0 * std::numbers::pi * y[j]);
        double s = 0.5 * (1.0 + c / m);
        return sigma_a + (sigma_b - sigma_a) * s;
      });
}

/// Isotropic heterogeneous stiffness from Lame coefficient fields.
template <typename LambdaFn, typename MuFn>
MaterialField isotropic_elasticity_material(const Grid& grid, int n,
                                            LambdaFn&& lambda_fn,
                                            MuFn&& mu_fn) {
  const int s = mandel_dim(n);
  std::vector<PeriodicField::Plane> planes(s * s,
                                           PeriodicField::Plane(grid.total()));
  for (std::size_t p = 0; p < grid.total(); ++p) {
    auto y = grid.point(p);
    Eigen::MatrixXd c =
        isotropic_stiffness_mandel(n, lambda_fn(y), mu_fn(y));
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) planes[i * s + j][p] = c(i, j);
  }
  return make_material(
      MaterialKind::elasticity,
      PeriodicField::from_samples(grid, FieldRank::tensor4, std::move(planes)),
      n);
}

/// Reads a coefficient field back from a raw dump (see field.hpp).
inline MaterialField material_from_dump(MaterialKind kind,
                                        const std::filesystem::path& base,
                                        int n) {
  return make_material(kind, read_field_dump(base), n);
}

}  // namespace qchom

#endif
