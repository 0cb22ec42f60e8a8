#ifndef QCHOM_OPERATORS_HPP
#define QCHOM_OPERATORS_HPP

#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "qchom/errors.hpp"
#include "qchom/field.hpp"
#include "qchom/grid.hpp"
#include "qchom/projection.hpp"

namespace qchom {

inline constexpr double kSingularXiTol = 1e-12;

/// Per-mode data for a (grid, R) pair: projected wavevectors xi = R^T k,
/// their squared norms, and which flat indices sit on a Nyquist plane
/// (some k_j = -N/2, the unpaired frequencies of an even grid). Nyquist
/// modes are excluded from the smallest-divisor statistics; building the
/// table fails loudly if any non-Nyquist k != 0 has xi = 0, since every
/// projected operator divides by |xi| there.
struct ModeTable {
  std::vector<double> xi;        // flat-major, n entries per mode
  std::vector<double> xi_norm2;  // |xi_k|^2 per flat index
  std::vector<char> nyquist;     // 1 if any k_j = -N/2
  double min_xi_norm = 0.0;      // over non-Nyquist k != 0
  int n = 0;

  static ModeTable build(const Grid& grid, const ProjectionMatrix& R) {
    if (R.rows() != grid.dim())
      throw std::invalid_argument("ModeTable: grid dimension != matrix rows");
    ModeTable t;
    t.n = R.cols();
    const std::size_t total = grid.total();
    const int N = grid.points_per_axis();
    t.xi.resize(total * t.n);
    t.xi_norm2.resize(total);
    t.nyquist.assign(total, 0);
    double min_norm2 = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> singular;
    std::vector<int> digits;
    for (std::size_t flat = 0; flat < total; ++flat) {
      grid.unflatten(flat, digits);
      bool nyq = false;
      bool zero = true;
      double norm2 = 0.0;
      for (int j = 0; j < t.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < grid.dim(); ++i) {
          int mode = grid.mode_of(digits[i]);
          s += R.entries()(i, j) * mode;
        }
        t.xi[flat * t.n + j] = s;
        norm2 += s * s;
      }
      for (int i = 0; i < grid.dim(); ++i) {
        int mode = grid.mode_of(digits[i]);
        if (mode != 0) zero = false;
        if (mode == -N / 2) nyq = true;
      }
      t.xi_norm2[flat] = norm2;
      t.nyquist[flat] = nyq ? 1 : 0;
      if (!zero && !nyq) {
        min_norm2 = std::min(min_norm2, norm2);
        if (norm2 < kSingularXiTol * kSingularXiTol) {
          std::vector<int> k(grid.dim());
          for (int i = 0; i < grid.dim(); ++i) k[i] = grid.mode_of(digits[i]);
          singular.push_back(std::move(k));
        }
      }
    }
    if (!singular.empty()) throw SingularModeError::at(singular);
    t.min_xi_norm = std::sqrt(min_norm2);
    return t;
  }
};

namespace detail {

inline void require_components(const PeriodicField& f, std::size_t want,
                               const char* who) {
  if (f.components() != want)
    throw std::invalid_argument(std::string(who) + ": field has " +
                                std::to_string(f.components()) +
                                " components, expected " +
                                std::to_string(want));
}

}  // namespace detail

/// grad_R u = (R^T grad_y) u: per mode k, 2*pi*i (R^T k) u_k.
inline PeriodicField grad_r(const PeriodicField& u,
                            const ProjectionMatrix& R) {
  detail::require_components(u, 1, "grad_r");
  const Grid& g = u.grid();
  ModeTable t = ModeTable::build(g, R);
  constexpr std::complex<double> two_pi_i(0.0, 2.0 * std::numbers::pi);
  std::vector<PeriodicField::Plane> out(
      t.n, PeriodicField::Plane(g.total()));
  const auto& uk = u.coefficients(0);
  for (std::size_t flat = 0; flat < g.total(); ++flat) {
    std::complex<double> f = two_pi_i * uk[flat];
    for (int j = 0; j < t.n; ++j)
      out[j][flat] = f * t.xi[flat * t.n + j];
  }
  return PeriodicField::from_coefficients(g, FieldRank::vector,
                                          std::move(out));
}

/// div_R v = (R^T grad_y) . v: per mode, 2*pi*i (R^T k) . v_k. Identical
/// to the plain m-dimensional divergence of the lifted field R v.
inline PeriodicField div_r(const PeriodicField& v, const ProjectionMatrix& R) {
  detail::require_components(v, static_cast<std::size_t>(R.cols()), "div_r");
  const Grid& g = v.grid();
  ModeTable t = ModeTable::build(g, R);
  constexpr std::complex<double> two_pi_i(0.0, 2.0 * std::numbers::pi);
  PeriodicField::Plane out(g.total());
  for (std::size_t flat = 0; flat < g.total(); ++flat) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < t.n; ++j)
      acc += t.xi[flat * t.n + j] * v.coefficients(j)[flat];
    out[flat] = two_pi_i * acc;
  }
  std::vector<PeriodicField::Plane> planes{std::move(out)};
  return PeriodicField::from_coefficients(g, FieldRank::scalar,
                                          std::move(planes));
}

/// curl_R v = (R^T grad_y) x v for three-component fields (n = 3 only).
inline PeriodicField curl_r(const PeriodicField& v,
                            const ProjectionMatrix& R) {
  if (R.cols() != 3)
    throw UnsupportedDimensionError("curl_r requires n = 3, got n = " +
                                    std::to_string(R.cols()));
  detail::require_components(v, 3, "curl_r");
  const Grid& g = v.grid();
  ModeTable t = ModeTable::build(g, R);
  constexpr std::complex<double> two_pi_i(0.0, 2.0 * std::numbers::pi);
  std::vector<PeriodicField::Plane> out(3, PeriodicField::Plane(g.total()));
  for (std::size_t flat = 0; flat < g.total(); ++flat) {
    const double x0 = t.xi[flat * 3 + 0];
    const double x1 = t.xi[flat * 3 + 1];
    const double x2 = t.xi[flat * 3 + 2];
    const std::complex<double> v0 = v.coefficients(0)[flat];
    const std::complex<double> v1 = v.coefficients(1)[flat];
    const std::complex<double> v2 = v.coefficients(2)[flat];
    out[0][flat] = two_pi_i * (x1 * v2 - x2 * v1);
    out[1][flat] = two_pi_i * (x2 * v0 - x0 * v2);
    out[2][flat] = two_pi_i * (x0 * v1 - x1 * v0);
  }
  return PeriodicField::from_coefficients(g, FieldRank::vector,
                                          std::move(out));
}

/// Orthogonal splitting of a vector field into its R-gradient part (mode
/// coefficients parallel to xi) and the divergence-free remainder. The
/// mean mode is a constant, divergence-free by itself, and goes entirely
/// to the second part.
inline std::pair<PeriodicField, PeriodicField> decompose_div(
    const PeriodicField& v, const ProjectionMatrix& R) {
  detail::require_components(v, static_cast<std::size_t>(R.cols()),
                             "decompose_div");
  const Grid& g = v.grid();
  ModeTable t = ModeTable::build(g, R);
  std::vector<PeriodicField::Plane> grad_part(t.n,
                                              PeriodicField::Plane(g.total()));
  std::vector<PeriodicField::Plane> rest(t.n,
                                         PeriodicField::Plane(g.total()));
  for (std::size_t flat = 0; flat < g.total(); ++flat) {
    if (flat == 0 ||
        t.xi_norm2[flat] < kSingularXiTol * kSingularXiTol) {
      for (int j = 0; j < t.n; ++j) rest[j][flat] = v.coefficients(j)[flat];
      continue;
    }
    std::complex<double> dot = 0.0;
    for (int j = 0; j < t.n; ++j)
      dot += t.xi[flat * t.n + j] * v.coefficients(j)[flat];
    const std::complex<double> scale = dot / t.xi_norm2[flat];
    for (int j = 0; j < t.n; ++j) {
      std::complex<double> p = t.xi[flat * t.n + j] * scale;
      grad_part[j][flat] = p;
      rest[j][flat] = v.coefficients(j)[flat] - p;
    }
  }
  return {PeriodicField::from_coefficients(g, FieldRank::vector,
                                           std::move(grad_part)),
          PeriodicField::from_coefficients(g, FieldRank::vector,
                                           std::move(rest))};
}

/// Orthogonal splitting of a three-component field into its curl-free
/// part (an R-gradient, coefficients parallel to xi) and the R-curl part
/// (coefficients orthogonal to xi). Mean mode handling as decompose_div.
inline std::pair<PeriodicField, PeriodicField> decompose_curl(
    const PeriodicField& v, const ProjectionMatrix& R) {
  if (R.cols() != 3)
    throw UnsupportedDimensionError("decompose_curl requires n = 3");
  auto [parallel, orthogonal] = decompose_div(v, R);
  // For n = 3 the same per-mode projector separates curl-free fields
  // (gradients) from curls; only the naming of the parts differs. The
  // mean constant is curl-free, so it moves to the first part here.
  std::vector<PeriodicField::Plane> cf(3), curl(3);
  for (int j = 0; j < 3; ++j) {
    cf[j] = parallel.coefficients(j);
    curl[j] = orthogonal.coefficients(j);
    cf[j][0] = orthogonal.coefficients(j)[0];
    curl[j][0] = 0.0;
  }
  return {PeriodicField::from_coefficients(v.grid(), FieldRank::vector,
                                           std::move(cf)),
          PeriodicField::from_coefficients(v.grid(), FieldRank::vector,
                                           std::move(curl))};
}

/// Solves -div_R grad_R theta = f for the unique mean-zero theta:
/// theta_k = f_k / (4 pi^2 |R^T k|^2). The right-hand side must have zero
/// mean (|f_0| < 1e-12) or no periodic solution exists.
inline PeriodicField r_poisson_solve(const PeriodicField& f,
                                     const ProjectionMatrix& R) {
  detail::require_components(f, 1, "r_poisson_solve");
  if (std::abs(f.mean()) >= 1e-12)
    throw SolvabilityError(
        "r_poisson_solve: right-hand side has nonzero mean " +
        std::to_string(std::abs(f.mean())));
  const Grid& g = f.grid();
  ModeTable t = ModeTable::build(g, R);
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const double fmax = f.max_abs();
  PeriodicField::Plane out(g.total());
  std::vector<std::vector<int>> singular;
  for (std::size_t flat = 1; flat < g.total(); ++flat) {
    if (t.xi_norm2[flat] < kSingularXiTol * kSingularXiTol) {
      if (std::abs(f.coefficients(0)[flat]) > 1e-14 * fmax)
        singular.push_back(g.mode_multi_index(flat));
      continue;
    }
    out[flat] = f.coefficients(0)[flat] / (four_pi2 * t.xi_norm2[flat]);
  }
  if (!singular.empty()) throw SingularModeError::at(singular);
  std::vector<PeriodicField::Plane> planes{std::move(out)};
  return PeriodicField::from_coefficients(g, FieldRank::scalar,
                                          std::move(planes));
}

/// L^2(Y^m) inner product <a, b> = sum_c mean(a_c conj(b_c)), computed in
/// sample space (equals the Parseval sum over coefficients).
inline std::complex<double> l2_inner(const PeriodicField& a,
                                     const PeriodicField& b) {
  if (a.components() != b.components() || !(a.grid() == b.grid()))
    throw std::invalid_argument("l2_inner: incompatible fields");
  std::complex<double> acc = 0.0;
  for (std::size_t c = 0; c < a.components(); ++c) {
    const auto& pa = a.samples(c);
    const auto& pb = b.samples(c);
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * std::conj(pb[i]);
    acc += s / static_cast<double>(pa.size());
  }
  return acc;
}

inline double l2_norm(const PeriodicField& a) {
  return std::sqrt(std::abs(l2_inner(a, a)));
}

/// Linear combination alpha*a + beta*b, component-wise.
inline PeriodicField axpby(std::complex<double> alpha, const PeriodicField& a,
                           std::complex<double> beta, const PeriodicField& b) {
  if (a.components() != b.components() || !(a.grid() == b.grid()))
    throw std::invalid_argument("axpby: incompatible fields");
  std::vector<PeriodicField::Plane> planes(a.components());
  for (std::size_t c = 0; c < a.components(); ++c) {
    planes[c].resize(a.grid().total());
    const auto& pa = a.coefficients(c);
    const auto& pb = b.coefficients(c);
    for (std::size_t i = 0; i < planes[c].size(); ++i)
      planes[c][i] = alpha * pa[i] + beta * pb[i];
  }
  return PeriodicField::from_coefficients(a.grid(), a.rank(),
                                          std::move(planes));
}

}  // namespace qchom

#endif
