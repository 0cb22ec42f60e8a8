#ifndef QCHOM_ERGODIC_HPP
#define QCHOM_ERGODIC_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qchom/field.hpp"
#include "qchom/projection.hpp"

namespace qchom {

/// sinc(x) = sin(pi x) / (pi x), sinc(0) = 1.
inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

/// Exact box average of the projected mode e^{2 pi i k . R x} over
/// [-A, A]^n: the product over j of sinc(2 (R^T k)_j A). Vanishing of all
/// nonzero-mode averages as A grows is what makes the ergodic mean match
/// the cell mean.
inline std::complex<double> sinc_box_average(const std::vector<int>& k,
                                             const ProjectionMatrix& R,
                                             double A) {
  Eigen::VectorXd xi = R.projected(k);
  double prod = 1.0;
  for (int j = 0; j < xi.size(); ++j) prod *= sinc(2.0 * xi[j] * A);
  return {prod, 0.0};
}

/// Large-box average of the quasiperiodic trace g(R x) against the cell
/// mean of g.
struct ErgodicEstimate {
  double box_halfwidth = 0.0;
  std::complex<double> value;
  std::complex<double> cell_mean;
  double gap = 0.0;
};

/// Deterministic midpoint-rule average of g(R x) over [-A, A]^n with
/// `samples` points per axis (so runs are reproducible bit for bit).
/// Evaluation sums the active Fourier modes of g directly.
inline ErgodicEstimate ergodic_mean(const PeriodicField& g,
                                    const ProjectionMatrix& R, double A,
                                    long samples) {
  if (!(A > 0)) throw std::invalid_argument("ergodic_mean: A > 0");
  if (samples < 2) throw std::invalid_argument("ergodic_mean: samples >= 2");
  const int n = R.cols();
  const int m = R.rows();
  if (g.grid().dim() != m)
    throw std::invalid_argument("ergodic_mean: grid/matrix mismatch");

  TrigEvaluator eval(g);
  const double step = 2.0 * A / static_cast<double>(samples);
  std::complex<double> acc = 0.0;
  std::vector<long> idx(n, 0);
  std::vector<double> x(n), y(m);
  long count = 0;
  for (;;) {
    for (int j = 0; j < n; ++j)
      x[j] = -A + (static_cast<double>(idx[j]) + 0.5) * step;
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += R.entries()(i, j) * x[j];
      y[i] = v - std::floor(v);
    }
    acc += eval(y);
    ++count;
    int axis = n - 1;
    while (axis >= 0) {
      if (++idx[axis] < samples) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }

  ErgodicEstimate est;
  est.box_halfwidth = A;
  est.value = acc / static_cast<double>(count);
  est.cell_mean = g.mean();
  est.gap = std::abs(est.value - est.cell_mean);
  return est;
}

/// Independent quadrature oracle for the box average of a single mode:
/// composite Gauss-Legendre integration of e^{2 pi i xi x} per axis,
/// resolved against the total phase so the result is good to ~1e-12.
inline std::complex<double> quadrature_box_average(const std::vector<int>& k,
                                                   const ProjectionMatrix& R,
                                                   double A) {
  static const double node[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
  static const double weight[4] = {0.3478548451374538, 0.6521451548625461,
                                   0.6521451548625461, 0.3478548451374538};
  Eigen::VectorXd xi = R.projected(k);
  std::complex<double> prod = 1.0;
  for (int j = 0; j < xi.size(); ++j) {
    const double phase_per_unit = std::abs(xi[j]);
    const long panels =
        std::max(16L, static_cast<long>(std::ceil(4.0 * phase_per_unit * A)));
    const double h = 2.0 * A / static_cast<double>(panels);
    std::complex<double> integral = 0.0;
    for (long p = 0; p < panels; ++p) {
      const double a = -A + p * h;
      const double mid = a + 0.5 * h;
      for (int q = 0; q < 4; ++q) {
        const double xq = mid + 0.5 * h * node[q];
        integral += weight[q] *
                    std::polar(1.0, 2.0 * std::numbers::pi * xi[j] * xq);
      }
    }
    integral *= 0.5 * h;
    prod *= integral / (2.0 * A);
  }
  return prod;
}

}  // namespace qchom

#endif
