#ifndef QCHOM_PROJECTION_HPP
#define QCHOM_PROJECTION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchom/errors.hpp"
#include "qchom/quadext.hpp"

namespace qchom {

inline constexpr double kGoldenRatio = 1.6180339887498948482;

/// The m x n matrix R of a cut-and-projection (m > n). Entries are stored
/// as float64; when every entry lies in Q(tau) the exact representation is
/// kept alongside and zero tests against integer vectors are exact.
///
/// `orthonormal` records whether R^T R = I_n holds (within 1e-12, exactly
/// for exact entries). It is informational: no operator requires it.
class ProjectionMatrix {
 public:
  ProjectionMatrix(Eigen::MatrixXd entries)
      : m_(static_cast<int>(entries.rows())),
        n_(static_cast<int>(entries.cols())),
        entries_(std::move(entries)) {
    check_shape();
    orthonormal_ = detect_orthonormal();
  }

  ProjectionMatrix(std::vector<std::vector<QuadExt>> quad)
      : m_(static_cast<int>(quad.size())),
        n_(quad.empty() ? 0 : static_cast<int>(quad.front().size())),
        quad_(std::move(quad)) {
    entries_.resize(m_, n_);
    for (int i = 0; i < m_; ++i) {
      if (static_cast<int>((*quad_)[i].size()) != n_)
        throw std::invalid_argument("ProjectionMatrix: ragged rows");
      for (int j = 0; j < n_; ++j) entries_(i, j) = (*quad_)[i][j].to_double();
    }
    check_shape();
    orthonormal_ = detect_orthonormal();
  }

  int rows() const { return m_; }  // ambient dimension m
  int cols() const { return n_; }  // physical dimension n
  bool exact() const { return quad_.has_value(); }
  bool orthonormal() const { return orthonormal_; }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const std::vector<std::vector<QuadExt>>& quad_entries() const {
    return *quad_;
  }

  /// Projected wavevector xi = R^T k for an integer multi-index k.
  Eigen::VectorXd projected(const std::vector<int>& k) const {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s += entries_(i, j) * k[i];
      xi[j] = s;
    }
    return xi;
  }

  /// Exact projected wavevector; only valid when exact() is true.
  std::vector<QuadExt> projected_exact(const std::vector<int>& k) const {
    std::vector<QuadExt> xi(n_);
    for (int j = 0; j < n_; ++j) {
      QuadExt s;
      for (int i = 0; i < m_; ++i)
        s = s + (*quad_)[i][j] * QuadExt(Rational(k[i]));
      xi[j] = s;
    }
    return xi;
  }

  /// Throws RankDeficientError unless R has full column rank n.
  void require_full_rank() const {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(entries_);
    if (qr.rank() < n_)
      throw RankDeficientError("projection matrix is rank-deficient (rank " +
                               std::to_string(qr.rank()) + " < n = " +
                               std::to_string(n_) + ")");
  }

  /// R with R^T = (1, tau): the Fibonacci laminate projection, exact.
  static ProjectionMatrix fibonacci2() {
    std::vector<std::vector<QuadExt>> q(2, std::vector<QuadExt>(1));
    q[0][0] = QuadExt(Rational(1));
    q[1][0] = QuadExt::golden();
    return ProjectionMatrix(std::move(q));
  }

  /// The 4x2 projection of the Penrose tiling (decagonal phase). Entries
  /// involve nested radicals, so only the float representation is kept.
  static ProjectionMatrix penrose4() {
    const double tau = kGoldenRatio;
    const double c1 = 1.0 / std::sqrt(6.0);   // 1/(sqrt2*sqrt3)
    const double c2 = 1.0 / std::sqrt(10.0);  // 1/(sqrt2*sqrt5)
    Eigen::MatrixXd rt(2, 4);
    rt << c1 * (tau - 1), -c1 * tau, -c1 * tau, c1 * (tau - 1),
        c2 * std::sqrt(tau + 2), c2 * std::sqrt(3 - tau),
        -c2 * std::sqrt(3 - tau), -c2 * std::sqrt(tau + 2);
    return ProjectionMatrix(Eigen::MatrixXd(rt.transpose()));
  }

  /// Banded (n+1) x n matrix with rows of R^T equal to e_i + tau e_{i+1}.
  /// Exact, full rank, and criterion-satisfying for every n; handy as a
  /// generic quasiperiodic projection when no physical matrix is at hand.
  static ProjectionMatrix golden_chain(int n) {
    if (n < 1) throw std::invalid_argument("golden_chain: n must be >= 1");
    std::vector<std::vector<QuadExt>> q(n + 1, std::vector<QuadExt>(n));
    for (int j = 0; j < n; ++j) {
      q[j][j] = QuadExt(Rational(1));
      q[j + 1][j] = QuadExt::golden();
    }
    return ProjectionMatrix(std::move(q));
  }

 private:
  void check_shape() const {
    if (n_ < 1 || m_ <= n_)
      throw std::invalid_argument(
          "ProjectionMatrix: need m > n >= 1, got m = " + std::to_string(m_) +
          ", n = " + std::to_string(n_));
  }

  bool detect_orthonormal() const {
    Eigen::MatrixXd g = entries_.transpose() * entries_;
    return (g - Eigen::MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff() <
           1e-12;
  }

  int m_ = 0;
  int n_ = 0;
  Eigen::MatrixXd entries_;
  std::optional<std::vector<std::vector<QuadExt>>> quad_;
  bool orthonormal_ = false;
};

/// Result of a finite criterion scan over 0 < |k|_inf <= k_max.
struct CriterionReport {
  int k_max = 0;
  std::vector<std::vector<int>> violations;  // multi-indices with R^T k = 0
  double min_norm = 0.0;  // min |R^T k| over all scanned nonzero k
  bool certified_exact = false;
};

namespace detail {

template <typename Fn>
void for_each_box_index(int m, int k_max, Fn&& fn) {
  std::vector<int> k(m, -k_max);
  for (;;) {
    bool all_zero = true;
    for (int v : k)
      if (v != 0) {
        all_zero = false;
        break;
      }
    if (!all_zero) fn(k);
    int axis = m - 1;
    while (axis >= 0) {
      if (++k[axis] <= k_max) break;
      k[axis] = -k_max;
      --axis;
    }
    if (axis < 0) break;
  }
}

}  // namespace detail

/// Scans all integer multi-indices with 0 < |k|_inf <= k_max for
/// violations of the irrationality criterion R^T k != 0. The zero test is
/// exact when the matrix has exact entries; otherwise |R^T k| < 1e-12
/// counts as a violation. min_norm is reported either way to size solver
/// grids (it bounds the smallest divisor the spectral operators will see).
inline CriterionReport check_criterion(const ProjectionMatrix& R, int k_max) {
  if (k_max < 1) throw std::invalid_argument("check_criterion: k_max >= 1");
  R.require_full_rank();

  CriterionReport report;
  report.k_max = k_max;
  report.certified_exact = R.exact();
  double min_norm = std::numeric_limits<double>::infinity();

  detail::for_each_box_index(R.rows(), k_max, [&](const std::vector<int>& k) {
    Eigen::VectorXd xi = R.projected(k);
    double norm = xi.norm();
    min_norm = std::min(min_norm, norm);
    bool violated;
    if (R.exact()) {
      std::vector<QuadExt> xq = R.projected_exact(k);
      violated = true;
      for (const QuadExt& c : xq)
        if (!c.is_zero()) {
          violated = false;
          break;
        }
    } else {
      violated = norm < 1e-12;
    }
    if (violated) report.violations.push_back(k);
  });

  report.min_norm = min_norm;
  return report;
}

// --- JSON serialization -----------------------------------------------
//
// {"m": int, "n": int, "entries": [[...]], "exact": bool,
//  "quad_entries": [[{"a": [p, q], "b": [p, q]}, ...], ...]}
// with rationals as [numerator, denominator] pairs. "entries" holds the
// m x n float matrix row by row and is always present.

inline nlohmann::ordered_json to_json(const ProjectionMatrix& R) {
  nlohmann::ordered_json j;
  j["m"] = R.rows();
  j["n"] = R.cols();
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < R.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int jj = 0; jj < R.cols(); ++jj) row.push_back(R.entries()(i, jj));
    rows.push_back(row);
  }
  j["entries"] = rows;
  j["exact"] = R.exact();
  if (R.exact()) {
    auto qrows = nlohmann::ordered_json::array();
    for (const auto& row : R.quad_entries()) {
      auto qrow = nlohmann::ordered_json::array();
      for (const QuadExt& q : row) {
        qrow.push_back({{"a", {q.rational_part().num(), q.rational_part().den()}},
                        {"b", {q.golden_part().num(), q.golden_part().den()}}});
      }
      qrows.push_back(qrow);
    }
    j["quad_entries"] = qrows;
  }
  return j;
}

inline ProjectionMatrix projection_from_json(const nlohmann::json& j) {
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  const bool exact = j.value("exact", false);
  if (exact) {
    const auto& qrows = j.at("quad_entries");
    std::vector<std::vector<QuadExt>> q;
    q.reserve(m);
    for (const auto& qrow : qrows) {
      std::vector<QuadExt> row;
      for (const auto& cell : qrow) {
        auto a = cell.at("a");
        auto b = cell.at("b");
        row.emplace_back(Rational(a.at(0).get<std::int64_t>(),
                                  a.at(1).get<std::int64_t>()),
                         Rational(b.at(0).get<std::int64_t>(),
                                  b.at(1).get<std::int64_t>()));
      }
      q.push_back(std::move(row));
    }
    ProjectionMatrix R(std::move(q));
    if (R.rows() != m || R.cols() != n)
      throw std::invalid_argument("projection JSON: dimension mismatch");
    return R;
  }
  Eigen::MatrixXd e(m, n);
  const auto& rows = j.at("entries");
  for (int i = 0; i < m; ++i)
    for (int jj = 0; jj < n; ++jj) e(i, jj) = rows.at(i).at(jj).get<double>();
  return ProjectionMatrix(std::move(e));
}

}  // namespace qchom

#endif
