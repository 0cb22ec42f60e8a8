#ifndef QCHOM_GRID_HPP
#define QCHOM_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qchom {

/// Uniform collocation grid on the periodicity cell Y^m = [0,1)^m with N
/// points per axis (N even). Storage is row-major with y_1 slowest. Mode
/// indices run over k_j in {-N/2, ..., N/2 - 1}; the axis index j maps to
/// the signed mode j < N/2 ? j : j - N (the DFT layout).
class Grid {
 public:
  Grid(int m, int points_per_axis) : m_(m), n_(points_per_axis) {
    if (m < 1) throw std::invalid_argument("Grid: m >= 1");
    if (n_ < 2 || n_ % 2 != 0)
      throw std::invalid_argument("Grid: points_per_axis must be even >= 2");
    total_ = 1;
    for (int i = 0; i < m_; ++i) {
      if (total_ > (std::size_t(1) << 40) / static_cast<std::size_t>(n_))
        throw std::invalid_argument("Grid: too many points");
      total_ *= static_cast<std::size_t>(n_);
    }
  }

  int dim() const { return m_; }
  int points_per_axis() const { return n_; }
  std::size_t total() const { return total_; }

  bool operator==(const Grid& o) const { return m_ == o.m_ && n_ == o.n_; }

  /// Signed mode of an axis index in [0, N).
  int mode_of(int axis_index) const {
    return axis_index < n_ / 2 ? axis_index : axis_index - n_;
  }

  /// Axis index in [0, N) of a signed mode in [-N/2, N/2).
  int index_of_mode(int mode) const { return mode >= 0 ? mode : mode + n_; }

  void unflatten(std::size_t flat, std::vector<int>& digits) const {
    digits.resize(m_);
    for (int axis = m_ - 1; axis >= 0; --axis) {
      digits[axis] = static_cast<int>(flat % n_);
      flat /= n_;
    }
  }

  std::size_t flatten(const std::vector<int>& digits) const {
    std::size_t flat = 0;
    for (int axis = 0; axis < m_; ++axis)
      flat = flat * n_ + static_cast<std::size_t>(digits[axis]);
    return flat;
  }

  /// Signed mode multi-index of a flat spectral index.
  std::vector<int> mode_multi_index(std::size_t flat) const {
    std::vector<int> digits;
    unflatten(flat, digits);
    for (int& d : digits) d = mode_of(d);
    return digits;
  }

  /// Sample point y = digits / N of a flat grid index.
  std::vector<double> point(std::size_t flat) const {
    std::vector<int> digits;
    unflatten(flat, digits);
    std::vector<double> y(m_);
    for (int i = 0; i < m_; ++i)
      y[i] = static_cast<double>(digits[i]) / n_;
    return y;
  }

 private:
  int m_;
  int n_;
  std::size_t total_;
};

}  // namespace qchom

#endif
