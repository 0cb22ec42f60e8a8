#ifndef QCHOM_ERRORS_HPP
#define QCHOM_ERRORS_HPP

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qchom {

/// Structural defect of a projection matrix (not a criterion violation).
struct RankDeficientError : std::runtime_error {
  explicit RankDeficientError(const std::string& what)
      : std::runtime_error(what) {}
};

struct UnsupportedDimensionError : std::invalid_argument {
  explicit UnsupportedDimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// A nonzero grid mode k with R^T k = 0: the criterion fails at grid
/// resolution and the projected operators degenerate on that mode.
struct SingularModeError : std::runtime_error {
  SingularModeError(std::string what, std::vector<std::vector<int>> offending)
      : std::runtime_error(std::move(what)), modes(std::move(offending)) {}
  std::vector<std::vector<int>> modes;

  static SingularModeError at(const std::vector<std::vector<int>>& modes) {
    std::ostringstream os;
    os << "singular projected mode(s):";
    for (const auto& k : modes) {
      os << " (";
      for (std::size_t i = 0; i < k.size(); ++i)
        os << (i ? "," : "") << k[i];
      os << ")";
    }
    return SingularModeError(os.str(), modes);
  }
};

/// Right-hand side with nonzero mean: the periodic problem has no solution.
struct SolvabilityError : std::invalid_argument {
  explicit SolvabilityError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Material violates the coercivity (or symmetry) precondition.
struct CoercivityError : std::invalid_argument {
  explicit CoercivityError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Fixed-point/CG iteration exhausted max_iter; carries the residual trace.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(std::string what, std::vector<double> history)
      : std::runtime_error(std::move(what)),
        residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qchom

#endif
