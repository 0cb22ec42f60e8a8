#ifndef QCHOM_FIELD_HPP
#define QCHOM_FIELD_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchom/errors.hpp"
#include "qchom/fft.hpp"
#include "qchom/grid.hpp"
#include "qchom/projection.hpp"

namespace qchom {

enum class FieldRank { scalar, vector, tensor2, tensor4 };

inline std::string to_string(FieldRank r) {
  switch (r) {
    case FieldRank::scalar: return "scalar";
    case FieldRank::vector: return "vector";
    case FieldRank::tensor2: return "tensor2";
    case FieldRank::tensor4: return "tensor4";
  }
  return "?";
}

inline FieldRank field_rank_from_string(const std::string& s) {
  if (s == "scalar") return FieldRank::scalar;
  if (s == "vector") return FieldRank::vector;
  if (s == "tensor2") return FieldRank::tensor2;
  if (s == "tensor4") return FieldRank::tensor4;
  throw std::invalid_argument("unknown field rank: " + s);
}

/// Multi-index k in Z^m with its projected wavevector xi = R^T k.
struct ModeVector {
  std::vector<int> k;
  Eigen::VectorXd xi;

  static ModeVector make(const ProjectionMatrix& R, std::vector<int> k) {
    ModeVector mv;
    mv.xi = R.projected(k);
    mv.k = std::move(k);
    return mv;
  }
};

/// A scalar/vector/tensor field on the torus Y^m, kept simultaneously as
/// collocation samples and Fourier coefficients (both complex, one plane
/// per component). Instances are immutable after construction; operators
/// build new fields. Component c, flat point p is data[c][p] with the
/// grid's row-major layout in both domains.
class PeriodicField {
 public:
  using Plane = std::vector<std::complex<double>>;

  static PeriodicField from_samples(Grid grid, FieldRank rank,
                                    std::vector<Plane> samples) {
    PeriodicField f(std::move(grid), rank, samples.size());
    f.samples_ = std::move(samples);
    f.coeffs_.resize(f.components());
    auto fft = Fft::shared(f.grid());
    for (std::size_t c = 0; c < f.components(); ++c) {
      f.check_plane(f.samples_[c]);
      f.coeffs_[c].resize(f.grid().total());
      fft->forward(f.samples_[c].data(), f.coeffs_[c].data());
    }
    return f;
  }

  static PeriodicField from_coefficients(Grid grid, FieldRank rank,
                                         std::vector<Plane> coeffs) {
    PeriodicField f(std::move(grid), rank, coeffs.size());
    f.coeffs_ = std::move(coeffs);
    f.samples_.resize(f.components());
    auto fft = Fft::shared(f.grid());
    for (std::size_t c = 0; c < f.components(); ++c) {
      f.check_plane(f.coeffs_[c]);
      f.samples_[c].resize(f.grid().total());
      fft->inverse(f.coeffs_[c].data(), f.samples_[c].data());
    }
    return f;
  }

  /// Zero field with the given number of components.
  static PeriodicField zero(Grid grid, FieldRank rank, std::size_t comps) {
    std::vector<Plane> planes(comps, Plane(grid.total()));
    PeriodicField f(std::move(grid), rank, comps);
    f.samples_ = planes;
    f.coeffs_ = std::move(planes);
    return f;
  }

  const Grid& grid() const { return grid_; }
  FieldRank rank() const { return rank_; }
  std::size_t components() const { return components_; }

  const Plane& samples(std::size_t c = 0) const { return samples_[c]; }
  const Plane& coefficients(std::size_t c = 0) const { return coeffs_[c]; }

  /// Mean value = coefficient at k = 0.
  std::complex<double> mean(std::size_t c = 0) const { return coeffs_[c][0]; }

  double max_imag() const {
    double v = 0.0;
    for (const auto& plane : samples_)
      for (const auto& z : plane) v = std::max(v, std::abs(z.imag()));
    return v;
  }

  double max_abs() const {
    double v = 0.0;
    for (const auto& plane : samples_)
      for (const auto& z : plane) v = std::max(v, std::abs(z));
    return v;
  }

  std::vector<double> real_samples(std::size_t c = 0) const {
    std::vector<double> out(samples_[c].size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = samples_[c][i].real();
    return out;
  }

  /// Value at the nearest grid node of a point y in R^m (wrapped to Y^m).
  std::complex<double> nearest_value(const std::vector<double>& y,
                                     std::size_t c = 0) const {
    const int N = grid_.points_per_axis();
    std::vector<int> digits(grid_.dim());
    for (int j = 0; j < grid_.dim(); ++j) {
      double w = y[j] - std::floor(y[j]);
      int idx = static_cast<int>(std::lround(w * N)) % N;
      digits[j] = idx < 0 ? idx + N : idx;
    }
    return samples_[c][grid_.flatten(digits)];
  }

 private:
  PeriodicField(Grid grid, FieldRank rank, std::size_t comps)
      : grid_(std::move(grid)), rank_(rank), components_(comps) {
    if (components_ < 1)
      throw std::invalid_argument("PeriodicField: no components");
  }

  void check_plane(const Plane& p) const {
    if (p.size() != grid_.total())
      throw std::invalid_argument("PeriodicField: plane size mismatch");
  }

  Grid grid_;
  FieldRank rank_;
  std::size_t components_;
  std::vector<Plane> samples_;
  std::vector<Plane> coeffs_;
};

/// Evaluates one component of a field at arbitrary points by summing its
/// (sparse) Fourier series -- the trigonometric interpolant. Build once,
/// evaluate many times.
class TrigEvaluator {
 public:
  TrigEvaluator(const PeriodicField& field, std::size_t component = 0) {
    const auto& coeffs = field.coefficients(component);
    double cmax = 0.0;
    for (const auto& z : coeffs) cmax = std::max(cmax, std::abs(z));
    const double cutoff = cmax * 1e-15;
    const Grid& g = field.grid();
    for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
      if (std::abs(coeffs[flat]) <= cutoff) continue;
      modes_.push_back(g.mode_multi_index(flat));
      values_.push_back(coeffs[flat]);
    }
  }

  std::complex<double> operator()(const std::vector<double>& y) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < modes_.size(); ++t) {
      double phase = 0.0;
      for (std::size_t j = 0; j < modes_[t].size(); ++j)
        phase += modes_[t][j] * y[j];
      acc += values_[t] * std::polar(1.0, two_pi * phase);
    }
    return acc;
  }

  std::size_t active_modes() const { return modes_.size(); }

 private:
  std::vector<std::vector<int>> modes_;
  std::vector<std::complex<double>> values_;
};

enum class SampleRule { trig, nearest };

/// g evaluated at the cut point (R x / eta) mod 1: the quasiperiodic trace
/// of the periodic field g along the physical slice.
inline std::complex<double> sample_quasiperiodic(
    const PeriodicField& g, const ProjectionMatrix& R,
    const Eigen::VectorXd& x, double eta,
    SampleRule rule = SampleRule::trig, std::size_t component = 0) {
  if (!(eta > 0)) throw std::invalid_argument("sample_quasiperiodic: eta > 0");
  if (x.size() != R.cols())
    throw std::invalid_argument("sample_quasiperiodic: x has wrong dimension");
  std::vector<double> y(R.rows());
  for (int i = 0; i < R.rows(); ++i) {
    double v = 0.0;
    for (int j = 0; j < R.cols(); ++j) v += R.entries()(i, j) * x[j];
    v /= eta;
    y[i] = v - std::floor(v);
  }
  if (rule == SampleRule::nearest) return g.nearest_value(y, component);
  return TrigEvaluator(g, component)(y);
}

/// Band-limited real random field: independent Gaussian coefficients with
/// a 1/(1+|k|^2) falloff on modes |k_j| <= N/2 - 1 (Nyquist planes stay
/// empty), Hermitian-symmetrized so samples are real.
inline PeriodicField random_real_field(const Grid& grid, FieldRank rank,
                                       std::size_t comps, std::uint64_t seed,
                                       bool zero_mean = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int N = grid.points_per_axis();
  std::vector<PeriodicField::Plane> planes;
  std::vector<int> digits;
  for (std::size_t c = 0; c < comps; ++c) {
    PeriodicField::Plane plane(grid.total());
    for (std::size_t flat = 0; flat < grid.total(); ++flat) {
      auto k = grid.mode_multi_index(flat);
      bool nyquist = false;
      double k2 = 0.0;
      for (int v : k) {
        if (v == -N / 2) nyquist = true;
        k2 += double(v) * v;
      }
      if (nyquist) continue;
      double w = 1.0 / (1.0 + k2);
      plane[flat] = std::complex<double>(gauss(rng), gauss(rng)) * w;
    }
    // Hermitian symmetrization: c_{-k} := conj(c_k).
    PeriodicField::Plane sym(grid.total());
    for (std::size_t flat = 0; flat < grid.total(); ++flat) {
      auto k = grid.mode_multi_index(flat);
      std::vector<int> neg(k.size());
      for (std::size_t j = 0; j < k.size(); ++j)
        neg[j] = grid.index_of_mode(k[j] == -N / 2 ? -N / 2 : -k[j]);
      std::size_t nflat = grid.flatten(neg);
      sym[flat] = 0.5 * (plane[flat] + std::conj(plane[nflat]));
    }
    if (zero_mean) sym[0] = 0.0;
    planes.push_back(std::move(sym));
  }
  return PeriodicField::from_coefficients(grid, rank, std::move(planes));
}

/// Builds a scalar field by sampling fn at the grid nodes.
template <typename Fn>
PeriodicField field_from_function(const Grid& grid, Fn&& fn) {
  PeriodicField::Plane plane(grid.total());
  for (std::size_t flat = 0; flat < grid.total(); ++flat)
    plane[flat] = fn(grid.point(flat));
  std::vector<PeriodicField::Plane> planes{std::move(plane)};
  return PeriodicField::from_samples(grid, FieldRank::scalar,
                                     std::move(planes));
}

// --- raw field dumps ----------------------------------------------------
//
// <name>.f64 holds the real samples as little-endian IEEE-754 float64,
// one component block after another, row-major with y_1 slowest inside a
// block. <name>.json is the sidecar:
// {"m", "N", "rank", "components", "layout": "row-major", "dtype": "f64le"}

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

inline void write_field_dump(const PeriodicField& f,
                             const std::filesystem::path& base) {
  std::filesystem::path data = base;
  data += ".f64";
  std::filesystem::path side = base;
  side += ".json";

  std::ofstream os(data, std::ios::binary);
  if (!os) throw IoError("cannot open " + data.string() + " for writing");
  for (std::size_t c = 0; c < f.components(); ++c) {
    auto plane = f.real_samples(c);
    os.write(reinterpret_cast<const char*>(plane.data()),
             static_cast<std::streamsize>(plane.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + data.string());

  nlohmann::ordered_json j;
  j["m"] = f.grid().dim();
  j["N"] = f.grid().points_per_axis();
  j["rank"] = to_string(f.rank());
  j["components"] = f.components();
  j["layout"] = "row-major";
  j["dtype"] = "f64le";
  std::ofstream js(side);
  if (!js) throw IoError("cannot open " + side.string() + " for writing");
  js << j.dump(2) << "\n";
}

inline PeriodicField read_field_dump(const std::filesystem::path& base) {
  std::filesystem::path data = base;
  data += ".f64";
  std::filesystem::path side = base;
  side += ".json";

  std::ifstream js(side);
  if (!js) throw IoError("cannot open sidecar " + side.string());
  nlohmann::json j;
  js >> j;
  if (j.value("dtype", "") != "f64le" || j.value("layout", "") != "row-major")
    throw IoError("unsupported dump encoding in " + side.string());
  Grid grid(j.at("m").get<int>(), j.at("N").get<int>());
  FieldRank rank = field_rank_from_string(j.at("rank").get<std::string>());
  std::size_t comps = j.at("components").get<std::size_t>();

  std::ifstream is(data, std::ios::binary);
  if (!is) throw IoError("cannot open " + data.string());
  std::vector<PeriodicField::Plane> planes(comps);
  std::vector<double> buf(grid.total());
  for (std::size_t c = 0; c < comps; ++c) {
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!is) throw IoError("dump truncated: " + data.string());
    planes[c].resize(grid.total());
    for (std::size_t i = 0; i < buf.size(); ++i) planes[c][i] = buf[i];
  }
  return PeriodicField::from_samples(grid, rank, std::move(planes));
}

}  // namespace qchom

#endif
