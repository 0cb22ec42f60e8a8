#ifndef QCHOM_FFT_HPP
#define QCHOM_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "qchom/grid.hpp"

namespace qchom {

/// Complex-to-complex FFT on an N^m grid. Forward divides by the point
/// count so the k = 0 coefficient equals the field mean; inverse is the
/// plain unnormalized backward transform, making the pair an identity.
///
/// Plans are created with FFTW_ESTIMATE (deterministic, no measurement)
/// and FFTW_UNALIGNED so they can run on any buffer via the new-array
/// interface. Plan creation is serialized; execution is thread-safe on
/// distinct buffers.
class Fft {
 public:
  explicit Fft(const Grid& grid) : total_(grid.total()) {
    std::vector<int> dims(grid.dim(), grid.points_per_axis());
    std::vector<std::complex<double>> scratch(total_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft(grid.dim(), dims.data(), p, p, FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft(grid.dim(), dims.data(), p, p, FFTW_BACKWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  /// samples -> coefficients (scaled by 1/total).
  void forward(const std::complex<double>* in,
               std::complex<double>* out) const {
    run(fwd_, in, out);
    const double scale = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < total_; ++i) out[i] *= scale;
  }

  /// coefficients -> samples.
  void inverse(const std::complex<double>* in,
               std::complex<double>* out) const {
    run(bwd_, in, out);
  }

  void forward(std::vector<std::complex<double>>& buf) const {
    forward(buf.data(), buf.data());
  }
  void inverse(std::vector<std::complex<double>>& buf) const {
    inverse(buf.data(), buf.data());
  }

  /// Process-wide cache of plans keyed by (m, N).
  static std::shared_ptr<const Fft> shared(const Grid& grid) {
    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, std::weak_ptr<const Fft>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(grid.dim(), grid.points_per_axis());
    if (auto sp = cache[key].lock()) return sp;
    auto sp = std::make_shared<const Fft>(grid);
    cache[key] = sp;
    return sp;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  static void run(fftw_plan plan, const std::complex<double>* in,
                  std::complex<double>* out) {
    // FFTW does not write through `in` for out-of-place new-array execute;
    // the const_cast is part of its C interface.
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(
                         const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  std::size_t total_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

}  // namespace qchom

#endif
