#ifndef QCHOM_GENERATORS_HPP
#define QCHOM_GENERATORS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace qchom {

/// First `length` letters of the Fibonacci word over {A, B}: the limit of
/// S_n = S_{n-1} S_{n-2} with S_0 = "A", S_1 = "AB". Any prefix of a later
/// iterate is a prefix of all following ones, so truncation is safe.
inline std::string fibonacci_word(std::size_t length) {
  if (length < 1) throw std::invalid_argument("fibonacci_word: length >= 1");
  if (length == 1) return "A";
  std::string prev = "A";   // S_0
  std::string cur = "AB";   // S_1
  while (cur.size() < length) {
    std::string next = cur + prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur.substr(0, length);
}

/// Label sequence of the intervals cut from the two-phase checkerboard by
/// a line of slope ratio = A/B. Interval i carries 'A' exactly when the
/// rotation orbit frac(i*alpha + offset), alpha = ratio/(1 + ratio), lands
/// in [1 - alpha, 1) -- the arithmetic form of the cut. offset = 0 is the
/// unique starting point that reproduces the Fibonacci word for
/// ratio = tau; other offsets give shifted sequences with the same letter
/// frequencies.
inline std::string cut_sequence(double ratio, std::size_t count,
                                double offset = 0.0) {
  if (!(ratio > 0)) throw std::invalid_argument("cut_sequence: ratio > 0");
  if (count < 1) throw std::invalid_argument("cut_sequence: count >= 1");
  const double alpha = ratio / (1.0 + ratio);
  std::string out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    double phase = std::fmod(static_cast<double>(i) * alpha + offset, 1.0);
    if (phase < 0) phase += 1.0;
    out.push_back(phase >= 1.0 - alpha ? 'A' : 'B');
  }
  return out;
}

}  // namespace qchom

#endif
