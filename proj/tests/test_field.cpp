#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "qchom/field.hpp"
#include "qchom/generators.hpp"
#include "qchom/material.hpp"
#include "qchom/operators.hpp"

using namespace qchom;

namespace {

// Enumerates the cut's grid-line crossings: times where y_1 or y_2 of the
// point (x, tau x) passes an integer; the letter is the crossing family.
struct Crossing {
  double t;
  char label;
};

std::vector<Crossing> crossing_events(int count) {
  std::vector<Crossing> ev;
  int i = 1, j = 1;
  while (static_cast<int>(ev.size()) < count) {
    double th = i / kGoldenRatio;
    double tv = j;
    if (th < tv) {
      ev.push_back({th, 'A'});
      ++i;
    } else {
      ev.push_back({tv, 'B'});
      ++j;
    }
  }
  return ev;
}

}  // namespace

TEST_CASE("transform round trip") {
  Grid grid(2, 16);
  PeriodicField f = random_real_field(grid, FieldRank::scalar, 1, 11);
  PeriodicField back = PeriodicField::from_samples(
      grid, FieldRank::scalar, {f.samples(0)});
  double err = 0.0;
  for (std::size_t i = 0; i < grid.total(); ++i)
    err = std::max(err,
                   std::abs(back.coefficients(0)[i] - f.coefficients(0)[i]));
  CHECK(err < 1e-12 * f.max_abs());
}

TEST_CASE("real fields have hermitian coefficients and real samples") {
  Grid grid(3, 8);
  PeriodicField f = random_real_field(grid, FieldRank::scalar, 1, 5);
  CHECK(f.max_imag() < 1e-13 * f.max_abs());
  for (std::size_t flat = 0; flat < grid.total(); ++flat) {
    auto k = grid.mode_multi_index(flat);
    std::vector<int> neg(k.size());
    for (std::size_t j = 0; j < k.size(); ++j)
      neg[j] = grid.index_of_mode(k[j] == -4 ? -4 : -k[j]);
    auto c = f.coefficients(0)[flat];
    auto cc = f.coefficients(0)[grid.flatten(neg)];
    if (std::none_of(k.begin(), k.end(), [](int v) { return v == -4; }))
      CHECK(std::abs(c - std::conj(cc)) < 1e-14);
  }
}

TEST_CASE("mean equals the zero coefficient") {
  Grid grid(2, 8);
  PeriodicField f = field_from_function(grid, [](const std::vector<double>& y) {
    return 3.25 + std::cos(2 * std::numbers::pi * y[0]);
  });
  CHECK(f.mean().real() == Catch::Approx(3.25).margin(1e-13));
}

TEST_CASE("trig evaluation reproduces grid samples of band-limited fields") {
  Grid grid(2, 8);
  PeriodicField f = random_real_field(grid, FieldRank::scalar, 1, 9);
  TrigEvaluator eval(f);
  for (std::size_t flat : {0ul, 3ul, 17ul, 63ul}) {
    auto y = grid.point(flat);
    CHECK(std::abs(eval(y) - f.samples(0)[flat]) < 1e-12);
  }
}

TEST_CASE("field dumps round trip bit for bit") {
  namespace fs = std::filesystem;
  Grid grid(2, 8);
  PeriodicField f = random_real_field(grid, FieldRank::vector, 2, 21);
  fs::path base = fs::temp_directory_path() / "qchom_dump_test";
  write_field_dump(f, base);
  PeriodicField g = read_field_dump(base);
  REQUIRE(g.components() == 2);
  CHECK(g.rank() == FieldRank::vector);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t p = 0; p < grid.total(); ++p)
      CHECK(g.samples(c)[p].real() == f.samples(c)[p].real());
  fs::remove(fs::path(base) += ".f64");
  fs::remove(fs::path(base) += ".json");
}

TEST_CASE("sampling the origin returns g(0)") {
  Grid grid(2, 8);
  PeriodicField g = random_real_field(grid, FieldRank::scalar, 1, 3);
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  Eigen::VectorXd x(1);
  x[0] = 0.0;
  auto v = sample_quasiperiodic(g, R, x, 0.25);
  CHECK(std::abs(v - g.samples(0)[0]) < 1e-12);
}

TEST_CASE("single-mode sampling matches the analytic exponential") {
  Grid grid(2, 8);
  PeriodicField::Plane c(grid.total());
  c[grid.flatten({grid.index_of_mode(2), grid.index_of_mode(-1)})] = 1.0;
  std::vector<PeriodicField::Plane> planes{std::move(c)};
  PeriodicField g = PeriodicField::from_coefficients(grid, FieldRank::scalar,
                                                     std::move(planes));
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  const double eta = 0.2;
  Eigen::VectorXd x(1);
  x[0] = 0.731;
  std::complex<double> got = sample_quasiperiodic(g, R, x, eta);
  const double xi = 2.0 - kGoldenRatio;  // R^T k
  std::complex<double> want =
      std::polar(1.0, 2 * std::numbers::pi * xi * x[0] / eta);
  CHECK(std::abs(got - want) < 1e-12);
}

TEST_CASE("checkerboard samples along the cut follow the cut sequence") {
  // Indicator of the phase-A region sampled halfway between consecutive
  // grid-line crossings; letters whose midpoint sits within the nearest-
  // neighbour rounding band of the region boundary are skipped.
  const int N = 512;
  Grid grid(2, N);
  PeriodicField g = field_from_function(grid, [](const std::vector<double>& y) {
    return y[1] < kGoldenRatio * y[0] ? 1.0 : 0.0;
  });
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  auto events = crossing_events(301);
  std::string expected = cut_sequence(kGoldenRatio, 300, 0.0);
  int checked = 0, matched = 0;
  Eigen::VectorXd x(1);
  for (int i = 0; i + 1 < static_cast<int>(events.size()); ++i) {
    const double tm = 0.5 * (events[i].t + events[i + 1].t);
    const double f1 = tm - std::floor(tm);
    const double f2 = kGoldenRatio * tm - std::floor(kGoldenRatio * tm);
    const double margin = std::abs(kGoldenRatio * f1 - f2);
    if (margin < 2.0 * (kGoldenRatio + 1.0) / N) continue;  // boundary band
    // skip wrap-around bands where nearest-node rounding crosses the cell
    if (std::min(f1, 1.0 - f1) < 2.0 / N) continue;
    if (std::min(f2, 1.0 - f2) < 2.0 / N) continue;
    x[0] = tm;
    const double v =
        sample_quasiperiodic(g, R, x, 1.0, SampleRule::nearest).real();
    const char label = v > 0.5 ? 'A' : 'B';
    ++checked;
    if (label == expected[static_cast<std::size_t>(i)]) ++matched;
  }
  CHECK(checked > 250);
  CHECK(matched == checked);
}
