#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "qchom/material.hpp"

using namespace qchom;

TEST_CASE("mandel vectors preserve the frobenius inner product") {
  Eigen::MatrixXd a(3, 3), b(3, 3);
  a << 1, 2, 3, 2, 5, -1, 3, -1, 0.5;
  b << 0.2, 1, 0, 1, -2, 4, 0, 4, 1.5;
  Eigen::VectorXd va = mandel_of_sym(a);
  Eigen::VectorXd vb = mandel_of_sym(b);
  CHECK(va.dot(vb) == Catch::Approx((a.transpose() * b).trace()).epsilon(1e-13));
  CHECK((sym_of_mandel(va, 3) - a).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("isotropic stiffness eigenvalues") {
  const double lambda = 2.0, mu = 1.5;
  Eigen::MatrixXd c = isotropic_stiffness_mandel(3, lambda, mu);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  CHECK(es.eigenvalues().minCoeff() == Catch::Approx(2 * mu));
  CHECK(es.eigenvalues().maxCoeff() == Catch::Approx(3 * lambda + 2 * mu));
}

TEST_CASE("scalar bounds are the range of the samples") {
  Grid grid(2, 16);
  MaterialField m = cosine_laminate_material(
      grid, MaterialKind::scalar_conductivity, 1);
  CHECK(m.c_min == Catch::Approx(1.0).margin(1e-12));
  CHECK(m.c_max == Catch::Approx(3.0).margin(1e-12));
  CHECK_NOTHROW(m.require_coercive());
}

TEST_CASE("tensor material bounds use pointwise eigenvalues") {
  Grid grid(2, 4);
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  MaterialField m = constant_tensor_material(
      grid, MaterialKind::scalar_conductivity, a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(m.c_min == Catch::Approx(es.eigenvalues().minCoeff()));
  CHECK(m.c_max == Catch::Approx(es.eigenvalues().maxCoeff()));
}

TEST_CASE("asymmetric tensors are rejected") {
  Grid grid(2, 4);
  std::vector<PeriodicField::Plane> planes(4);
  planes[0].assign(grid.total(), 2.0);
  planes[1].assign(grid.total(), 0.5);
  planes[2].assign(grid.total(), -0.5);  // != planes[1]
  planes[3].assign(grid.total(), 1.0);
  PeriodicField f = PeriodicField::from_samples(grid, FieldRank::tensor2,
                                                std::move(planes));
  CHECK_THROWS_AS(make_material(MaterialKind::scalar_conductivity, f, 2),
                  std::invalid_argument);
}

TEST_CASE("non-coercive materials fail the precondition") {
  Grid grid(2, 8);
  MaterialField m = scalar_material_from_function(
      grid, MaterialKind::scalar_conductivity, 1,
      [](const std::vector<double>& y) {
        return std::cos(2 * std::numbers::pi * y[0]);  // dips below zero
      });
  CHECK_THROWS_AS(m.require_coercive(), CoercivityError);
}

TEST_CASE("fibonacci checkerboard area fraction") {
  Grid grid(2, 512);
  MaterialField m = fibonacci_checkerboard_material(
      grid, MaterialKind::scalar_conductivity, 1, 1.0, 10.0);
  double count_a = 0;
  for (const auto& z : m.values.samples(0))
    if (z.real() == 1.0) count_a += 1.0;
  const double frac = count_a / static_cast<double>(grid.total());
  CHECK(std::abs(frac - fibonacci_phase_fraction_a()) < 2e-3);
  CHECK(m.c_min == 1.0);
  CHECK(m.c_max == 10.0);
}

TEST_CASE("smooth two-phase stays within its phases") {
  Grid grid(4, 8);
  MaterialField m = smooth_two_phase_material(
      grid, MaterialKind::scalar_conductivity, 2, 1.0, 4.0);
  CHECK(m.c_min >= 1.0 - 1e-12);
  CHECK(m.c_max <= 4.0 + 1e-12);
  CHECK(m.c_max > 3.0);
}

TEST_CASE("isotropic elasticity field is coercive") {
  Grid grid(2, 8);
  MaterialField c = isotropic_elasticity_material(
      grid, 2,
      [](const std::vector<double>& y) {
        return 1.0 + 0.5 * std::cos(2 * std::numbers::pi * y[0]);
      },
      [](const std::vector<double>&) { return 1.0; });
  CHECK(c.op_dim() == 3);
  CHECK(c.c_min == Catch::Approx(2.0));  // 2 mu
  CHECK(c.c_max == Catch::Approx(2 * 1.5 + 2.0));  // 2 lambda_max + 2 mu
}

TEST_CASE("materials round trip through dumps") {
  namespace fs = std::filesystem;
  Grid grid(2, 8);
  MaterialField m = smooth_two_phase_material(
      grid, MaterialKind::scalar_conductivity, 1, 1.0, 3.0);
  fs::path base = fs::temp_directory_path() / "qchom_material_dump";
  write_field_dump(m.values, base);
  MaterialField back =
      material_from_dump(MaterialKind::scalar_conductivity, base, 1);
  CHECK(back.c_min == Catch::Approx(m.c_min).margin(1e-14));
  CHECK(back.c_max == Catch::Approx(m.c_max).margin(1e-14));
  fs::remove(fs::path(base) += ".f64");
  fs::remove(fs::path(base) += ".json");
}
