#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qchom/projection.hpp"

using namespace qchom;

namespace {

ProjectionMatrix half_rational() {
  // R^T = (1, 1/2): rationally dependent columns -> criterion violation.
  std::vector<std::vector<QuadExt>> q(2, std::vector<QuadExt>(1));
  q[0][0] = QuadExt(Rational(1));
  q[1][0] = QuadExt(Rational(1, 2));
  return ProjectionMatrix(std::move(q));
}

}  // namespace

TEST_CASE("fibonacci2 builtin") {
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  CHECK(R.rows() == 2);
  CHECK(R.cols() == 1);
  CHECK(R.exact());
  CHECK_FALSE(R.orthonormal());
  CHECK(R.entries()(0, 0) == 1.0);
  CHECK(R.entries()(1, 0) == Catch::Approx(kGoldenRatio).epsilon(1e-15));
}

TEST_CASE("penrose4 rows are orthonormal") {
  ProjectionMatrix R = ProjectionMatrix::penrose4();
  CHECK(R.rows() == 4);
  CHECK(R.cols() == 2);
  CHECK_FALSE(R.exact());
  Eigen::MatrixXd g = R.entries().transpose() * R.entries();
  CHECK((g - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(R.orthonormal());
}

TEST_CASE("criterion scan of the golden laminate") {
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  CriterionReport rep = check_criterion(R, 50);
  CHECK(rep.violations.empty());
  CHECK(rep.certified_exact);
  CHECK(rep.min_norm > 0.0);

  // oracle: exhaustive scan of |p + q tau| over the same box
  double expect = std::numeric_limits<double>::infinity();
  for (int p = -50; p <= 50; ++p)
    for (int q = -50; q <= 50; ++q) {
      if (p == 0 && q == 0) continue;
      expect = std::min(expect, std::abs(p + q * kGoldenRatio));
    }
  CHECK(rep.min_norm == Catch::Approx(expect).epsilon(1e-13));
}

TEST_CASE("criterion flags rational dependence") {
  CriterionReport rep = check_criterion(half_rational(), 2);
  REQUIRE_FALSE(rep.violations.empty());
  bool found = false;
  for (const auto& k : rep.violations)
    if (k == std::vector<int>{1, -2}) found = true;
  CHECK(found);
  CHECK(rep.min_norm < 1e-15);
}

TEST_CASE("penrose criterion scan stays clear of zero") {
  CriterionReport rep = check_criterion(ProjectionMatrix::penrose4(), 10);
  CHECK(rep.violations.empty());
  CHECK_FALSE(rep.certified_exact);
  CHECK(rep.min_norm > 1e-3);
}

TEST_CASE("exact and float criterion paths agree away from the threshold") {
  // Rebuild fibonacci2 as a float matrix; every scanned k with
  // |R^T k| > 1e-9 must get the same zero/nonzero status on both paths.
  ProjectionMatrix exact = ProjectionMatrix::fibonacci2();
  ProjectionMatrix approx(Eigen::MatrixXd(exact.entries()));
  CriterionReport re = check_criterion(exact, 40);
  CriterionReport rf = check_criterion(approx, 40);
  CHECK(re.violations.empty());
  CHECK(rf.violations.empty());
  CHECK(re.min_norm == Catch::Approx(rf.min_norm).epsilon(1e-12));

  CriterionReport ve = check_criterion(half_rational(), 4);
  ProjectionMatrix half_float(
      Eigen::MatrixXd(half_rational().entries()));
  CriterionReport vf = check_criterion(half_float, 4);
  CHECK(ve.violations == vf.violations);
}

TEST_CASE("rank-deficient matrices are a structural error") {
  Eigen::MatrixXd e(3, 2);
  e << 1.0, 2.0, 0.5, 1.0, 0.25, 0.5;  // second column = 2x first
  ProjectionMatrix bad(std::move(e));
  CHECK_THROWS_AS(check_criterion(bad, 3), RankDeficientError);
}

TEST_CASE("criterion rejects k_max < 1") {
  CHECK_THROWS_AS(check_criterion(ProjectionMatrix::fibonacci2(), 0),
                  std::invalid_argument);
}

TEST_CASE("json round trip preserves exact entries") {
  ProjectionMatrix R = ProjectionMatrix::fibonacci2();
  auto j = to_json(R);
  ProjectionMatrix back = projection_from_json(j);
  CHECK(back.exact());
  CHECK(back.rows() == 2);
  CHECK(back.quad_entries()[1][0] == QuadExt::golden());
  CHECK(back.entries()(1, 0) == R.entries()(1, 0));

  ProjectionMatrix P = ProjectionMatrix::penrose4();
  ProjectionMatrix pback = projection_from_json(to_json(P));
  CHECK_FALSE(pback.exact());
  CHECK((pback.entries() - P.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("golden_chain satisfies the criterion for n = 3") {
  ProjectionMatrix R = ProjectionMatrix::golden_chain(3);
  CHECK(R.rows() == 4);
  CHECK(R.cols() == 3);
  CHECK(R.exact());
  CriterionReport rep = check_criterion(R, 6);
  CHECK(rep.violations.empty());
}
