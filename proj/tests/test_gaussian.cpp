#include "gaussbound/gaussian.hpp"
#include "gaussbound/rng.hpp"
#include "support/complex_eig.hpp"
#include "support/random_states.hpp"

#include <doctest.h>

using namespace gaussbound;
namespace gt = gaussbound::testing;

TEST_CASE("symplectic form blocks") {
  const Mat s1 = symplectic_form(1);
  CHECK(s1(0, 1) == 1.0);
  CHECK(s1(1, 0) == -1.0);
  CHECK(s1(0, 0) == 0.0);
  CHECK(s1(1, 1) == 0.0);

  const Mat s2 = symplectic_form(2);
  CHECK(s2.topLeftCorner(2, 2) == s1);
  CHECK(s2.bottomRightCorner(2, 2) == s1);
  CHECK(s2.topRightCorner(2, 2).isZero(0.0));

  const Mat s4 = symplectic_form(4);
  CHECK((s4 * s4 + Mat::Identity(8, 8)).isZero(0.0));
  CHECK((s4.transpose() + s4).isZero(0.0));

  CHECK_THROWS_AS(symplectic_form(0), std::invalid_argument);
}

TEST_CASE("covariance matrix symmetrizes and validates") {
  Mat g(2, 2);
  g << 1.0, 0.5, 0.3, 2.0;
  CovarianceMatrix cov(1, g);
  CHECK(cov.matrix()(0, 1) == doctest::Approx(0.4));
  CHECK(cov.matrix()(1, 0) == cov.matrix()(0, 1));
  CHECK(cov.asymmetry() == doctest::Approx(0.2));
  CHECK(cov.asymmetry() > CovarianceMatrix::kAsymmetryWarnThreshold);

  CHECK_THROWS_AS(CovarianceMatrix(2, g), std::invalid_argument);
  CHECK_THROWS_AS(CovarianceMatrix(0, Mat::Identity(0, 0)),
                  std::invalid_argument);
}

TEST_CASE("partition parsing and validation") {
  ModePartition p = ModePartition::parse("1,2|3,4");
  CHECK(p.party_a == std::vector<int>{0, 1});
  CHECK(p.party_b == std::vector<int>{2, 3});
  p.validate(4);
  CHECK(p.to_string() == "1,2|3,4");

  CHECK_THROWS_AS(ModePartition::parse("1,2;3,4"), std::invalid_argument);
  CHECK_THROWS_AS((ModePartition{{0, 1}, {1, 2}}).validate(3),
                  std::invalid_argument);
  CHECK_THROWS_AS((ModePartition{{0}, {}}).validate(1), std::invalid_argument);
  CHECK_THROWS_AS((ModePartition{{0}, {2}}).validate(3),
                  std::invalid_argument);
}

TEST_CASE("hermitian_min_eig on closed-form cases") {
  // I + i sigma has eigenvalues {0, 2}.
  CHECK(hermitian_min_eig(Mat::Identity(4, 4), symplectic_form(2)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hermitian_min_eig(2.0 * Mat::Identity(4, 4), symplectic_form(2)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  Mat not_sym(2, 2);
  not_sym << 0, 1, 0, 0;
  CHECK_THROWS_AS(hermitian_min_eig(not_sym, Mat::Zero(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(hermitian_min_eig(Mat::Identity(2, 2), Mat::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("hermitian_min_eig matches the complex Jacobi oracle") {
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8;
    Mat s(n, n), a(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        s(r, c) = rng.uniform(-2.0, 2.0);
        a(r, c) = rng.uniform(-2.0, 2.0);
      }
    }
    s = (0.5 * (s + s.transpose())).eval();
    a = (0.5 * (a - a.transpose())).eval();

    gt::HermitianMatrix h(n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        h.at(r, c) = gt::Complex(s(r, c), a(r, c));
      }
    }
    const double expected = gt::hermitian_minimum_eigenvalue(h);
    CHECK(hermitian_min_eig(s, a) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("physicality margin reference states") {
  GaussianState vac1{CovarianceMatrix(1, Mat::Identity(2, 2))};
  CHECK(physicality_margin(vac1) == doctest::Approx(0.0).epsilon(1e-13));
  GaussianState vac3{CovarianceMatrix(3, Mat::Identity(6, 6))};
  CHECK(physicality_margin(vac3) == doctest::Approx(0.0).epsilon(1e-13));

  GaussianState thermal{CovarianceMatrix(1, 3.0 * Mat::Identity(2, 2))};
  CHECK(physicality_margin(thermal) == doctest::Approx(2.0));

  // diag(0.5, 2.0) is a pure squeezed state: margin 0, s1 = 1 exactly.
  Mat squeezed(2, 2);
  squeezed << 0.5, 0.0, 0.0, 2.0;
  GaussianState sq{CovarianceMatrix(1, squeezed)};
  CHECK(physicality_margin(sq) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(symplectic_eigenvalues(sq)[0] == doctest::Approx(1.0).epsilon(1e-12));

  // A mixed squeezed state sits strictly inside: diag(0.8, 2.0).
  Mat mixed(2, 2);
  mixed << 0.8, 0.0, 0.0, 2.0;
  CHECK(physicality_margin(GaussianState{CovarianceMatrix(1, mixed)}) > 0.0);
}

TEST_CASE("symplectic eigenvalues reference states") {
  GaussianState vac{CovarianceMatrix(3, Mat::Identity(6, 6))};
  for (double s : symplectic_eigenvalues(vac)) {
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  Mat pure(2, 2);
  pure << 0.25, 0.0, 0.0, 4.0;
  CHECK(symplectic_eigenvalues(GaussianState{CovarianceMatrix(1, pure)})[0] ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK(symplectic_eigenvalues(
            GaussianState{CovarianceMatrix(1, 3.0 * Mat::Identity(2, 2))})[0] ==
        doctest::Approx(3.0).epsilon(1e-12));

  Mat singular = Mat::Zero(2, 2);
  CHECK_THROWS_AS(
      symplectic_eigenvalues(GaussianState{CovarianceMatrix(1, singular)}),
      InvalidStateError);
}

TEST_CASE("partial transpose structure") {
  const ModePartition split{{0, 1}, {2, 3}};
  GaussianState vac{CovarianceMatrix(4, Mat::Identity(8, 8))};
  CHECK(partial_transpose(vac, split).cov.matrix() == Mat::Identity(8, 8));

  // The sign vector for {1,2}|{3,4} is (1,1,1,1,1,-1,1,-1): check via action
  // on a rank-one update.
  Mat marked = Mat::Identity(8, 8);
  for (int k = 0; k < 8; ++k) marked(0, k) = marked(k, 0) = (k == 0 ? 1 : 0.1);
  GaussianState st{CovarianceMatrix(4, marked)};
  const Mat flipped = partial_transpose(st, split).cov.matrix();
  const double expected_sign[8] = {1, 1, 1, 1, 1, -1, 1, -1};
  for (int k = 1; k < 8; ++k) {
    CHECK(flipped(0, k) == doctest::Approx(0.1 * expected_sign[k]));
  }

  // Two-mode squeezed state: [[cI, sZ], [sZ, cI]] -> [[cI, sI], [sI, cI]].
  const GaussianState tmsv = gt::two_mode_squeezed(0.5);
  const double s = 0.5 * (1.0 / 0.5 - 0.5);
  const Mat pt = partial_transpose(tmsv, ModePartition{{0}, {1}}).cov.matrix();
  CHECK(pt(0, 2) == doctest::Approx(s));
  CHECK(pt(1, 3) == doctest::Approx(s));
  CHECK(pt(1, 2) == 0.0);

  // Involution, bit-exact.
  const GaussianState twice =
      partial_transpose(partial_transpose(st, split), split);
  CHECK(twice.cov.matrix() == st.cov.matrix());

  CHECK_THROWS_AS(partial_transpose(vac, ModePartition{{0}, {1}}),
                  std::invalid_argument);
}

TEST_CASE("partial transpose preserves the spectrum") {
  Rng rng(17);
  const ModePartition split{{0, 2}, {1, 3}};
  for (int trial = 0; trial < 25; ++trial) {
    const GaussianState st = gt::random_physical_state(rng, 4);
    Eigen::SelfAdjointEigenSolver<Mat> before(st.cov.matrix(),
                                              Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Mat> after(
        partial_transpose(st, split).cov.matrix(), Eigen::EigenvaluesOnly);
    CHECK((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("permute modes") {
  Rng rng(23);
  const GaussianState st = gt::random_physical_state(rng, 3);

  const GaussianState same = permute_modes(st, {0, 1, 2});
  CHECK(same.cov.matrix() == st.cov.matrix());

  GaussianState vac{CovarianceMatrix(2, Mat::Identity(4, 4))};
  CHECK(permute_modes(vac, {1, 0}).cov.matrix() == Mat::Identity(4, 4));

  const GaussianState shuffled = permute_modes(st, {2, 0, 1});
  const GaussianState back = permute_modes(shuffled, {1, 2, 0});
  CHECK(back.cov.matrix() == st.cov.matrix());

  CHECK_THROWS_AS(permute_modes(st, {0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(permute_modes(st, {0, 1}), std::invalid_argument);
}

TEST_CASE("permutation invariance of symplectic eigenvalues") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianState st = gt::random_physical_state(rng, 4);
    const auto base = symplectic_eigenvalues(st);
    const auto perm = symplectic_eigenvalues(permute_modes(st, {3, 1, 0, 2}));
    for (size_t k = 0; k < base.size(); ++k) {
      CHECK(base[k] == doctest::Approx(perm[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("physicality margin sign matches symplectic spectrum") {
  // Module-level version of the equivalence; the acceptance suite runs the
  // full thousand-state sweep.
  Rng rng(97);
  for (int trial = 0; trial < 100; ++trial) {
    const GaussianState st = gt::random_state(rng, 3, 0.7, 2.2, 0.7);
    const double margin = physicality_margin(st);
    const double min_symp = symplectic_eigenvalues(st).front();
    if (std::abs(margin) < 1e-9) continue;
    CHECK((margin >= 0.0) == (min_symp >= 1.0 - 1e-9));
  }
}
