#include "gaussbound/circuit.hpp"
#include "gaussbound/certifier.hpp"
#include "gaussbound/presets.hpp"
#include "gaussbound/search.hpp"
#include "support/random_states.hpp"

#include <doctest.h>

using namespace gaussbound;
namespace gt = gaussbound::testing;

TEST_CASE("source covariance") {
  CHECK(source_covariance({SourceKind::Vacuum, 1, 1, 0}) ==
        Mat::Identity(2, 2));

  const Mat opa2 =
      source_covariance({SourceKind::SqueezedThermal, 0.54, 5.16, 0.0});
  CHECK(opa2(0, 0) == doctest::Approx(0.54));
  CHECK(opa2(1, 1) == doctest::Approx(5.16));
  CHECK(opa2(0, 1) == doctest::Approx(0.0));

  const SourceSpec opa1{SourceKind::SqueezedThermal, 2.0, 3.46, 0.0};
  const Mat hot = source_covariance(opa1);
  CHECK(hot(0, 0) == doctest::Approx(2.0));
  CHECK(hot(1, 1) == doctest::Approx(3.46));
  CHECK(opa1.is_hot());
  CHECK_FALSE(SourceSpec{SourceKind::SqueezedThermal, 0.54, 5.16, 0}.is_hot());
  CHECK_FALSE(SourceSpec{SourceKind::Vacuum, 1, 1, 0}.is_hot());

  // Rotated source keeps its eigenvalues.
  const Mat rot =
      source_covariance({SourceKind::SqueezedThermal, 0.7, 2.0, 30.0});
  Eigen::SelfAdjointEigenSolver<Mat> es(rot, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.7));
  CHECK(es.eigenvalues()(1) == doctest::Approx(2.0));

  CHECK_THROWS_AS(
      source_covariance({SourceKind::SqueezedThermal, 0.3, 2.0, 0.0}),
      UnphysicalSourceError);
}

TEST_CASE("phase rotation") {
  Rng rng(3);
  const GaussianState st = gt::random_physical_state(rng, 2);
  CHECK((apply_phase_rotation(st, 0, 0.0).cov.matrix() - st.cov.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((apply_phase_rotation(st, 1, 360.0).cov.matrix() - st.cov.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  GaussianState vac{CovarianceMatrix(1, Mat::Identity(2, 2))};
  CHECK((apply_phase_rotation(vac, 0, 123.4).cov.matrix() -
         Mat::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  CHECK_THROWS_AS(apply_phase_rotation(st, 5, 10.0), std::invalid_argument);
}

TEST_CASE("phase gate") {
  Rng rng(7);
  const GaussianState st = gt::random_physical_state(rng, 2);

  // Fully transmissive: only the phase rotation on the second mode acts.
  const GaussianState through =
      apply_phase_gate(st, GateSpec::beamsplitter(0, 1, 1.0, 33.0));
  const GaussianState rotated = apply_phase_rotation(st, 1, 33.0);
  CHECK((through.cov.matrix() - rotated.cov.matrix()).cwiseAbs().maxCoeff() <
        1e-13);

  // 50/50 on two vacua stays vacuum.
  GaussianState vac2{CovarianceMatrix(2, Mat::Identity(4, 4))};
  const GaussianState mixed =
      apply_phase_gate(vac2, GateSpec::beamsplitter(0, 1, 0.5, 90.0));
  CHECK((mixed.cov.matrix() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-13);

  // 50/50 at 90 degrees on two equally oriented pure squeezers: the gate
  // phase rotates the second into orthogonality and the output is a two-mode
  // squeezed state; compare P against the closed form e^{-2r} - 1.
  const double v = 0.5;
  Mat g = Mat::Zero(4, 4);
  g(0, 0) = v;
  g(1, 1) = 1.0 / v;
  g(2, 2) = v;
  g(3, 3) = 1.0 / v;
  const GaussianState pair =
      apply_phase_gate(GaussianState{CovarianceMatrix(2, g)},
                       GateSpec::beamsplitter(0, 1, 0.5, 90.0));
  const double p = ppt_measure(pair, ModePartition{{0}, {1}});
  CHECK(p == doctest::Approx(v - 1.0).epsilon(1e-9));
  CHECK(p < 0.0);

  CHECK_THROWS_AS(apply_phase_gate(st, GateSpec::beamsplitter(1, 1, 0.5, 0)),
                  std::invalid_argument);
}

TEST_CASE("loss channel") {
  Rng rng(13);
  const GaussianState st = gt::random_physical_state(rng, 2);
  CHECK((apply_loss(st, {0, 1.0}).cov.matrix() - st.cov.matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  GaussianState vac{CovarianceMatrix(1, Mat::Identity(2, 2))};
  CHECK((apply_loss(vac, {0, 1e-9}).cov.matrix() - Mat::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // The pinned example: eta = 0.9 on diag(0.5, 2.0), exactly.
  Mat sq(2, 2);
  sq << 0.5, 0.0, 0.0, 2.0;
  const Mat lossy =
      apply_loss(GaussianState{CovarianceMatrix(1, sq)}, {0, 0.9})
          .cov.matrix();
  CHECK(lossy(0, 0) == 0.55);
  CHECK(lossy(1, 1) == 1.9);
  CHECK(lossy(0, 1) == 0.0);

  CHECK_THROWS_AS(apply_loss(st, {0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_loss(st, {0, 1.5}), std::invalid_argument);
}

TEST_CASE("loss semigroup property") {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianState st = gt::random_physical_state(rng, 2);
    const double e1 = rng.uniform(0.3, 1.0);
    const double e2 = rng.uniform(0.3, 1.0);
    const GaussianState two_step =
        apply_loss(apply_loss(st, {0, e1}), {0, e2});
    const GaussianState one_step = apply_loss(st, {0, e1 * e2});
    CHECK((two_step.cov.matrix() - one_step.cov.matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("loss drives trace toward the vacuum trace") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianState st = gt::random_physical_state(rng, 2, 0.8, 3.0);
    REQUIRE(st.cov.matrix().trace() >= 4.0);  // vacuum trace for two modes
    GaussianState lossy = st;
    for (int m = 0; m < 2; ++m) lossy = apply_loss(lossy, {m, 0.8});
    CHECK(lossy.cov.matrix().trace() <= st.cov.matrix().trace() + 1e-12);
    CHECK(lossy.cov.matrix().trace() >= 4.0 - 1e-12);
  }
}

TEST_CASE("simulate circuit basics") {
  CircuitSpec all_vac;
  all_vac.sources = {{SourceKind::Vacuum, 1, 1, 0},
                     {SourceKind::Vacuum, 1, 1, 0},
                     {SourceKind::Vacuum, 1, 1, 0}};
  all_vac.gates = {GateSpec::beamsplitter(0, 1, 0.3, 17.0),
                   GateSpec::beamsplitter(1, 2, 0.77, 203.0),
                   GateSpec::rotation(0, 45.0)};
  const GaussianState out = simulate_circuit(all_vac);
  CHECK((out.cov.matrix() - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() <
        1e-13);

  CircuitSpec single;
  single.sources = {{SourceKind::SqueezedThermal, 0.6, 2.0, 10.0},
                    {SourceKind::Vacuum, 1, 1, 0}};
  const GaussianState embedded = simulate_circuit(single);
  CHECK((embedded.cov.matrix().topLeftCorner(2, 2) -
         source_covariance(single.sources[0]))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((embedded.cov.matrix().bottomRightCorner(2, 2) - Mat::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  CircuitSpec bad;
  bad.sources = {{SourceKind::Vacuum, 1, 1, 0}};
  bad.gates = {GateSpec::beamsplitter(0, 3, 0.5, 0)};
  CHECK_THROWS_AS(simulate_circuit(bad), std::invalid_argument);
}

TEST_CASE("passive gates preserve symplectic eigenvalues") {
  Rng rng(29);
  for (int trial = 0; trial < 15; ++trial) {
    CircuitSpec spec;
    for (int m = 0; m < 3; ++m) {
      const double vmin = rng.uniform(0.5, 1.5);
      const double vmax = std::max(vmin, 1.0 / vmin) + rng.uniform(0.0, 2.0);
      spec.sources.push_back(
          {SourceKind::SqueezedThermal, vmin, vmax, rng.uniform(0.0, 180.0)});
    }
    Mat direct = Mat::Zero(6, 6);
    for (int m = 0; m < 3; ++m) {
      direct.block<2, 2>(2 * m, 2 * m) = source_covariance(spec.sources[m]);
    }
    const auto before =
        symplectic_eigenvalues(GaussianState{CovarianceMatrix(3, direct)});
    for (int g = 0; g < 4; ++g) {
      const int a = static_cast<int>(rng.bounded(3));
      int b = static_cast<int>(rng.bounded(3));
      if (b == a) b = (b + 1) % 3;
      spec.gates.push_back(GateSpec::beamsplitter(
          a, b, rng.uniform01(), rng.uniform(0.0, 360.0)));
    }
    const auto after = symplectic_eigenvalues(simulate_circuit(spec));
    for (size_t k = 0; k < before.size(); ++k) {
      CHECK(before[k] == doctest::Approx(after[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("paper circuit") {
  const ModePartition part{{0, 3}, {1, 2}};
  const CircuitSpec dflt = paper_circuit({0.5, 0.5, 0.5, 0.5}, part);
  CHECK(dflt.sources.size() == 4);
  CHECK(dflt.sources[0].v_min == 2.0);
  CHECK(dflt.sources[0].v_max == 3.46);
  CHECK(dflt.sources[1].v_min == 0.54);
  CHECK(dflt.sources[1].v_max == 5.16);
  CHECK(dflt.sources[2].v_min == 0.63);
  CHECK(dflt.sources[2].v_max == 2.54);
  CHECK(dflt.sources[3].kind == SourceKind::Vacuum);
  REQUIRE(dflt.gates.size() == 4);
  CHECK(dflt.gates[0].phase_deg == 90.0);
  CHECK(dflt.gates[1].phase_deg == 41.0);
  CHECK(dflt.gates[2].phase_deg == 140.0);
  for (const GateSpec& g : dflt.gates) CHECK(g.transmissivity == 0.5);

  // Fully transmissive ratios: product state, block-diagonal and separable.
  const CircuitSpec product = paper_circuit({1, 1, 1, 1}, part);
  const GaussianState st = simulate_circuit(product);
  CHECK(st.cov.matrix().topRightCorner(4, 4).cwiseAbs().maxCoeff() < 1e-13);
  for (const ModePartition& p :
       {part, ModePartition{{0, 1}, {2, 3}}, ModePartition{{0, 2}, {1, 3}}}) {
    CHECK(entanglement_measure(st, p, 1e-6).value <= 1e-6);
  }

  CHECK_THROWS_AS(paper_circuit({1.2, 0.5, 0.5, 0.5}, part),
                  std::invalid_argument);
}

TEST_CASE("circuit outputs are physical") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<double, 4> ratios;
    for (double& r : ratios) r = rng.uniform01();
    CircuitSpec spec = paper_circuit(ratios, ModePartition{{0, 1}, {2, 3}});
    for (int m = 0; m < 4; ++m) {
      spec.losses.push_back({m, rng.uniform(0.9, 1.0)});
    }
    const GaussianState out = simulate_circuit(spec);
    CHECK(physicality_margin(out) >= -1e-9);
  }
}

TEST_CASE("preset circuit passes the feasibility filter") {
  const CircuitSpec preset = bound_state_preset();
  const FilterResult filter = feasibility_filter(preset);
  CHECK(filter.pass);
  CHECK(filter.reasons.empty());
}
