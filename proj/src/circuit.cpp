#include "gaussbound/circuit.hpp"

#include <cmath>

namespace gaussbound {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

Eigen::Matrix2d rotation2(double angle_deg) {
  const double a = angle_deg * kDegToRad;
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

double normalize_deg(double phase) {
  double p = std::fmod(phase, 360.0);
  if (p < 0.0) p += 360.0;
  return p;
}

}  // namespace

GateSpec GateSpec::rotation(int mode, double phase_deg) {
  GateSpec g;
  g.type = Type::Rotation;
  g.mode_a = mode;
  g.mode_b = -1;
  g.transmissivity = 1.0;
  g.phase_deg = normalize_deg(phase_deg);
  return g;
}

GateSpec GateSpec::beamsplitter(int mode_a, int mode_b, double transmissivity,
                                double phase_deg) {
  GateSpec g;
  g.type = Type::BeamSplitter;
  g.mode_a = mode_a;
  g.mode_b = mode_b;
  g.transmissivity = transmissivity;
  g.phase_deg = normalize_deg(phase_deg);
  return g;
}

void CircuitSpec::validate() const {
  const int n = n_modes();
  if (n < 1) throw std::invalid_argument("circuit: needs at least one source");
  for (const GateSpec& g : gates) {
    if (g.mode_a < 0 || g.mode_a >= n) {
      throw std::invalid_argument("circuit: gate references invalid mode");
    }
    if (g.type == GateSpec::Type::BeamSplitter) {
      if (g.mode_b < 0 || g.mode_b >= n) {
        throw std::invalid_argument("circuit: gate references invalid mode");
      }
      if (g.mode_a == g.mode_b) {
        throw std::invalid_argument(
            "circuit: beamsplitter modes must be distinct");
      }
      if (g.transmissivity < 0.0 || g.transmissivity > 1.0) {
        throw std::invalid_argument(
            "circuit: transmissivity must be in [0, 1]");
      }
    }
  }
  for (const LossSpec& l : losses) {
    if (l.mode < 0 || l.mode >= n) {
      throw std::invalid_argument("circuit: loss references invalid mode");
    }
    if (l.efficiency <= 0.0 || l.efficiency > 1.0) {
      throw std::invalid_argument("circuit: efficiency must be in (0, 1]");
    }
  }
  if (partition) partition->validate(n);
}

Mat source_covariance(const SourceSpec& spec) {
  if (spec.kind == SourceKind::Vacuum) return Mat::Identity(2, 2);
  if (spec.v_min < 0.0 || spec.v_max < spec.v_min) {
    throw std::invalid_argument("source: requires 0 <= v_min <= v_max");
  }
  if (spec.v_min * spec.v_max < 1.0 - 1e-9) {
    throw UnphysicalSourceError(
        "source: v_min*v_max = " + std::to_string(spec.v_min * spec.v_max) +
        " violates the uncertainty bound");
  }
  const Eigen::Matrix2d r = rotation2(spec.orientation_deg);
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = spec.v_min;
  d(1, 1) = spec.v_max;
  return r * d * r.transpose();
}

GaussianState apply_phase_rotation(const GaussianState& state, int mode,
                                   double angle_deg) {
  const int n = state.n_modes();
  if (mode < 0 || mode >= n) {
    throw std::invalid_argument("apply_phase_rotation: invalid mode");
  }
  Mat s = Mat::Identity(2 * n, 2 * n);
  s.block<2, 2>(2 * mode, 2 * mode) = rotation2(angle_deg);
  return GaussianState(
      CovarianceMatrix(n, s * state.cov.matrix() * s.transpose()),
      s * state.mean);
}

GaussianState apply_phase_gate(const GaussianState& state,
                               const GateSpec& gate) {
  if (gate.type == GateSpec::Type::Rotation) {
    return apply_phase_rotation(state, gate.mode_a, gate.phase_deg);
  }
  const int n = state.n_modes();
  if (gate.mode_a < 0 || gate.mode_a >= n || gate.mode_b < 0 ||
      gate.mode_b >= n || gate.mode_a == gate.mode_b) {
    throw std::invalid_argument("apply_phase_gate: invalid mode pair");
  }
  if (gate.transmissivity < 0.0 || gate.transmissivity > 1.0) {
    throw std::invalid_argument("apply_phase_gate: transmissivity not in [0, 1]");
  }
  const GaussianState rotated =
      apply_phase_rotation(state, gate.mode_b, gate.phase_deg);
  const double tau = std::sqrt(gate.transmissivity);
  const double rho = std::sqrt(1.0 - gate.transmissivity);
  Mat s = Mat::Identity(2 * n, 2 * n);
  const int i = 2 * gate.mode_a;
  const int j = 2 * gate.mode_b;
  s.block<2, 2>(i, i) = tau * Eigen::Matrix2d::Identity();
  s.block<2, 2>(i, j) = rho * Eigen::Matrix2d::Identity();
  s.block<2, 2>(j, i) = -rho * Eigen::Matrix2d::Identity();
  s.block<2, 2>(j, j) = tau * Eigen::Matrix2d::Identity();
  return GaussianState(
      CovarianceMatrix(n, s * rotated.cov.matrix() * s.transpose()),
      s * rotated.mean);
}

GaussianState apply_loss(const GaussianState& state, const LossSpec& loss) {
  const int n = state.n_modes();
  if (loss.mode < 0 || loss.mode >= n) {
    throw std::invalid_argument("apply_loss: invalid mode");
  }
  if (loss.efficiency <= 0.0 || loss.efficiency > 1.0) {
    throw std::invalid_argument("apply_loss: efficiency must be in (0, 1]");
  }
  const double eta = loss.efficiency;
  const double root = std::sqrt(eta);
  Mat g = state.cov.matrix();
  const int m = 2 * loss.mode;
  for (int k = 0; k < 2 * n; k += 2) {
    if (k == m) continue;
    g.block<2, 2>(m, k) *= root;
    g.block<2, 2>(k, m) *= root;
  }
  // eta*g + (1-eta)*I on the diagonal block; this form reproduces the loss
  // channel exactly in floating point for simple inputs.
  g.block<2, 2>(m, m) =
      eta * g.block<2, 2>(m, m) + (1.0 - eta) * Eigen::Matrix2d::Identity();
  Vec mean = state.mean;
  mean.segment<2>(m) *= root;
  return GaussianState(CovarianceMatrix(n, g), mean);
}

GaussianState simulate_circuit(const CircuitSpec& spec) {
  spec.validate();
  const int n = spec.n_modes();
  Mat g = Mat::Zero(2 * n, 2 * n);
  for (int m = 0; m < n; ++m) {
    g.block<2, 2>(2 * m, 2 * m) = source_covariance(spec.sources[m]);
  }
  GaussianState state{CovarianceMatrix(n, g)};
  for (const GateSpec& gate : spec.gates) {
    state = apply_phase_gate(state, gate);
  }
  for (const LossSpec& loss : spec.losses) {
    state = apply_loss(state, loss);
  }
  const double margin = physicality_margin(state);
  if (margin < -1e-9) {
    throw InvalidStateError(
        "simulate_circuit: output state unphysical (margin " +
        std::to_string(margin) + "); circuit construction is inconsistent");
  }
  return state;
}

CircuitSpec paper_circuit(const std::array<double, 4>& splitting_ratios,
                          const ModePartition& partition) {
  for (double r : splitting_ratios) {
    if (r < 0.0 || r > 1.0) {
      throw std::invalid_argument("paper_circuit: ratios must be in [0, 1]");
    }
  }
  CircuitSpec spec;
  spec.sources = {
      {SourceKind::SqueezedThermal, 2.0, 3.46, 0.0},  // hot squeezed
      {SourceKind::SqueezedThermal, 0.54, 5.16, 0.0},
      {SourceKind::SqueezedThermal, 0.63, 2.54, 0.0},
      {SourceKind::Vacuum, 1.0, 1.0, 0.0},
  };
  spec.gates = {
      GateSpec::beamsplitter(0, 3, splitting_ratios[0], 90.0),
      GateSpec::beamsplitter(2, 3, splitting_ratios[1], 41.0),
      GateSpec::beamsplitter(2, 3, splitting_ratios[2], 140.0),
      // Fourth splitter closing the network; the sources feed three named
      // phase-gates, so this one carries no gate phase of its own.
      GateSpec::beamsplitter(0, 1, splitting_ratios[3], 0.0),
  };
  spec.partition = partition;
  spec.partition->validate(4);
  return spec;
}

}  // namespace gaussbound
