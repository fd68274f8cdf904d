#pragma once

#include "gaussbound/gaussian.hpp"

#include <array>
#include <optional>

namespace gaussbound {

struct UnphysicalSourceError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class SourceKind { Vacuum, SqueezedThermal };

// Single-mode Gaussian source described by its quadrature variance pair in
// vacuum units and the orientation of the minor axis. Physical iff
// v_min * v_max >= 1; pure iff equality; "hot squeezed" iff the smaller
// variance already sits at or above the vacuum level.
struct SourceSpec {
  SourceKind kind = SourceKind::Vacuum;
  double v_min = 1.0;
  double v_max = 1.0;
  double orientation_deg = 0.0;

  bool is_hot() const {
    return kind == SourceKind::SqueezedThermal && v_min >= 1.0 &&
           v_min != v_max;
  }
};

struct GateSpec {
  enum class Type { Rotation, BeamSplitter };
  Type type = Type::BeamSplitter;
  int mode_a = 0;
  int mode_b = 1;              // ignored for rotations
  double transmissivity = 0.5; // power splitting ratio, ignored for rotations
  double phase_deg = 0.0;      // applied to mode_b before the splitter

  static GateSpec rotation(int mode, double phase_deg);
  static GateSpec beamsplitter(int mode_a, int mode_b, double transmissivity,
                               double phase_deg);
};

struct LossSpec {
  int mode = 0;
  double efficiency = 1.0;  // in (0, 1]
};

// Ordered description of an optical circuit: one source per mode, gates
// applied strictly in order, losses applied last.
struct CircuitSpec {
  std::vector<SourceSpec> sources;
  std::vector<GateSpec> gates;
  std::vector<LossSpec> losses;
  std::optional<ModePartition> partition;  // bundled for presets

  int n_modes() const { return static_cast<int>(sources.size()); }
  void validate() const;
};

// rotation(orientation) * diag(v_min, v_max) * rotation(orientation)^T.
Mat source_covariance(const SourceSpec& spec);

GaussianState apply_phase_rotation(const GaussianState& state, int mode,
                                   double angle_deg);

GaussianState apply_phase_gate(const GaussianState& state,
                               const GateSpec& gate);

// On the mode's 2x2 block: gamma -> eta gamma + (1 - eta) I; cross
// correlations scale by sqrt(eta).
GaussianState apply_loss(const GaussianState& state, const LossSpec& loss);

// Direct sum of source covariances, gates in order, losses last. Output is
// checked physical to 1e-9 (passive/CP maps preserve physicality).
GaussianState simulate_circuit(const CircuitSpec& spec);

// The shipped four-mode topology: three squeezed-thermal sources with the
// variance pairs (2.0, 3.46), (0.54, 5.16), (0.63, 2.54), one vacuum mode,
// phase-gates at 90, 41 and 140 degrees plus a fourth plain splitter. The
// splitting ratios are free parameters; 0.5 everywhere is the default.
CircuitSpec paper_circuit(const std::array<double, 4>& splitting_ratios,
                          const ModePartition& partition);

}  // namespace gaussbound
