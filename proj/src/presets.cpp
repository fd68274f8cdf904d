#include "gaussbound/presets.hpp"

namespace gaussbound {

namespace {
// Alice holds modes 1 and 4, Bob modes 2 and 3 (1-based).
const ModePartition kPresetPartition{{0, 3}, {1, 2}};
}

CircuitSpec paper_circuit_preset() {
  return paper_circuit({0.5, 0.5, 0.5, 0.5}, kPresetPartition);
}

CircuitSpec bound_state_preset() {
  // Splitting ratios found by the dual-objective circuit walk, with the hot
  // source's squeezing axis rotated to 29.2 degrees and a 95% detection
  // efficiency on every mode. Passes the experimental-feasibility filter
  // (one hot source, minimum variance 0.54).
  CircuitSpec spec =
      paper_circuit({0.498, 0.659, 0.869, 0.144}, kPresetPartition);
  spec.sources[0].orientation_deg = 29.2;
  for (int mode = 0; mode < 4; ++mode) spec.losses.push_back({mode, 0.95});
  return spec;
}

PresetReference bound_state_reference() {
  // Certified at bisection tolerance 1e-8 (feasibility tolerance 1e-9).
  return {0.028085177578, 0.0282374106911, 0.0};
}

}  // namespace gaussbound
