#pragma once

#include "gaussbound/circuit.hpp"

namespace gaussbound {

// Default-ratio version of the shipped four-mode topology.
CircuitSpec paper_circuit_preset();

// Circuit whose simulated output certifies bound entangled: the topology
// above with the splitting ratios, gate phases and losses fixed by a
// dual-objective random walk over the circuit parameters. The certified
// reference values below were produced by that walk and are re-verified in
// the test suite.
CircuitSpec bound_state_preset();

struct PresetReference {
  double entanglement;
  double ppt_margin;
  double physicality;
};

PresetReference bound_state_reference();

}  // namespace gaussbound
