#pragma once

#include "gaussbound/gaussian.hpp"

// Test-only generic convex solver for the separability program, built on the
// ellipsoid method with the complex Jacobi eigensolver underneath. Shares no
// code with the library's barrier solver; used to cross-check feasibility
// verdicts and entanglement values.
namespace gaussbound::testing {

struct OracleFeasibility {
  bool feasible = false;
  double best_margin = 0.0;  // best min-eigenvalue over the three blocks
};

// Maximize min{lambda_min of the three separability blocks} over
// (gamma_A, gamma_B) by the ellipsoid method; feasible iff the maximum
// exceeds -tol.
OracleFeasibility oracle_separability_feasible(const Mat& gamma,
                                               const ModePartition& partition,
                                               double x, double tol = 1e-7,
                                               int iterations = 4000);

// 1 - max x via bisection over the oracle feasibility.
double oracle_entanglement(const Mat& gamma, const ModePartition& partition,
                           double x_tol = 2e-5);

}  // namespace gaussbound::testing
