#pragma once

#include "gaussbound/gaussian.hpp"

namespace gaussbound {

enum class Feasibility { Feasible, Infeasible, Indeterminate };

struct SdpOptions {
  double feas_tol = 1e-8;    // FEASIBLE iff max t >= -feas_tol
  int iteration_cap = 500;   // Newton iterations per feasibility solve
  double gap_tol = 2.5e-9;   // duality gap at which boundary verdicts are made
  double barrier_mu = 20.0;  // outer path-following multiplier
  double center_tol = 1e-9;  // Newton decrement^2 / 2 at which a point counts as centered
};

// Outcome of one separability feasibility subproblem at scale x. The solver
// maximizes t subject to
//   gamma - (gamma_A (+) gamma_B) >= t I
//   gamma_A + i x sigma_A        >= t I   (through the real embedding)
//   gamma_B + i x sigma_B        >= t I
// and declares FEASIBLE iff max t >= -feas_tol. On INFEASIBLE the achieved
// maximum margin (< -feas_tol) together with its certified upper bound is the
// best-effort infeasibility certificate.
struct FeasibilityResult {
  Feasibility verdict = Feasibility::Indeterminate;
  double max_margin = 0.0;    // best strictly feasible t found
  double margin_upper = 0.0;  // certified bound: true max t <= margin_upper
  Mat gamma_a;                // witnesses, party-A-modes-first local frames
  Mat gamma_b;
  int newton_iterations = 0;
};

FeasibilityResult separability_feasible(const CovarianceMatrix& target,
                                        const ModePartition& partition,
                                        double x,
                                        const SdpOptions& opts = {});

// P(gamma) = min eig(gamma^Gamma + i sigma). Strictly positive certifies
// that the state is not distillable.
double ppt_measure(const GaussianState& state, const ModePartition& partition);

enum class SolveStatus { Ok, Indeterminate };

struct EntanglementResult {
  double value = 0.0;    // 1 - x at the bracket midpoint
  double x_lo = 0.0;     // final bisection bracket on x
  double x_hi = 0.0;
  double bracket_width = 0.0;
  SolveStatus status = SolveStatus::Ok;
  bool gamma_not_psd = false;  // x = 0 already infeasible (lenient path only)
  Mat witness_a;               // separable decomposition at the last feasible x
  Mat witness_b;
  long feasibility_solves = 0;
  long newton_iterations = 0;
};

// E(gamma) = 1 - max x, located by bisection of separability_feasible over
// [0, lambda_max(gamma)]. E > 0 implies the state is entangled. The raw value
// is reported without flooring; only its sign carries meaning near zero.
EntanglementResult entanglement_measure(const GaussianState& state,
                                        const ModePartition& partition,
                                        double tol = 1e-6,
                                        const SdpOptions& opts = {},
                                        bool allow_unphysical = false);

struct CertificationReport {
  double entanglement = 0.0;
  double ppt_margin = 0.0;
  double physicality = 0.0;
  double e_bracket_width = 0.0;
  std::string classification;
  Mat witness_a;
  Mat witness_b;
  SolveStatus status = SolveStatus::Ok;
  long bisection_steps = 0;
  long feasibility_solves = 0;
  long newton_iterations = 0;
};

// Bundles E, P and the physicality margin. Classification:
//   unphysical          physicality < -1e-9 (lenient path only; strict path throws)
//   bound-entangled     E > tol and P > 0
//   free-entangled      E > tol and P <= 0
//   separable           E < -tol
//   separable-boundary  |E| <= tol (no claim either side of the boundary)
CertificationReport certify(const GaussianState& state,
                            const ModePartition& partition,
                            double tol = 1e-6,
                            const SdpOptions& opts = {},
                            bool allow_unphysical = false);

}  // namespace gaussbound
