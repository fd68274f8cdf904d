#pragma once

#include "gaussbound/certifier.hpp"
#include "gaussbound/circuit.hpp"
#include "gaussbound/rng.hpp"

#include <array>
#include <atomic>
#include <optional>

namespace gaussbound {

// Set by the CLI's signal handler; a running walk checks it between
// candidates and returns its best-so-far result with `interrupted` set.
std::atomic<bool>& search_interrupt_flag();

struct SearchExhaustedError : std::runtime_error {
  long draws_used;
  explicit SearchExhaustedError(long draws)
      : std::runtime_error("search: no bound-entangled seed found within " +
                           std::to_string(draws) + " hypercube draws"),
        draws_used(draws) {}
};

// The 16 parameters of the four-mode bipartite normal form.
struct NormalFormParams {
  std::array<double, 16> lambda{};
};

// Assembles the 8x8 normal-form matrix: diagonal blocks lambda_1..4 * I2,
// off-diagonal correlations lambda_5..16. May be unphysical; callers check.
CovarianceMatrix normal_form_matrix(const NormalFormParams& params);

// One uniform draw from the hypercube [-1/2, 1/2]^16.
NormalFormParams sample_hypercube(Rng& rng);

struct WalkConfig {
  double step = 0.01;             // axis displacement delta-lambda
  double rotation_angle = 0.01;   // radians, for the 120 coordinate planes
  int max_steps = 200;
  std::uint64_t seed = 1;
  double objective_floor = std::numeric_limits<double>::infinity();
  double certifier_tol = 1e-4;    // bisection tolerance used inside the walk
  SdpOptions sdp;
  long draw_budget = 1000000;     // hypercube draws before search-exhausted
  double seed_lift_margin = 0.05; // physicality lift applied to raw draws
  long solve_budget = std::numeric_limits<long>::max();
  double circuit_angle_step_deg = 1.0;  // phases/orientations in circuit walks
};

// The 32 axis displacements (+-step per coordinate) followed by the 240
// plane rotations (+-angle in each of the 16*15/2 coordinate planes).
std::vector<NormalFormParams> walk_moves(const NormalFormParams& params,
                                         const WalkConfig& config);

struct TrajectoryPoint {
  int step;        // 0 is the seed state
  double e;
  double p;
  int move_index;  // index into the unshuffled move list; -1 for the seed
};

struct SearchResult {
  std::optional<NormalFormParams> best_params;  // normal-form space
  std::optional<CircuitSpec> best_circuit;      // circuit space
  CovarianceMatrix best_cov{1, Mat::Identity(2, 2)};
  ModePartition partition;
  double best_e = 0.0;
  double best_p = 0.0;
  double best_physicality = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t rng_seed = 0;
  int steps_taken = 0;
  long draws_used = 0;
  long feasibility_solves = 0;
  bool hit_solve_budget = false;
  bool interrupted = false;
};

// Dual-objective hill climb in normal-form space: resample the
// hypercube until a (lifted) draw certifies E > 0 and P > 0, then repeatedly
// accept the first shuffled move that strictly improves both E and P while
// staying physical. Stops at max_steps, objective_floor on min{E, P}, or a
// local optimum.
SearchResult random_walk_normal_form(const WalkConfig& config);

struct CircuitParamMask {
  bool ratios = false;
  bool phases = false;
  bool variances = false;
  bool orientations = false;

  bool empty() const { return !ratios && !phases && !variances && !orientations; }
};

// Same acceptance rule, but candidates live in circuit-parameter space and
// every candidate is simulated, so physicality is automatic. An empty mask
// evaluates the base circuit only.
SearchResult random_walk_circuit(const CircuitSpec& base,
                                 const ModePartition& partition,
                                 const CircuitParamMask& mask,
                                 const WalkConfig& config,
                                 bool require_filter_pass = false);

struct FilterResult {
  bool pass = true;
  std::vector<std::string> reasons;
};

// Experimental-feasibility filter: every source must keep v_min at or above
// the squeezing floor, and at most one source may be hot squeezed.
FilterResult feasibility_filter(const CircuitSpec& spec,
                                double squeezing_floor = 0.5);

}  // namespace gaussbound
