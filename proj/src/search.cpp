#include "gaussbound/search.hpp"

#include <atomic>
#include <cmath>

namespace gaussbound {

namespace {

std::atomic<bool> g_interrupted{false};

// Partition used for the abstract normal-form space: the form is written for
// the bipartition (modes 1,2 | modes 3,4).
ModePartition normal_form_partition() { return ModePartition{{0, 1}, {2, 3}}; }

struct Candidate {
  GaussianState state;
  int move_index;
};

// Shared acceptance test: physical AND P' > P AND E' > E. The E comparison
// first runs one feasibility solve at x = (1 - E) - 2 tol; only a strictly
// infeasible verdict (which proves the improvement) pays for the full
// bisection. Returns true and updates e/p/margin on acceptance.
bool try_accept(const GaussianState& cand, const ModePartition& partition,
                const WalkConfig& config, double& e, double& p, double& margin,
                long& solves) {
  const double cand_margin = physicality_margin(cand);
  if (cand_margin < -1e-9) return false;
  const double cand_p = ppt_measure(cand, partition);
  if (cand_p <= p) return false;
  const double x_test = (1.0 - e) - 2.0 * config.certifier_tol;
  if (x_test <= 0.0) return false;
  FeasibilityResult fr =
      separability_feasible(cand.cov, partition, x_test, config.sdp);
  ++solves;
  if (fr.verdict != Feasibility::Infeasible) return false;
  EntanglementResult er = entanglement_measure(cand, partition,
                                               config.certifier_tol,
                                               config.sdp);
  solves += er.feasibility_solves;
  if (er.status != SolveStatus::Ok) return false;
  if (er.value <= e) return false;  // cannot happen given the solve above
  e = er.value;
  p = cand_p;
  margin = cand_margin;
  return true;
}

std::vector<int> shuffled_indices(int count, Rng& rng) {
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = i;
  for (int i = count - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace

std::atomic<bool>& search_interrupt_flag() { return g_interrupted; }

CovarianceMatrix normal_form_matrix(const NormalFormParams& params) {
  const auto& l = params.lambda;
  Mat g = Mat::Zero(8, 8);
  for (int k = 0; k < 4; ++k) {
    g(2 * k, 2 * k) = l[k];
    g(2 * k + 1, 2 * k + 1) = l[k];
  }
  // Correlation block between parties (rows 1..4, columns 5..8 as printed).
  g(0, 4) = l[4];
  g(0, 6) = l[8];
  g(0, 7) = l[9];
  g(1, 5) = l[5];
  g(1, 6) = l[10];
  g(1, 7) = l[11];
  g(2, 4) = l[12];
  g(2, 5) = l[13];
  g(2, 6) = l[6];
  g(3, 4) = l[14];
  g(3, 5) = l[15];
  g(3, 7) = l[7];
  for (int r = 0; r < 4; ++r) {
    for (int c = 4; c < 8; ++c) g(c, r) = g(r, c);
  }
  return CovarianceMatrix(4, g);
}

NormalFormParams sample_hypercube(Rng& rng) {
  NormalFormParams p;
  for (double& v : p.lambda) v = rng.uniform(-0.5, 0.5);
  return p;
}

std::vector<NormalFormParams> walk_moves(const NormalFormParams& params,
                                         const WalkConfig& config) {
  std::vector<NormalFormParams> moves;
  moves.reserve(2 * 16 + 2 * (16 * 15 / 2));
  for (int i = 0; i < 16; ++i) {
    for (double sign : {1.0, -1.0}) {
      NormalFormParams m = params;
      m.lambda[i] += sign * config.step;
      moves.push_back(m);
    }
  }
  const double c = std::cos(config.rotation_angle);
  const double s = std::sin(config.rotation_angle);
  for (int i = 0; i < 16; ++i) {
    for (int j = i + 1; j < 16; ++j) {
      for (double sign : {1.0, -1.0}) {
        NormalFormParams m = params;
        m.lambda[i] = params.lambda[i] * c - sign * params.lambda[j] * s;
        m.lambda[j] = sign * params.lambda[i] * s + params.lambda[j] * c;
        moves.push_back(m);
      }
    }
  }
  return moves;
}

SearchResult random_walk_normal_form(const WalkConfig& config) {
  if (config.step <= 0.0 || config.max_steps < 0) {
    throw std::invalid_argument("random_walk_normal_form: invalid config");
  }
  Rng rng(config.seed);
  SearchResult result;
  result.rng_seed = config.seed;
  result.partition = normal_form_partition();
  const ModePartition partition = result.partition;

  // Seed: uniform hypercube draws, lifted along the diagonal coordinates to a
  // fixed physicality margin (the raw cube contains no physical matrices),
  // resampled until the lifted state certifies E > 0 and P > 0.
  NormalFormParams params;
  double e = 0.0, p = 0.0, margin = 0.0;
  bool seeded = false;
  while (!seeded) {
    if (result.draws_used >= config.draw_budget) {
      throw SearchExhaustedError(result.draws_used);
    }
    if (result.feasibility_solves > config.solve_budget) {
      throw SearchExhaustedError(result.draws_used);
    }
    params = sample_hypercube(rng);
    ++result.draws_used;
    GaussianState state{normal_form_matrix(params)};
    double m = physicality_margin(state);
    if (m < config.seed_lift_margin) {
      const double lift = config.seed_lift_margin - m;
      for (int i = 0; i < 4; ++i) params.lambda[i] += lift;
      state = GaussianState{normal_form_matrix(params)};
      m = physicality_margin(state);
    }
    if (m < -1e-9) continue;
    const double cand_p = ppt_measure(state, partition);
    if (cand_p <= 0.0) continue;
    FeasibilityResult at_one =
        separability_feasible(state.cov, partition, 1.0, config.sdp);
    ++result.feasibility_solves;
    if (at_one.verdict != Feasibility::Infeasible) continue;
    EntanglementResult er = entanglement_measure(
        state, partition, config.certifier_tol, config.sdp);
    result.feasibility_solves += er.feasibility_solves;
    if (er.status != SolveStatus::Ok || er.value <= 0.0) continue;
    e = er.value;
    p = cand_p;
    margin = m;
    seeded = true;
  }
  result.trajectory.push_back({0, e, p, -1});

  for (int step = 1; step <= config.max_steps; ++step) {
    if (std::min(e, p) >= config.objective_floor) break;
    if (g_interrupted.load()) {
      result.interrupted = true;
      break;
    }
    if (result.feasibility_solves > config.solve_budget) {
      result.hit_solve_budget = true;
      break;
    }
    const std::vector<NormalFormParams> moves = walk_moves(params, config);
    const std::vector<int> order =
        shuffled_indices(static_cast<int>(moves.size()), rng);
    bool accepted = false;
    for (int idx : order) {
      if (result.feasibility_solves > config.solve_budget) break;
      GaussianState cand{normal_form_matrix(moves[idx])};
      if (try_accept(cand, partition, config, e, p, margin,
                     result.feasibility_solves)) {
        params = moves[idx];
        result.trajectory.push_back({step, e, p, idx});
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // local optimum (or budget exhausted mid-step)
    result.steps_taken = step;
  }

  result.best_params = params;
  result.best_cov = normal_form_matrix(params);
  result.best_e = e;
  result.best_p = p;
  result.best_physicality = margin;
  return result;
}

namespace {

struct ParamRef {
  enum class Kind { SourceVmin, SourceVmax, SourceOrient, GateT, GatePhase };
  Kind kind;
  int index;
};

std::vector<ParamRef> collect_params(const CircuitSpec& spec,
                                     const CircuitParamMask& mask) {
  std::vector<ParamRef> refs;
  for (int i = 0; i < spec.n_modes(); ++i) {
    if (spec.sources[i].kind != SourceKind::SqueezedThermal) continue;
    if (mask.variances) {
      refs.push_back({ParamRef::Kind::SourceVmin, i});
      refs.push_back({ParamRef::Kind::SourceVmax, i});
    }
    if (mask.orientations) refs.push_back({ParamRef::Kind::SourceOrient, i});
  }
  for (int i = 0; i < static_cast<int>(spec.gates.size()); ++i) {
    const bool is_bs = spec.gates[i].type == GateSpec::Type::BeamSplitter;
    if (mask.ratios && is_bs) refs.push_back({ParamRef::Kind::GateT, i});
    if (mask.phases) refs.push_back({ParamRef::Kind::GatePhase, i});
  }
  return refs;
}

bool apply_delta(CircuitSpec& spec, const ParamRef& ref, double delta) {
  switch (ref.kind) {
    case ParamRef::Kind::SourceVmin: {
      auto& src = spec.sources[ref.index];
      const double v = src.v_min + delta;
      if (v < 0.0 || v > src.v_max || v * src.v_max < 1.0 - 1e-9) return false;
      src.v_min = v;
      return true;
    }
    case ParamRef::Kind::SourceVmax: {
      auto& src = spec.sources[ref.index];
      const double v = src.v_max + delta;
      if (v < src.v_min || src.v_min * v < 1.0 - 1e-9) return false;
      src.v_max = v;
      return true;
    }
    case ParamRef::Kind::SourceOrient:
      spec.sources[ref.index].orientation_deg += delta;
      return true;
    case ParamRef::Kind::GateT: {
      const double t = spec.gates[ref.index].transmissivity + delta;
      if (t < 0.0 || t > 1.0) return false;
      spec.gates[ref.index].transmissivity = t;
      return true;
    }
    case ParamRef::Kind::GatePhase:
      spec.gates[ref.index].phase_deg += delta;
      return true;
  }
  return false;
}

double step_size(const ParamRef& ref, const WalkConfig& config) {
  switch (ref.kind) {
    case ParamRef::Kind::SourceOrient:
    case ParamRef::Kind::GatePhase:
      return config.circuit_angle_step_deg;
    default:
      return config.step;
  }
}

}  // namespace

SearchResult random_walk_circuit(const CircuitSpec& base,
                                 const ModePartition& partition,
                                 const CircuitParamMask& mask,
                                 const WalkConfig& config,
                                 bool require_filter_pass) {
  base.validate();
  partition.validate(base.n_modes());

  SearchResult result;
  result.rng_seed = config.seed;
  result.partition = partition;
  Rng rng(config.seed);

  CircuitSpec current = base;
  GaussianState state = simulate_circuit(current);
  double margin = physicality_margin(state);
  double p = ppt_measure(state, partition);
  EntanglementResult er = entanglement_measure(state, partition,
                                               config.certifier_tol,
                                               config.sdp);
  result.feasibility_solves += er.feasibility_solves;
  double e = er.value;
  result.trajectory.push_back({0, e, p, -1});

  const std::vector<ParamRef> refs = collect_params(current, mask);
  if (!refs.empty()) {
    for (int step = 1; step <= config.max_steps; ++step) {
      if (std::min(e, p) >= config.objective_floor) break;
      if (g_interrupted.load()) {
        result.interrupted = true;
        break;
      }
      if (result.feasibility_solves > config.solve_budget) {
        result.hit_solve_budget = true;
        break;
      }
      const int n_moves = 2 * static_cast<int>(refs.size());
      const std::vector<int> order = shuffled_indices(n_moves, rng);
      bool accepted = false;
      for (int idx : order) {
        if (result.feasibility_solves > config.solve_budget) break;
        CircuitSpec cand_spec = current;
        const ParamRef& ref = refs[idx / 2];
        const double delta =
            (idx % 2 == 0 ? 1.0 : -1.0) * step_size(ref, config);
        if (!apply_delta(cand_spec, ref, delta)) continue;
        if (require_filter_pass && !feasibility_filter(cand_spec).pass) continue;
        GaussianState cand = simulate_circuit(cand_spec);
        if (try_accept(cand, partition, config, e, p, margin,
                       result.feasibility_solves)) {
          current = cand_spec;
          state = cand;
          result.trajectory.push_back({step, e, p, idx});
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      result.steps_taken = step;
    }
  }

  result.best_circuit = current;
  result.best_cov = state.cov;
  result.best_e = e;
  result.best_p = p;
  result.best_physicality = margin;
  return result;
}

FilterResult feasibility_filter(const CircuitSpec& spec,
                                double squeezing_floor) {
  FilterResult result;
  int hot_count = 0;
  for (int i = 0; i < spec.n_modes(); ++i) {
    const SourceSpec& src = spec.sources[i];
    if (src.kind != SourceKind::SqueezedThermal) continue;
    if (src.v_min < squeezing_floor) {
      result.reasons.push_back("unachievable squeezing: source " +
                               std::to_string(i + 1) + " has v_min " +
                               std::to_string(src.v_min) + " below floor " +
                               std::to_string(squeezing_floor));
    }
    if (src.is_hot()) ++hot_count;
  }
  if (hot_count > 1) {
    result.reasons.push_back("multiple hot-squeezed modes (" +
                             std::to_string(hot_count) + ")");
  }
  result.pass = result.reasons.empty();
  return result;
}

}  // namespace gaussbound
