#include "gaussbound/certifier.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <vector>

namespace gaussbound {

namespace {

// One nonzero of the affine map z_k -> F_block.
struct Entry {
  int var;
  int row;
  int col;
  double coeff;
};

// The max-t feasibility SDP in party-A-modes-first frame. Three blocks:
//   0: gamma - (gamma_A (+) gamma_B) - t I            (2n x 2n)
//   1: [[gamma_A, -x sigma_A], [x sigma_A, gamma_A]] - t I
//   2: same for B
// Variables are the upper triangles of gamma_A and gamma_B plus t (last).
class SeparabilitySdp {
 public:
  SeparabilitySdp(const Mat& gamma, int a_modes, int b_modes, double x) {
    da_ = 2 * a_modes;
    db_ = 2 * b_modes;
    d0_ = da_ + db_;
    n_vars_ = da_ * (da_ + 1) / 2 + db_ * (db_ + 1) / 2;

    block_dims_ = {d0_, 2 * da_, 2 * db_};
    base_.resize(3);
    base_[0] = gamma;
    base_[1] = Mat::Zero(2 * da_, 2 * da_);
    base_[2] = Mat::Zero(2 * db_, 2 * db_);
    const Mat sa = x * symplectic_form(a_modes);
    const Mat sb = x * symplectic_form(b_modes);
    base_[1].topRightCorner(da_, da_) = -sa;
    base_[1].bottomLeftCorner(da_, da_) = sa;
    base_[2].topRightCorner(db_, db_) = -sb;
    base_[2].bottomLeftCorner(db_, db_) = sb;

    entries_.assign(3, {});
    int k = 0;
    for (int p = 0; p < da_; ++p) {
      for (int q = p; q < da_; ++q, ++k) {
        push_sym(0, k, p, q, -1.0);
        push_sym(1, k, p, q, 1.0);
        push_sym(1, k, p + da_, q + da_, 1.0);
      }
    }
    for (int p = 0; p < db_; ++p) {
      for (int q = p; q < db_; ++q, ++k) {
        push_sym(0, k, da_ + p, da_ + q, -1.0);
        push_sym(2, k, p, q, 1.0);
        push_sym(2, k, p + db_, q + db_, 1.0);
      }
    }
  }

  int n_vars() const { return n_vars_; }
  double cone_dim() const {
    return static_cast<double>(block_dims_[0] + block_dims_[1] + block_dims_[2]);
  }

  // F_b(z, t); z holds the matrix variables, t enters as -t I.
  Mat assemble(int b, const Vec& z, double t) const {
    Mat f = base_[b];
    for (const Entry& e : entries_[b]) f(e.row, e.col) += e.coeff * z(e.var);
    f.diagonal().array() -= t;
    return f;
  }

  bool positive_definite(const Vec& z, double t, double* logdet_sum) const {
    double total = 0.0;
    for (int b = 0; b < 3; ++b) {
      Eigen::LLT<Mat> llt(assemble(b, z, t));
      if (llt.info() != Eigen::Success) return false;
      const auto& l = llt.matrixLLT();
      double ld = 0.0;
      for (int i = 0; i < l.rows(); ++i) {
        if (l(i, i) <= 0.0) return false;
        ld += std::log(l(i, i));
      }
      total += 2.0 * ld;
    }
    if (logdet_sum) *logdet_sum = total;
    return true;
  }

  double min_block_eig(const Vec& z, double t) const {
    double worst = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 3; ++b) {
      Eigen::SelfAdjointEigenSolver<Mat> es(assemble(b, z, t),
                                            Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    return worst;
  }

  // Gradient and Hessian of phi(z, t) = -theta t - sum_b log det F_b at (z, t).
  // Returns false if any block fails to stay positive definite.
  bool derivatives(const Vec& z, double t, double theta, Vec& grad,
                   Mat& hess) const {
    const int m = n_vars_ + 1;
    grad = Vec::Zero(m);
    hess = Mat::Zero(m, m);
    grad(n_vars_) = -theta;
    for (int b = 0; b < 3; ++b) {
      Eigen::LLT<Mat> llt(assemble(b, z, t));
      if (llt.info() != Eigen::Success) return false;
      const int d = block_dims_[b];
      const Mat g = llt.solve(Mat::Identity(d, d));
      const Mat g2 = g * g;
      const auto& ents = entries_[b];
      for (const Entry& e : ents) {
        grad(e.var) -= e.coeff * g(e.row, e.col);
        hess(n_vars_, e.var) -= e.coeff * g2(e.row, e.col);
      }
      grad(n_vars_) += g.trace();
      hess(n_vars_, n_vars_) += g2.trace();
      for (size_t i = 0; i < ents.size(); ++i) {
        const Entry& ei = ents[i];
        for (size_t j = 0; j <= i; ++j) {
          const Entry& ej = ents[j];
          double v =
              ei.coeff * ej.coeff * g(ei.col, ej.row) * g(ej.col, ei.row);
          // Ordered entry pairs (i,j) and (j,i) both land on the diagonal
          // Hessian entry when the two entries belong to the same variable.
          if (i != j && ei.var == ej.var) v *= 2.0;
          if (ei.var >= ej.var) {
            hess(ei.var, ej.var) += v;
          } else {
            hess(ej.var, ei.var) += v;
          }
        }
      }
    }
    // Mirror the lower triangle accumulated above.
    hess = hess.selfadjointView<Eigen::Lower>();
    return true;
  }

  Mat extract_a(const Vec& z) const {
    Mat g = Mat::Zero(da_, da_);
    int k = 0;
    for (int p = 0; p < da_; ++p) {
      for (int q = p; q < da_; ++q, ++k) {
        g(p, q) = z(k);
        g(q, p) = z(k);
      }
    }
    return g;
  }

  Mat extract_b(const Vec& z) const {
    Mat g = Mat::Zero(db_, db_);
    int k = da_ * (da_ + 1) / 2;
    for (int p = 0; p < db_; ++p) {
      for (int q = p; q < db_; ++q, ++k) {
        g(p, q) = z(k);
        g(q, p) = z(k);
      }
    }
    return g;
  }

  // z for gamma_A = gamma_B = c I.
  Vec identity_start(double c) const {
    Vec z = Vec::Zero(n_vars_);
    int k = 0;
    for (int p = 0; p < da_; ++p)
      for (int q = p; q < da_; ++q, ++k)
        if (p == q) z(k) = c;
    for (int p = 0; p < db_; ++p)
      for (int q = p; q < db_; ++q, ++k)
        if (p == q) z(k) = c;
    return z;
  }

 private:
  void push_sym(int block, int var, int r, int c, double coeff) {
    entries_[block].push_back({var, r, c, coeff});
    if (r != c) entries_[block].push_back({var, c, r, coeff});
  }

  int da_, db_, d0_, n_vars_;
  std::vector<int> block_dims_;
  std::vector<Mat> base_;
  std::vector<std::vector<Entry>> entries_;
};

}  // namespace

FeasibilityResult separability_feasible(const CovarianceMatrix& target,
                                        const ModePartition& partition,
                                        double x, const SdpOptions& opts) {
  if (x < 0.0) {
    throw std::invalid_argument("separability_feasible: x must be >= 0");
  }
  partition.validate(target.n_modes());

  const auto perm = partition_front_permutation(partition, target.n_modes());
  const GaussianState permuted =
      permute_modes(GaussianState(target), perm);
  const int a_modes = static_cast<int>(partition.party_a.size());
  const int b_modes = static_cast<int>(partition.party_b.size());
  const Mat& gamma = permuted.cov.matrix();

  SeparabilitySdp sdp(gamma, a_modes, b_modes, x);

  Eigen::SelfAdjointEigenSolver<Mat> es(gamma, Eigen::EigenvaluesOnly);
  const double gamma_min = es.eigenvalues().minCoeff();
  const double c0 = gamma_min > 0.2 ? 0.5 * gamma_min
                                    : std::max(0.1, 0.5 * gamma_min);
  Vec z = sdp.identity_start(c0);
  double t = sdp.min_block_eig(z, 0.0) - 1.0;

  FeasibilityResult result;
  const double nu = sdp.cone_dim();
  double theta = 1.0;
  const int m = sdp.n_vars() + 1;
  Vec grad(m);
  Mat hess(m, m);

  auto finalize = [&](Feasibility verdict, double gap) {
    result.verdict = verdict;
    result.max_margin = t;
    result.margin_upper = t + gap;
    result.gamma_a = sdp.extract_a(z);
    result.gamma_b = sdp.extract_b(z);
    return result;
  };

  constexpr int kCenterIterationCap = 60;

  while (true) {
    // Center for the current theta.
    for (int center_iters = 0; center_iters < kCenterIterationCap;
         ++center_iters) {
      if (result.newton_iterations >= opts.iteration_cap) {
        return finalize(Feasibility::Indeterminate, nu / theta);
      }
      ++result.newton_iterations;
      if (!sdp.derivatives(z, t, theta, grad, hess)) {
        // Should not happen from a strictly feasible iterate.
        return finalize(Feasibility::Indeterminate, nu / theta);
      }
      Eigen::LDLT<Mat> ldlt(hess);
      Vec step = ldlt.solve(-grad);
      if (!step.allFinite()) {
        hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().maxCoeff());
        step = hess.ldlt().solve(-grad);
        if (!step.allFinite()) {
          return finalize(Feasibility::Indeterminate, nu / theta);
        }
      }
      const double decrement_sq = -grad.dot(step);
      if (decrement_sq * 0.5 <= opts.center_tol) break;
      double phi0;
      sdp.positive_definite(z, t, &phi0);
      phi0 = -theta * t - phi0;
      double alpha = 1.0;
      const Vec dz = step.head(sdp.n_vars());
      const double dt = step(sdp.n_vars());
      bool moved = false;
      while (alpha > 1e-13) {
        const Vec z_new = z + alpha * dz;
        const double t_new = t + alpha * dt;
        double logdet;
        if (sdp.positive_definite(z_new, t_new, &logdet)) {
          const double phi_new = -theta * t_new - logdet;
          if (phi_new <= phi0 - 0.01 * alpha * decrement_sq) {
            // Stop once phi improvements sink into rounding noise.
            if (phi0 - phi_new <= 1e-12 * (1.0 + std::abs(phi0))) {
              alpha = 0.0;
              break;
            }
            z = z_new;
            t = t_new;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;  // cannot improve further at this theta
    }

    const double gap = nu / theta;
    if (t >= -opts.feas_tol) return finalize(Feasibility::Feasible, gap);
    if (t + gap < -opts.feas_tol) return finalize(Feasibility::Infeasible, gap);
    if (gap <= opts.gap_tol) {
      // Boundary sliver thinner than the verdict tolerance; decide by midpoint.
      return finalize(t + 0.5 * gap >= -opts.feas_tol ? Feasibility::Feasible
                                                      : Feasibility::Infeasible,
                      gap);
    }
    theta *= opts.barrier_mu;
  }
}

double ppt_measure(const GaussianState& state, const ModePartition& partition) {
  const GaussianState transposed = partial_transpose(state, partition);
  return hermitian_min_eig(transposed.cov.matrix(),
                           symplectic_form(state.n_modes()));
}

EntanglementResult entanglement_measure(const GaussianState& state,
                                        const ModePartition& partition,
                                        double tol, const SdpOptions& opts,
                                        bool allow_unphysical) {
  if (tol <= 0.0) {
    throw std::invalid_argument("entanglement_measure: tol must be > 0");
  }
  partition.validate(state.n_modes());
  if (!allow_unphysical) {
    const double margin = physicality_margin(state);
    if (margin < -1e-9) {
      throw InvalidStateError(
          "entanglement_measure: state is unphysical (margin " +
          std::to_string(margin) + ")");
    }
  }

  EntanglementResult result;
  Eigen::SelfAdjointEigenSolver<Mat> es(state.cov.matrix(),
                                        Eigen::EigenvaluesOnly);
  const double gamma_min = es.eigenvalues().minCoeff();
  const double gamma_max = es.eigenvalues().maxCoeff();

  auto solve_at = [&](double x) {
    FeasibilityResult fr =
        separability_feasible(state.cov, partition, x, opts);
    ++result.feasibility_solves;
    result.newton_iterations += fr.newton_iterations;
    return fr;
  };

  // Physical gamma is PSD, so x = 0 is feasible (gamma_A = gamma_B = 0).
  // Only a non-PSD matrix on the lenient path can fail there.
  bool lo_witnessed = false;
  if (gamma_min < -opts.feas_tol) {
    FeasibilityResult at_zero = solve_at(0.0);
    if (at_zero.verdict == Feasibility::Indeterminate) {
      result.status = SolveStatus::Indeterminate;
      result.x_lo = 0.0;
      result.x_hi = gamma_max;
      result.bracket_width = gamma_max;
      return result;
    }
    if (at_zero.verdict == Feasibility::Infeasible) {
      result.gamma_not_psd = true;
      result.value = 1.0;
      result.x_lo = result.x_hi = 0.0;
      return result;
    }
    result.witness_a = at_zero.gamma_a;
    result.witness_b = at_zero.gamma_b;
    lo_witnessed = true;
  }

  double lo = 0.0;
  double hi = gamma_max;

  // x can never exceed lambda_max(gamma); if feasible there, it is the answer.
  FeasibilityResult at_hi = solve_at(hi);
  if (at_hi.verdict == Feasibility::Indeterminate) {
    result.status = SolveStatus::Indeterminate;
    result.x_lo = lo;
    result.x_hi = hi;
    result.bracket_width = hi - lo;
    return result;
  }
  if (at_hi.verdict == Feasibility::Feasible) {
    result.value = 1.0 - hi;
    result.x_lo = result.x_hi = hi;
    result.bracket_width = 0.0;
    result.witness_a = at_hi.gamma_a;
    result.witness_b = at_hi.gamma_b;
    return result;
  }

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    FeasibilityResult fr = solve_at(mid);
    if (fr.verdict == Feasibility::Indeterminate) {
      result.status = SolveStatus::Indeterminate;
      result.x_lo = lo;
      result.x_hi = hi;
      result.bracket_width = hi - lo;
      return result;
    }
    if (fr.verdict == Feasibility::Feasible) {
      lo = mid;
      result.witness_a = fr.gamma_a;
      result.witness_b = fr.gamma_b;
      lo_witnessed = true;
    } else {
      hi = mid;
    }
  }

  if (!lo_witnessed) {
    FeasibilityResult fr = solve_at(lo);
    result.witness_a = fr.gamma_a;
    result.witness_b = fr.gamma_b;
  }
  result.x_lo = lo;
  result.x_hi = hi;
  result.bracket_width = hi - lo;
  result.value = 1.0 - 0.5 * (lo + hi);
  return result;
}

CertificationReport certify(const GaussianState& state,
                            const ModePartition& partition, double tol,
                            const SdpOptions& opts, bool allow_unphysical) {
  CertificationReport report;
  report.physicality = physicality_margin(state);
  report.ppt_margin = ppt_measure(state, partition);

  EntanglementResult e =
      entanglement_measure(state, partition, tol, opts, allow_unphysical);
  report.entanglement = e.value;
  report.e_bracket_width = e.bracket_width;
  report.witness_a = e.witness_a;
  report.witness_b = e.witness_b;
  report.status = e.status;
  report.feasibility_solves = e.feasibility_solves;
  report.newton_iterations = e.newton_iterations;
  report.bisection_steps = e.feasibility_solves;

  if (e.status == SolveStatus::Indeterminate) {
    report.classification = "indeterminate";
  } else if (report.physicality < -1e-9) {
    report.classification = "unphysical";
  } else if (report.entanglement > tol && report.ppt_margin > 0.0) {
    report.classification = "bound-entangled";
  } else if (report.entanglement > tol) {
    report.classification = "free-entangled";
  } else if (report.entanglement < -tol) {
    report.classification = "separable";
  } else {
    report.classification = "separable-boundary";
  }
  return report;
}

}  // namespace gaussbound
