#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaussbound {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Raised when a value is structurally valid but describes a state the
// requested operation is undefined on (e.g. a singular covariance matrix).
struct InvalidStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Second-moment matrix of an n-mode Gaussian state in quadrature ordering
// (x1, p1, ..., xn, pn), vacuum-normalized so that the vacuum state is the
// identity. Construction symmetrizes to (g + g^T)/2; the original asymmetry
// is kept as a diagnostic since matrices estimated from finite samples are
// never exactly symmetric.
class CovarianceMatrix {
 public:
  CovarianceMatrix(int n_modes, const Mat& entries);

  int n_modes() const { return n_modes_; }
  int dim() const { return 2 * n_modes_; }
  const Mat& matrix() const { return m_; }

  // max |g - g^T| entry seen at construction, before symmetrization.
  double asymmetry() const { return asymmetry_; }
  // Above this the matrix is suspicious rather than merely noisy.
  static constexpr double kAsymmetryWarnThreshold = 1e-8;

 private:
  int n_modes_;
  Mat m_;
  double asymmetry_;
};

// Bipartition of the n modes between parties A and B. Mode indices are
// 0-based internally; file formats use 1-based indices.
struct ModePartition {
  std::vector<int> party_a;
  std::vector<int> party_b;

  void validate(int n_modes) const;  // disjoint, nonempty, covering

  // Parses "1,2|3,4" (1-based).
  static ModePartition parse(const std::string& text);
  std::string to_string() const;  // 1-based, canonical order
};

struct GaussianState {
  CovarianceMatrix cov;
  Vec mean;  // length 2n; defaults to zero displacement

  explicit GaussianState(CovarianceMatrix c);
  GaussianState(CovarianceMatrix c, Vec mean_vec);

  int n_modes() const { return cov.n_modes(); }
};

// Direct sum of n blocks [[0, 1], [-1, 0]].
Mat symplectic_form(int n_modes);

// Minimum eigenvalue of the Hermitian matrix S + iA, computed through the
// real symmetric embedding [[S, -A], [A, S]] whose spectrum equals that of
// S + iA with doubled multiplicity. S must be symmetric and A antisymmetric
// to within 1e-10 (relative to the largest entry).
double hermitian_min_eig(const Mat& real_part, const Mat& imag_part);

// min eig(gamma + i sigma); >= 0 means the state is physical. The raw value
// is reported, never clamped.
double physicality_margin(const GaussianState& state);

// Moduli of the eigenvalues of i*sigma*gamma, one per +- pair, ascending.
// Requires gamma positive definite.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

// gamma^Gamma = M gamma M with M diagonal, -1 on the momentum coordinates of
// party B modes, +1 elsewhere. The mean transforms as M * mean.
GaussianState partial_transpose(const GaussianState& state,
                                const ModePartition& partition);

// Reorders modes: output mode i is input mode perm[i]. Rows/columns move in
// 2x2 blocks, preserving the symplectic form.
GaussianState permute_modes(const GaussianState& state,
                            const std::vector<int>& perm);

// Permutation that lists party A's modes first, then party B's.
std::vector<int> partition_front_permutation(const ModePartition& partition,
                                             int n_modes);

}  // namespace gaussbound
