#include "gaussbound/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gaussbound {

CovarianceMatrix::CovarianceMatrix(int n_modes, const Mat& entries)
    : n_modes_(n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("CovarianceMatrix: n_modes must be >= 1");
  }
  const int d = 2 * n_modes;
  if (entries.rows() != d || entries.cols() != d) {
    throw std::invalid_argument(
        "CovarianceMatrix: expected " + std::to_string(d) + "x" +
        std::to_string(d) + " matrix, got " + std::to_string(entries.rows()) +
        "x" + std::to_string(entries.cols()));
  }
  asymmetry_ = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  m_ = 0.5 * (entries + entries.transpose());
}

void ModePartition::validate(int n_modes) const {
  if (party_a.empty() || party_b.empty()) {
    throw std::invalid_argument("ModePartition: both parties must be nonempty");
  }
  std::set<int> seen;
  for (int m : party_a) seen.insert(m);
  for (int m : party_b) seen.insert(m);
  if (static_cast<int>(seen.size()) !=
      static_cast<int>(party_a.size() + party_b.size())) {
    throw std::invalid_argument("ModePartition: parties must be disjoint");
  }
  if (static_cast<int>(seen.size()) != n_modes || *seen.begin() != 0 ||
      *seen.rbegin() != n_modes - 1) {
    throw std::invalid_argument(
        "ModePartition: parties must cover modes 1.." + std::to_string(n_modes));
  }
}

ModePartition ModePartition::parse(const std::string& text) {
  auto bar = text.find('|');
  if (bar == std::string::npos) {
    throw std::invalid_argument("partition: expected \"1,2|3,4\" syntax");
  }
  auto parse_side = [](const std::string& side) {
    std::vector<int> modes;
    std::stringstream ss(side);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      int v = std::stoi(tok);
      if (v < 1) throw std::invalid_argument("partition: mode indices are 1-based");
      modes.push_back(v - 1);
    }
    std::sort(modes.begin(), modes.end());
    return modes;
  };
  ModePartition p;
  p.party_a = parse_side(text.substr(0, bar));
  p.party_b = parse_side(text.substr(bar + 1));
  return p;
}

std::string ModePartition::to_string() const {
  std::ostringstream out;
  auto emit = [&out](const std::vector<int>& side) {
    for (size_t i = 0; i < side.size(); ++i) {
      if (i) out << ',';
      out << side[i] + 1;
    }
  };
  emit(party_a);
  out << '|';
  emit(party_b);
  return out.str();
}

GaussianState::GaussianState(CovarianceMatrix c)
    : cov(std::move(c)), mean(Vec::Zero(cov.dim())) {}

GaussianState::GaussianState(CovarianceMatrix c, Vec mean_vec)
    : cov(std::move(c)), mean(std::move(mean_vec)) {
  if (mean.size() != cov.dim()) {
    throw std::invalid_argument("GaussianState: mean must have length 2n");
  }
}

Mat symplectic_form(int n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("symplectic_form: n_modes must be >= 1");
  }
  Mat sigma = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    sigma(2 * k, 2 * k + 1) = 1.0;
    sigma(2 * k + 1, 2 * k) = -1.0;
  }
  return sigma;
}

double hermitian_min_eig(const Mat& real_part, const Mat& imag_part) {
  const auto n = real_part.rows();
  if (real_part.cols() != n || imag_part.rows() != n || imag_part.cols() != n) {
    throw std::invalid_argument("hermitian_min_eig: dimension mismatch");
  }
  const double scale =
      std::max({1.0, real_part.cwiseAbs().maxCoeff(), imag_part.cwiseAbs().maxCoeff()});
  if ((real_part - real_part.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("hermitian_min_eig: real part is not symmetric");
  }
  if ((imag_part + imag_part.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("hermitian_min_eig: imag part is not antisymmetric");
  }
  Mat embedding(2 * n, 2 * n);
  embedding << real_part, -imag_part, imag_part, real_part;
  Eigen::SelfAdjointEigenSolver<Mat> solver(embedding,
                                            Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double physicality_margin(const GaussianState& state) {
  return hermitian_min_eig(state.cov.matrix(),
                           symplectic_form(state.n_modes()));
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  const Mat& gamma = state.cov.matrix();
  Eigen::SelfAdjointEigenSolver<Mat> solver(gamma);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig <= 1e-12) {
    throw InvalidStateError(
        "symplectic_eigenvalues: covariance matrix is not positive definite "
        "(min eigenvalue " + std::to_string(min_eig) + ")");
  }
  // gamma^(1/2) sigma gamma^(1/2) is antisymmetric with eigenvalues +-i s_k;
  // so -(A*A) is symmetric PSD with each s_k^2 twice.
  const Mat root = solver.operatorSqrt();
  const Mat a = root * symplectic_form(state.n_modes()) * root;
  const Mat squared = -(a * a);
  Eigen::SelfAdjointEigenSolver<Mat> sq_solver(0.5 * (squared + squared.transpose()),
                                               Eigen::EigenvaluesOnly);
  Vec vals = sq_solver.eigenvalues();
  std::vector<double> result(state.n_modes());
  for (int k = 0; k < state.n_modes(); ++k) {
    const double pair_mean = 0.5 * (vals(2 * k) + vals(2 * k + 1));
    result[k] = std::sqrt(std::max(0.0, pair_mean));
  }
  std::sort(result.begin(), result.end());
  return result;
}

GaussianState partial_transpose(const GaussianState& state,
                                const ModePartition& partition) {
  partition.validate(state.n_modes());
  Vec signs = Vec::Ones(state.cov.dim());
  for (int mode : partition.party_b) signs(2 * mode + 1) = -1.0;
  Mat flipped = signs.asDiagonal() * state.cov.matrix() * signs.asDiagonal();
  return GaussianState(CovarianceMatrix(state.n_modes(), flipped),
                       signs.asDiagonal() * state.mean);
}

GaussianState permute_modes(const GaussianState& state,
                            const std::vector<int>& perm) {
  const int n = state.n_modes();
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permute_modes: permutation size mismatch");
  }
  std::vector<bool> hit(n, false);
  for (int v : perm) {
    if (v < 0 || v >= n || hit[v]) {
      throw std::invalid_argument("permute_modes: not a bijection on modes");
    }
    hit[v] = true;
  }
  const Mat& g = state.cov.matrix();
  Mat out(2 * n, 2 * n);
  Vec mean_out(2 * n);
  for (int i = 0; i < n; ++i) {
    mean_out.segment<2>(2 * i) = state.mean.segment<2>(2 * perm[i]);
    for (int j = 0; j < n; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = g.block<2, 2>(2 * perm[i], 2 * perm[j]);
    }
  }
  return GaussianState(CovarianceMatrix(n, out), mean_out);
}

std::vector<int> partition_front_permutation(const ModePartition& partition,
                                             int n_modes) {
  partition.validate(n_modes);
  std::vector<int> perm;
  perm.reserve(n_modes);
  std::vector<int> a = partition.party_a;
  std::vector<int> b = partition.party_b;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  perm.insert(perm.end(), a.begin(), a.end());
  perm.insert(perm.end(), b.begin(), b.end());
  return perm;
}

}  // namespace gaussbound
