#include "gaussbound/tomography.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace gaussbound {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (threads <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&]() {
    while (true) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<long>(threads, count);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Measurement direction (cos theta, sin theta) per mode.
std::vector<Eigen::Vector2d> setting_directions(
    const MeasurementSetting& setting) {
  std::vector<Eigen::Vector2d> u(setting.angles_deg.size());
  for (size_t i = 0; i < u.size(); ++i) {
    const double a = setting.angles_deg[i] * kDegToRad;
    u[i] << std::cos(a), std::sin(a);
  }
  return u;
}

// Covariance of the jointly measured channels.
Mat projected_covariance(const Mat& gamma,
                         const std::vector<Eigen::Vector2d>& u) {
  const int n = static_cast<int>(u.size());
  Mat k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      k(i, j) = u[i].dot(gamma.block<2, 2>(2 * i, 2 * j) * u[j]);
    }
  }
  return 0.5 * (k + k.transpose());
}

struct SettingMoments {
  Vec mean;
  Mat second;  // central, unbiased (1/(N-1))
  long count = 0;
};

SettingMoments block_moments(const SampleBlock& block) {
  SettingMoments m;
  const long rows = block.rows();
  m.count = rows;
  m.mean = block.colwise().mean();
  const Mat raw = block.transpose() * block;
  const Mat centered =
      raw - static_cast<double>(rows) * m.mean * m.mean.transpose();
  m.second = centered / static_cast<double>(rows > 1 ? rows - 1 : 1);
  return m;
}

int vech_index(int a, int b, int dim) {
  if (a > b) std::swap(a, b);
  // Row-major upper triangle: offset of row a plus (b - a).
  return a * dim - a * (a - 1) / 2 + (b - a);
}

std::pair<int, int> vech_coords(int k, int dim) {
  for (int a = 0; a < dim; ++a) {
    const int row_len = dim - a;
    if (k < row_len) return {a, a + k};
    k -= row_len;
  }
  throw std::logic_error("vech_coords: index out of range");
}

// Precomputed least-squares map from per-setting second moments to the
// covariance matrix entries.
class CovarianceEstimator {
 public:
  CovarianceEstimator(const std::vector<MeasurementSetting>& settings,
                      int n_modes)
      : settings_(settings), n_modes_(n_modes) {
    const int dim = 2 * n_modes;
    n_unknowns_ = dim * (dim + 1) / 2;
    std::vector<int> signal_settings;
    for (int s = 0; s < static_cast<int>(settings.size()); ++s) {
      if (static_cast<int>(settings[s].angles_deg.size()) != n_modes) {
        throw std::invalid_argument(
            "estimate_covariance: setting angle count != n_modes");
      }
      if (!settings[s].shot_noise) signal_settings.push_back(s);
      else shot_settings_.push_back(s);
    }
    if (signal_settings.empty()) {
      throw std::invalid_argument(
          "estimate_covariance: no signal settings in plan");
    }
    const int eq_per_setting = n_modes * (n_modes + 1) / 2;
    const int rows = eq_per_setting * static_cast<int>(signal_settings.size());
    design_ = Mat::Zero(rows, n_unknowns_);
    eq_setting_.resize(rows);
    eq_channels_.resize(rows);
    int row = 0;
    for (int s : signal_settings) {
      const auto u = setting_directions(settings[s]);
      for (int i = 0; i < n_modes; ++i) {
        for (int j = i; j < n_modes; ++j, ++row) {
          eq_setting_[row] = s;
          eq_channels_[row] = {i, j};
          for (int qi = 0; qi < 2; ++qi) {
            for (int qj = 0; qj < 2; ++qj) {
              const int a = 2 * i + qi;
              const int b = 2 * j + qj;
              if (i == j && a > b) continue;  // fold onto the upper triangle
              double coeff = u[i](qi) * u[j](qj);
              if (i == j && a != b) coeff = 2.0 * u[i](qi) * u[j](qj);
              design_(row, vech_index(a, b, dim)) += coeff;
            }
          }
        }
      }
    }

    // Rank check; name the unconstrained entries if deficient.
    const Mat gram = design_.transpose() * design_;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    const double max_eig = es.eigenvalues().maxCoeff();
    std::vector<std::pair<int, int>> unconstrained;
    for (int k = 0; k < n_unknowns_; ++k) {
      if (es.eigenvalues()(k) <= 1e-10 * std::max(1.0, max_eig)) {
        const Vec null_vec = es.eigenvectors().col(k);
        const double peak = null_vec.cwiseAbs().maxCoeff();
        for (int m = 0; m < n_unknowns_; ++m) {
          if (std::abs(null_vec(m)) > 0.1 * peak) {
            unconstrained.push_back(vech_coords(m, dim));
          }
        }
      }
    }
    if (!unconstrained.empty()) {
      std::sort(unconstrained.begin(), unconstrained.end());
      unconstrained.erase(
          std::unique(unconstrained.begin(), unconstrained.end()),
          unconstrained.end());
      std::string msg =
          "estimate_covariance: measurement plan cannot identify entries";
      for (auto [a, b] : unconstrained) {
        msg += " (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
      }
      throw UnidentifiableModelError(msg, std::move(unconstrained));
    }
  }

  CovarianceEstimate estimate(const std::vector<SettingMoments>& moments) const {
    const int dim = 2 * n_modes_;
    // Shot-noise gain per channel; vacuum variance is 1 by construction.
    std::vector<double> gains(n_modes_, 1.0);
    long shot_count = 0;
    if (!shot_settings_.empty()) {
      std::vector<double> acc(n_modes_, 0.0);
      for (int s : shot_settings_) {
        for (int c = 0; c < n_modes_; ++c) acc[c] += moments[s].second(c, c);
        shot_count += moments[s].count;
      }
      for (int c = 0; c < n_modes_; ++c) {
        gains[c] = acc[c] / static_cast<double>(shot_settings_.size());
        if (gains[c] <= 0.0) {
          throw std::invalid_argument(
              "estimate_covariance: nonpositive shot-noise gain");
        }
      }
    }

    const int rows = static_cast<int>(design_.rows());
    Vec b(rows);
    Vec var_b(rows);
    for (int row = 0; row < rows; ++row) {
      const int s = eq_setting_[row];
      const auto [i, j] = eq_channels_[row];
      const double norm = std::sqrt(gains[i] * gains[j]);
      const double m_ij = moments[s].second(i, j) / norm;
      b(row) = m_ij;
      // Isserlis: Var(m_ij) = (m_ii m_jj + m_ij^2) / N for Gaussian data.
      const double m_ii = moments[s].second(i, i) / gains[i];
      const double m_jj = moments[s].second(j, j) / gains[j];
      var_b(row) =
          (m_ii * m_jj + m_ij * m_ij) / static_cast<double>(moments[s].count);
    }

    // Inverse-variance weighted least squares; the weights come from the
    // same moments, which keeps resampled estimates self-contained.
    const Vec weights = var_b.cwiseMax(1e-300).cwiseInverse();
    const Mat wdesign = weights.asDiagonal() * design_;
    const Mat gram = design_.transpose() * wdesign;
    const Mat solver = gram.ldlt().solve(wdesign.transpose());
    const Vec theta = solver * b;
    Mat gamma(dim, dim);
    Mat se(dim, dim);
    const Mat var_theta =
        (solver * var_b.asDiagonal() * solver.transpose()).eval();
    for (int k = 0; k < n_unknowns_; ++k) {
      const auto [a, c] = vech_coords(k, dim);
      gamma(a, c) = theta(k);
      gamma(c, a) = theta(k);
      double v = std::max(0.0, var_theta(k, k));
      if (shot_count > 0) {
        // Shared calibration noise: Var(g)/g^2 = 2/N_shot per channel.
        const int mode_a = a / 2, mode_c = c / 2;
        const double rel = (mode_a == mode_c ? 2.0 : 1.0) /
                           static_cast<double>(shot_count);
        v += theta(k) * theta(k) * rel;
      }
      se(a, c) = std::sqrt(v);
      se(c, a) = se(a, c);
    }
    return CovarianceEstimate{CovarianceMatrix(n_modes_, gamma), se, gains};
  }

 private:
  std::vector<MeasurementSetting> settings_;
  int n_modes_;
  int n_unknowns_;
  Mat design_;
  std::vector<int> eq_setting_;
  std::vector<std::pair<int, int>> eq_channels_;
  std::vector<int> shot_settings_;
};

}  // namespace

bool QuadratureDataset::balanced() const {
  for (const auto& block : samples) {
    if (block.rows() != samples.front().rows()) return false;
  }
  return true;
}

long QuadratureDataset::total_samples() const {
  long total = 0;
  for (const auto& block : samples) total += block.rows();
  return total;
}

SampleBlock sample_state(const GaussianState& state,
                         const MeasurementSetting& setting, long count,
                         Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_state: count must be >= 1");
  const int n = state.n_modes();
  if (static_cast<int>(setting.angles_deg.size()) != n) {
    throw std::invalid_argument("sample_state: setting has wrong mode count");
  }
  const double margin = physicality_margin(state);
  if (margin < -1e-9) {
    throw InvalidStateError("sample_state: state is unphysical (margin " +
                            std::to_string(margin) + ")");
  }
  const auto u = setting_directions(setting);
  const Mat k = projected_covariance(state.cov.matrix(), u);
  Eigen::LLT<Mat> llt(k + 1e-14 * Mat::Identity(n, n));
  if (llt.info() != Eigen::Success) {
    throw InvalidStateError("sample_state: projected covariance not PSD");
  }
  const Mat l = llt.matrixL();
  Vec mu(n);
  for (int i = 0; i < n; ++i) mu(i) = u[i].dot(state.mean.segment<2>(2 * i));

  SampleBlock block(count, n);
  Vec z(n);
  for (long r = 0; r < count; ++r) {
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    block.row(r) = (mu + l * z).transpose();
  }
  return block;
}

QuadratureDataset generate_dataset(const GaussianState& state,
                                   const std::vector<MeasurementSetting>& plan,
                                   long count_per_setting, std::uint64_t seed,
                                   int threads) {
  if (count_per_setting < 1) {
    throw std::invalid_argument("generate_dataset: count must be >= 1");
  }
  QuadratureDataset data;
  data.n_modes = state.n_modes();
  data.settings = plan;
  data.samples.resize(plan.size());

  const GaussianState vacuum{
      CovarianceMatrix(state.n_modes(),
                       Mat::Identity(2 * state.n_modes(), 2 * state.n_modes()))};

  constexpr long kChunk = 65536;
  struct Task {
    int setting;
    long offset;
    long count;
    std::uint64_t stream;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < static_cast<int>(plan.size()); ++s) {
    data.samples[s].resize(count_per_setting, state.n_modes());
    long offset = 0;
    long chunk_idx = 0;
    while (offset < count_per_setting) {
      const long len = std::min(kChunk, count_per_setting - offset);
      tasks.push_back(
          {s, offset, len,
           (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(chunk_idx)});
      offset += len;
      ++chunk_idx;
    }
  }
  parallel_for(static_cast<long>(tasks.size()), threads, [&](long ti) {
    const Task& task = tasks[ti];
    Rng rng = Rng::child(seed, task.stream);
    const GaussianState& src =
        plan[task.setting].shot_noise ? vacuum : state;
    const SampleBlock chunk =
        sample_state(src, plan[task.setting], task.count, rng);
    data.samples[task.setting].middleRows(task.offset, task.count) = chunk;
  });
  return data;
}

std::vector<MeasurementSetting> default_setting_plan(int n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("default_setting_plan: n_modes must be >= 1");
  }
  std::vector<MeasurementSetting> plan;
  auto uniform = [n_modes](double angle, const std::string& label) {
    return MeasurementSetting{std::vector<double>(n_modes, angle), label,
                              false};
  };
  plan.push_back(uniform(0.0, "x"));
  plan.push_back(uniform(90.0, "p"));
  plan.push_back(uniform(45.0, "diag"));
  int bits = 0;
  while ((1 << bits) < n_modes) ++bits;
  for (int b = 0; b < bits; ++b) {
    MeasurementSetting pattern{std::vector<double>(n_modes, 0.0),
                               "mix" + std::to_string(b), false};
    MeasurementSetting complement{std::vector<double>(n_modes, 90.0),
                                  "mix" + std::to_string(b) + "c", false};
    for (int i = 0; i < n_modes; ++i) {
      if ((i >> b) & 1) {
        pattern.angles_deg[i] = 90.0;
        complement.angles_deg[i] = 0.0;
      }
    }
    plan.push_back(pattern);
    plan.push_back(complement);
  }
  MeasurementSetting shot{std::vector<double>(n_modes, 0.0), "shot-noise",
                          true};
  plan.push_back(shot);
  // The plan is constructed full rank; the estimator throws otherwise.
  (void)CovarianceEstimator(plan, n_modes);
  return plan;
}

CovarianceEstimate estimate_covariance(const QuadratureDataset& data) {
  if (data.settings.size() != data.samples.size() || data.settings.empty()) {
    throw std::invalid_argument("estimate_covariance: malformed dataset");
  }
  for (const auto& block : data.samples) {
    if (block.rows() < 2) {
      throw std::invalid_argument(
          "estimate_covariance: every setting needs >= 2 samples");
    }
  }
  CovarianceEstimator estimator(data.settings, data.n_modes);
  std::vector<SettingMoments> moments(data.settings.size());
  for (size_t s = 0; s < data.samples.size(); ++s) {
    moments[s] = block_moments(data.samples[s]);
  }
  return estimator.estimate(moments);
}

BootstrapReport bootstrap_certify(const QuadratureDataset& data,
                                  const ModePartition& partition,
                                  const BootstrapOptions& opts) {
  if (opts.resamples < 1) {
    throw std::invalid_argument("bootstrap_certify: resamples must be >= 1");
  }
  partition.validate(data.n_modes);
  if (opts.without_replacement) {
    for (const auto& block : data.samples) {
      if (opts.subsample_size < 2 || opts.subsample_size > block.rows()) {
        throw std::invalid_argument(
            "bootstrap_certify: subsample size must be in [2, setting count]");
      }
    }
  }

  CovarianceEstimator estimator(data.settings, data.n_modes);
  const int n_settings = static_cast<int>(data.settings.size());
  const int n = data.n_modes;
  if (n > 16) {
    throw std::invalid_argument(
        "bootstrap_certify: supports up to 16 modes");
  }

  BootstrapReport report;
  report.resample_count = opts.resamples;

  {
    std::vector<SettingMoments> moments(n_settings);
    for (int s = 0; s < n_settings; ++s) {
      moments[s] = block_moments(data.samples[s]);
    }
    const CovarianceEstimate full = estimator.estimate(moments);
    const GaussianState full_state{full.cov};
    const CertificationReport cert =
        certify(full_state, partition, opts.tol, opts.sdp, true);
    report.full_e = cert.entanglement;
    report.full_p = cert.ppt_margin;
    report.full_phys = cert.physicality;
  }

  report.e_samples.resize(opts.resamples);
  report.p_samples.resize(opts.resamples);
  report.physicality_samples.resize(opts.resamples);

  long max_rows = 0;
  for (const auto& block : data.samples) max_rows = std::max(max_rows, block.rows());

  parallel_for(opts.resamples, opts.threads, [&](long r) {
    thread_local std::vector<int> counts;
    thread_local std::vector<long> picks;
    Rng rng = Rng::child(opts.seed, static_cast<std::uint64_t>(r) + 1);
    std::vector<SettingMoments> moments(n_settings);
    for (int s = 0; s < n_settings; ++s) {
      const SampleBlock& block = data.samples[s];
      const long rows = block.rows();
      const double* ptr = block.data();
      double sum[16] = {0};
      double sum2[136] = {0};
      long taken = 0;
      auto accumulate = [&](long row, double weight) {
        const double* x = ptr + row * n;
        int k = 0;
        for (int i = 0; i < n; ++i) {
          sum[i] += weight * x[i];
          for (int j = i; j < n; ++j, ++k) sum2[k] += weight * x[i] * x[j];
        }
      };
      if (!opts.without_replacement) {
        counts.assign(rows, 0);
        for (long i = 0; i < rows; ++i) {
          ++counts[rng.bounded(static_cast<std::uint64_t>(rows))];
        }
        for (long row = 0; row < rows; ++row) {
          if (counts[row]) accumulate(row, counts[row]);
        }
        taken = rows;
      } else {
        // Partial Fisher-Yates subsample without replacement.
        picks.resize(rows);
        for (long i = 0; i < rows; ++i) picks[i] = i;
        for (long i = 0; i < opts.subsample_size; ++i) {
          const long j =
              i + static_cast<long>(rng.bounded(static_cast<std::uint64_t>(rows - i)));
          std::swap(picks[i], picks[j]);
          accumulate(picks[i], 1.0);
        }
        taken = opts.subsample_size;
      }
      SettingMoments m;
      m.count = taken;
      m.mean = Vec(n);
      m.second = Mat(n, n);
      for (int i = 0; i < n; ++i) m.mean(i) = sum[i] / static_cast<double>(taken);
      int k = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j, ++k) {
          const double central =
              (sum2[k] - static_cast<double>(taken) * m.mean(i) * m.mean(j)) /
              static_cast<double>(taken - 1);
          m.second(i, j) = central;
          m.second(j, i) = central;
        }
      }
      moments[s] = std::move(m);
    }
    const CovarianceEstimate est = estimator.estimate(moments);
    const GaussianState state{est.cov};
    const CertificationReport cert =
        certify(state, partition, opts.tol, opts.sdp, true);
    report.e_samples[r] = cert.entanglement;
    report.p_samples[r] = cert.ppt_margin;
    report.physicality_samples[r] = cert.physicality;
  });

  auto summarize = [](const std::vector<double>& v, double& mean, double& sd) {
    const MomentSummary m = sample_moments(v);
    mean = m.mean;
    sd = std::sqrt(std::max(0.0, m.variance));
  };
  summarize(report.e_samples, report.e_mean, report.e_std);
  summarize(report.p_samples, report.p_mean, report.p_std);
  summarize(report.physicality_samples, report.phys_mean, report.phys_std);
  report.significance_defined =
      report.e_std > 0.0 && report.p_std > 0.0 && report.phys_std > 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.significance_e = report.e_std > 0.0 ? report.e_mean / report.e_std : nan;
  report.significance_p = report.p_std > 0.0 ? report.p_mean / report.p_std : nan;
  report.significance_phys =
      report.phys_std > 0.0 ? report.phys_mean / report.phys_std : nan;
  return report;
}

GaussianityReport gaussianity_tests(const QuadratureDataset& data,
                                    int quantile_grid) {
  if (quantile_grid < 2) {
    throw std::invalid_argument("gaussianity_tests: grid must have >= 2 points");
  }
  GaussianityReport report;
  report.quantile_grid = quantile_grid;
  for (size_t s = 0; s < data.samples.size(); ++s) {
    const SampleBlock& block = data.samples[s];
    if (block.rows() < 100) {
      throw std::invalid_argument(
          "gaussianity_tests: every channel needs >= 100 samples");
    }
    for (int c = 0; c < data.n_modes; ++c) {
      ChannelReport channel;
      channel.setting_label = data.settings[s].label;
      channel.mode = c;
      std::vector<double> column(block.rows());
      for (long r = 0; r < block.rows(); ++r) column[r] = block(r, c);
      channel.moments = sample_moments(column);
      if (channel.moments.degenerate) {
        channel.degenerate = true;
        report.channels.push_back(std::move(channel));
        continue;
      }
      std::sort(column.begin(), column.end());
      const double sd = std::sqrt(channel.moments.variance);
      channel.qq.reserve(quantile_grid);
      for (int k = 0; k < quantile_grid; ++k) {
        const double q = (static_cast<double>(k) + 0.5) /
                         static_cast<double>(quantile_grid);
        channel.qq.emplace_back(
            channel.moments.mean + sd * normal_quantile(q),
            sorted_quantile(column, q));
      }
      channel.chi2 = chi2_normality(column);
      report.channels.push_back(std::move(channel));
    }
  }
  return report;
}

}  // namespace gaussbound
