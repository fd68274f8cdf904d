#include "gaussbound/formats.hpp"
#include "gaussbound/presets.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <iostream>

namespace gb = gaussbound;

namespace {

// 0 ok/classified, 1 input error, 2 indeterminate, 3 search exhausted.
constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitIndeterminate = 2;
constexpr int kExitExhausted = 3;

struct GlobalFlags {
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int threads = 2;
  std::string out;
};

std::vector<std::string> g_argv;

void write_manifest(const std::string& command, const GlobalFlags& flags,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double wall_ms) {
  if (flags.out.empty()) return;
  gb::JsonWriter w;
  w.begin_object();
  w.key("command").value(command);
  w.key("argv").begin_array();
  for (const std::string& a : g_argv) w.value(a);
  w.end_array();
  w.key("seed").value(flags.seed);
  w.key("tol").value(flags.tol);
  w.key("threads").value(flags.threads);
  w.key("inputs").begin_array();
  for (const std::string& p : inputs) w.value(p);
  w.end_array();
  w.key("outputs").begin_array();
  for (const std::string& p : outputs) w.value(p);
  w.end_array();
  w.key("library_version").value(gb::kLibraryVersion);
  w.key("wall_ms").value(wall_ms);
  w.end_object();
  gb::write_text_file(flags.out + ".manifest.json", w.str() + "\n");
}

gb::ModePartition resolve_partition(
    const std::string& flag_value,
    const std::optional<gb::ModePartition>& from_file, int n_modes,
    const char* what) {
  if (!flag_value.empty()) {
    gb::ModePartition p = gb::ModePartition::parse(flag_value);
    p.validate(n_modes);
    return p;
  }
  if (from_file) return *from_file;
  throw gb::FormatError(std::string(what) +
                        ": missing field \"partition\" (give --partition or "
                        "store it in the input file)");
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void warn_if_asymmetric(const gb::CovarianceDocument& doc,
                        const std::string& path) {
  if (doc.state.cov.asymmetry() >
      gb::CovarianceMatrix::kAsymmetryWarnThreshold) {
    std::cerr << "warning: " << path << ": matrix asymmetry "
              << gb::format_double(doc.state.cov.asymmetry())
              << " exceeds 1e-8; symmetrized as (g + g^T)/2\n";
  }
}

int cmd_certify(const GlobalFlags& flags, const std::string& in_path,
                const std::string& partition_flag) {
  Timer timer;
  const gb::CovarianceDocument doc = gb::read_covariance_file(in_path);
  warn_if_asymmetric(doc, in_path);
  const gb::ModePartition partition = resolve_partition(
      partition_flag, doc.partition, doc.state.n_modes(), "covariance");
  const gb::CertificationReport report =
      gb::certify(doc.state, partition, flags.tol, {}, true);
  const std::string text = gb::certification_report_to_json(report, flags.tol);
  if (!flags.out.empty()) gb::write_text_file(flags.out, text + "\n");
  std::cout << text << "\n";
  write_manifest("certify", flags, {in_path},
                 flags.out.empty() ? std::vector<std::string>{}
                                   : std::vector<std::string>{flags.out},
                 timer.ms());
  return report.status == gb::SolveStatus::Indeterminate ? kExitIndeterminate
                                                         : kExitOk;
}

int cmd_simulate(const GlobalFlags& flags, const std::string& in_path) {
  Timer timer;
  const gb::CircuitSpec spec = gb::read_circuit_file(in_path);
  const gb::GaussianState state = gb::simulate_circuit(spec);
  const std::string out = flags.out.empty() ? "covariance.json" : flags.out;
  gb::write_covariance_file(out, state, spec.partition);
  GlobalFlags with_out = flags;
  with_out.out = out;
  write_manifest("simulate", with_out, {in_path}, {out}, timer.ms());
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_search(const GlobalFlags& flags, const std::string& space,
               double step, double angle, int max_steps, double floor,
               long draw_budget, long solve_budget, double lift,
               const std::string& base_path, const std::string& mask_csv,
               bool require_feasible, const std::string& partition_flag) {
  Timer timer;
  gb::WalkConfig config;
  config.seed = flags.seed;
  config.step = step;
  config.rotation_angle = angle;
  config.max_steps = max_steps;
  config.objective_floor = floor;
  config.certifier_tol = flags.tol;
  config.draw_budget = draw_budget;
  config.seed_lift_margin = lift;
  if (solve_budget > 0) config.solve_budget = solve_budget;

  gb::SearchResult result;
  if (space == "normal-form") {
    result = gb::random_walk_normal_form(config);
  } else if (space == "circuit") {
    if (base_path.empty()) {
      throw gb::FormatError(
          "search: --base circuit file is required for --space circuit");
    }
    const gb::CircuitSpec base = gb::read_circuit_file(base_path);
    const gb::ModePartition partition = resolve_partition(
        partition_flag, base.partition, base.n_modes(), "circuit");
    gb::CircuitParamMask mask;
    std::stringstream ss(mask_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "ratios") mask.ratios = true;
      else if (tok == "phases") mask.phases = true;
      else if (tok == "variances") mask.variances = true;
      else if (tok == "orientations") mask.orientations = true;
      else if (tok == "none") {}
      else if (!tok.empty()) {
        throw gb::FormatError("search: unknown mask element \"" + tok + "\"");
      }
    }
    result = gb::random_walk_circuit(base, partition, mask, config,
                                     require_feasible);
  } else {
    throw gb::FormatError("search: --space must be normal-form or circuit");
  }

  const std::string text = gb::search_result_to_json(result, space);
  if (!flags.out.empty()) gb::write_text_file(flags.out, text + "\n");
  std::cout << "best: E=" << gb::format_double(result.best_e)
            << " P=" << gb::format_double(result.best_p)
            << " steps=" << result.steps_taken
            << (result.interrupted ? " (interrupted)" : "") << "\n";
  write_manifest("search", flags,
                 base_path.empty() ? std::vector<std::string>{}
                                   : std::vector<std::string>{base_path},
                 flags.out.empty() ? std::vector<std::string>{}
                                   : std::vector<std::string>{flags.out},
                 timer.ms());
  return kExitOk;
}

gb::QuadratureDataset read_any_dataset(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  char magic[8] = {};
  probe.read(magic, 8);
  probe.close();
  if (std::string(magic, 8) == "GBQDSET1") return gb::read_dataset_file(path);
  return gb::read_csv_manifest(path);
}

int cmd_tomo_generate(const GlobalFlags& flags, const std::string& state_path,
                      long count, const std::string& plan_path) {
  Timer timer;
  const gb::CovarianceDocument doc = gb::read_covariance_file(state_path);
  warn_if_asymmetric(doc, state_path);
  std::vector<gb::MeasurementSetting> plan =
      plan_path.empty()
          ? gb::default_setting_plan(doc.state.n_modes())
          : gb::plan_from_json(gb::read_text_file(plan_path),
                               doc.state.n_modes());
  const long per_setting =
      std::max<long>(1, count / static_cast<long>(plan.size()));
  const gb::QuadratureDataset data = gb::generate_dataset(
      doc.state, plan, per_setting, flags.seed, flags.threads);
  const std::string out = flags.out.empty() ? "dataset.qds" : flags.out;
  gb::write_dataset_file(out, data);
  GlobalFlags with_out = flags;
  with_out.out = out;
  write_manifest("tomo generate", with_out, {state_path}, {out}, timer.ms());
  std::cout << "wrote " << out << " (" << data.total_samples()
            << " joint samples)\n";
  return kExitOk;
}

int cmd_tomo_estimate(const GlobalFlags& flags, const std::string& in_path,
                      const std::string& partition_flag) {
  Timer timer;
  const gb::QuadratureDataset data = read_any_dataset(in_path);
  const gb::CovarianceEstimate est = gb::estimate_covariance(data);
  std::optional<gb::ModePartition> partition;
  if (!partition_flag.empty()) {
    partition = gb::ModePartition::parse(partition_flag);
    partition->validate(data.n_modes);
  }
  const std::string out = flags.out.empty() ? "estimate.json" : flags.out;
  gb::write_covariance_file(out, gb::GaussianState{est.cov}, partition);
  GlobalFlags with_out = flags;
  with_out.out = out;
  write_manifest("tomo estimate", with_out, {in_path}, {out}, timer.ms());
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_tomo_bootstrap(const GlobalFlags& flags, const std::string& in_path,
                       long resamples, const std::string& partition_flag,
                       const std::string& scatter_path, long subsample) {
  Timer timer;
  const gb::QuadratureDataset data = read_any_dataset(in_path);
  const gb::ModePartition partition =
      resolve_partition(partition_flag, std::nullopt, data.n_modes, "dataset");
  gb::BootstrapOptions opts;
  opts.resamples = resamples;
  opts.seed = flags.seed;
  opts.tol = flags.tol;
  opts.threads = flags.threads;
  if (subsample > 0) {
    opts.without_replacement = true;
    opts.subsample_size = subsample;
  }
  const gb::BootstrapReport report =
      gb::bootstrap_certify(data, partition, opts);
  const std::string text = gb::bootstrap_report_to_json(report);
  if (!flags.out.empty()) gb::write_text_file(flags.out, text + "\n");
  std::vector<std::string> outputs;
  if (!flags.out.empty()) outputs.push_back(flags.out);
  if (!scatter_path.empty()) {
    gb::write_text_file(scatter_path, gb::bootstrap_scatter_csv(report));
    outputs.push_back(scatter_path);
  }
  std::cout << text << "\n";
  write_manifest("tomo bootstrap", flags, {in_path}, outputs, timer.ms());
  return kExitOk;
}

int cmd_tomo_gauss_test(const GlobalFlags& flags, const std::string& in_path,
                        int grid, const std::string& qq_path) {
  Timer timer;
  const gb::QuadratureDataset data = read_any_dataset(in_path);
  const gb::GaussianityReport report = gb::gaussianity_tests(data, grid);
  const std::string text = gb::gaussianity_report_to_json(report);
  if (!flags.out.empty()) gb::write_text_file(flags.out, text + "\n");
  std::vector<std::string> outputs;
  if (!flags.out.empty()) outputs.push_back(flags.out);
  if (!qq_path.empty()) {
    gb::write_text_file(qq_path, gb::gaussianity_qq_csv(report));
    outputs.push_back(qq_path);
  }
  std::cout << text << "\n";
  write_manifest("tomo gauss-test", flags, {in_path}, outputs, timer.ms());
  return kExitOk;
}

int cmd_preset(const GlobalFlags& flags, const std::string& which,
               const std::string& ratios_csv, const std::string& cov_path) {
  Timer timer;
  gb::CircuitSpec spec;
  if (which == "paper-circuit") {
    std::array<double, 4> ratios{0.5, 0.5, 0.5, 0.5};
    if (!ratios_csv.empty()) {
      std::stringstream ss(ratios_csv);
      std::string tok;
      int k = 0;
      while (std::getline(ss, tok, ',') && k < 4) ratios[k++] = std::stod(tok);
      if (k != 4) throw gb::FormatError("preset: --ratios needs 4 numbers");
    }
    spec = gb::paper_circuit(ratios, gb::ModePartition{{0, 3}, {1, 2}});
  } else if (which == "bound-state") {
    spec = gb::bound_state_preset();
  } else {
    throw gb::FormatError("preset: unknown preset \"" + which + "\"");
  }
  std::vector<std::string> outputs;
  if (!flags.out.empty()) {
    gb::write_circuit_file(flags.out, spec);
    outputs.push_back(flags.out);
    std::cout << "wrote " << flags.out << "\n";
  }
  if (!cov_path.empty()) {
    const gb::GaussianState state = gb::simulate_circuit(spec);
    gb::write_covariance_file(cov_path, state, spec.partition);
    outputs.push_back(cov_path);
    std::cout << "wrote " << cov_path << "\n";
  }
  write_manifest("preset " + which, flags, {}, outputs, timer.ms());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_argv.emplace_back(argv[i]);
  std::signal(SIGINT, [](int) { gb::search_interrupt_flag().store(true); });

  CLI::App app{"Gaussian bound-entanglement toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Master 64-bit seed");
  app.add_option("--tol", flags.tol, "Certifier bisection tolerance");
  app.add_option("--threads", flags.threads, "Worker threads");
  app.add_option("--out", flags.out, "Primary output path");

  auto* certify = app.add_subcommand("certify", "Certify a covariance file");
  std::string certify_in, certify_partition;
  certify->add_option("--in", certify_in, "Covariance JSON")->required();
  certify->add_option("--partition", certify_partition,
                      "Bipartition, e.g. \"1,2|3,4\" (1-based)");

  auto* simulate = app.add_subcommand("simulate", "Circuit to covariance");
  std::string simulate_in;
  simulate->add_option("--in", simulate_in, "Circuit JSON")->required();

  auto* search = app.add_subcommand("search", "Random-walk state search");
  std::string search_space = "normal-form", search_base, search_mask = "ratios",
              search_partition;
  double search_step = 0.01, search_angle = 0.01,
         search_floor = std::numeric_limits<double>::infinity(),
         search_lift = 0.05;
  int search_max_steps = 200;
  long search_draws = 1000000, search_solves = 0;
  bool search_filter = false;
  search->add_option("--space", search_space, "normal-form | circuit");
  search->add_option("--step", search_step, "Axis displacement");
  search->add_option("--angle", search_angle, "Plane rotation angle (rad)");
  search->add_option("--max-steps", search_max_steps, "Accepted-step cap");
  search->add_option("--objective-floor", search_floor,
                     "Stop once min{E, P} reaches this");
  search->add_option("--budget", search_draws, "Hypercube draw budget");
  search->add_option("--solve-budget", search_solves,
                     "Feasibility solve budget (0 = unlimited)");
  search->add_option("--lift", search_lift, "Seed physicality lift margin");
  search->add_option("--base", search_base, "Base circuit JSON (circuit space)");
  search->add_option("--mask", search_mask,
                     "circuit space: ratios,phases,variances,orientations");
  search->add_option("--partition", search_partition, "Bipartition override");
  search->add_flag("--require-feasible", search_filter,
                   "Reject circuit candidates failing the feasibility filter");

  auto* tomo = app.add_subcommand("tomo", "Tomography pipeline");
  tomo->require_subcommand(1);
  tomo->fallthrough();

  auto* generate = tomo->add_subcommand("generate", "Sample a dataset");
  std::string gen_state, gen_plan;
  long gen_count = 4000000;
  generate->add_option("--state", gen_state, "Covariance JSON")->required();
  generate->add_option("--count", gen_count,
                       "Total joint samples across settings");
  generate->add_option("--plan", gen_plan, "Measurement plan JSON (optional)");

  auto* estimate = tomo->add_subcommand("estimate", "Estimate covariance");
  std::string est_in, est_partition;
  estimate->add_option("--in", est_in, "Dataset (.qds or CSV manifest)")
      ->required();
  estimate->add_option("--partition", est_partition,
                       "Partition to store in the output");

  auto* bootstrap =
      tomo->add_subcommand("bootstrap", "Bootstrap certification");
  std::string boot_in, boot_partition, boot_scatter;
  long boot_resamples = 10000, boot_subsample = 0;
  bootstrap->add_option("--in", boot_in, "Dataset")->required();
  bootstrap->add_option("--resamples", boot_resamples, "Resample count");
  bootstrap->add_option("--partition", boot_partition, "Bipartition")
      ->required();
  bootstrap->add_option("--scatter-csv", boot_scatter,
                        "Write the (P, E) scatter CSV here");
  bootstrap->add_option("--subsample", boot_subsample,
                        "Without-replacement subsample size (0 = bootstrap)");

  auto* gauss = tomo->add_subcommand("gauss-test", "Gaussianity tests");
  std::string gauss_in, gauss_qq;
  int gauss_grid = 101;
  gauss->add_option("--in", gauss_in, "Dataset")->required();
  gauss->add_option("--qq-grid", gauss_grid, "Quantile grid size");
  gauss->add_option("--qq-csv", gauss_qq, "Write Q-Q pairs CSV here");

  auto* preset = app.add_subcommand("preset", "Emit shipped presets");
  std::string preset_name, preset_ratios, preset_cov;
  preset->add_option("name", preset_name, "paper-circuit | bound-state")
      ->required();
  preset->add_option("--ratios", preset_ratios,
                     "paper-circuit: four comma-separated ratios");
  preset->add_option("--cov", preset_cov,
                     "Also write the simulated covariance here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*certify) return cmd_certify(flags, certify_in, certify_partition);
    if (*simulate) return cmd_simulate(flags, simulate_in);
    if (*search) {
      return cmd_search(flags, search_space, search_step, search_angle,
                        search_max_steps, search_floor, search_draws,
                        search_solves, search_lift, search_base, search_mask,
                        search_filter, search_partition);
    }
    if (*generate)
      return cmd_tomo_generate(flags, gen_state, gen_count, gen_plan);
    if (*estimate) return cmd_tomo_estimate(flags, est_in, est_partition);
    if (*bootstrap) {
      return cmd_tomo_bootstrap(flags, boot_in, boot_resamples, boot_partition,
                                boot_scatter, boot_subsample);
    }
    if (*gauss)
      return cmd_tomo_gauss_test(flags, gauss_in, gauss_grid, gauss_qq);
    if (*preset)
      return cmd_preset(flags, preset_name, preset_ratios, preset_cov);
  } catch (const gb::SearchExhaustedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExhausted;
  } catch (const gb::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const gb::UnidentifiableModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const gb::InvalidStateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
