#include "gaussbound/formats.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gaussbound {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw FormatError(what + ": not valid JSON");
  }
  return j;
}

const json& require(const json& j, const std::string& field,
                    const std::string& what) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw FormatError(what + ": missing field \"" + field + "\"");
  }
  return *it;
}

ModePartition partition_from_json(const json& j, int n_modes,
                                  const std::string& what) {
  ModePartition p;
  const json& a = require(j, "a", what + ".partition");
  const json& b = require(j, "b", what + ".partition");
  if (!a.is_array() || !b.is_array()) {
    throw FormatError(what + ": partition sides must be arrays");
  }
  for (const auto& v : a) p.party_a.push_back(v.get<int>() - 1);
  for (const auto& v : b) p.party_b.push_back(v.get<int>() - 1);
  try {
    p.validate(n_modes);
  } catch (const std::invalid_argument& err) {
    throw FormatError(what + ": invalid partition: " + err.what());
  }
  return p;
}

void write_partition(JsonWriter& w, const ModePartition& p) {
  w.begin_object();
  w.key("a").begin_array();
  for (int m : p.party_a) w.value(m + 1);
  w.end_array();
  w.key("b").begin_array();
  for (int m : p.party_b) w.value(m + 1);
  w.end_array();
  w.end_object();
}

void write_matrix_array(JsonWriter& w, const Mat& m) {
  w.begin_array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) w.value(m(r, c));
  }
  w.end_array();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  need_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  need_comma_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ += '[';
  need_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  need_comma_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
  separator();
  out_ += '"';
  out_ += name;
  out_ += "\":";
  pending_key_ = true;
  return *this;
}

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!need_comma_.empty()) {
    if (need_comma_.back()) out_ += ',';
    need_comma_.back() = true;
  }
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  if (std::isfinite(v)) {
    out_ += format_double(v);
  } else {
    out_ += "null";
  }
  return *this;
}

JsonWriter& JsonWriter::value(long v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  separator();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      case '\r': out_ += "\\r"; break;
      default: out_ += c;
    }
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::null_value() {
  separator();
  out_ += "null";
  return *this;
}

std::string covariance_to_json(const GaussianState& state,
                               const std::optional<ModePartition>& partition) {
  JsonWriter w;
  w.begin_object();
  w.key("n_modes").value(state.n_modes());
  w.key("ordering").value(kQuadratureOrdering);
  w.key("matrix");
  write_matrix_array(w, state.cov.matrix());
  if (state.mean.cwiseAbs().maxCoeff() > 0.0) {
    w.key("mean").begin_array();
    for (int i = 0; i < state.mean.size(); ++i) w.value(state.mean(i));
    w.end_array();
  }
  if (partition) {
    w.key("partition");
    write_partition(w, *partition);
  }
  w.end_object();
  return w.str();
}

CovarianceDocument covariance_from_json(const std::string& text) {
  const json j = parse_json(text, "covariance");
  const int n = require(j, "n_modes", "covariance").get<int>();
  if (n < 1) throw FormatError("covariance: n_modes must be >= 1");
  const std::string ordering =
      require(j, "ordering", "covariance").get<std::string>();
  if (ordering != kQuadratureOrdering) {
    throw FormatError(std::string("covariance: ordering must be \"") +
                      kQuadratureOrdering + "\", got \"" + ordering + "\"");
  }
  const json& matrix = require(j, "matrix", "covariance");
  const int d = 2 * n;
  if (!matrix.is_array() || static_cast<int>(matrix.size()) != d * d) {
    throw FormatError("covariance: matrix must hold " + std::to_string(d * d) +
                      " numbers (row-major " + std::to_string(d) + "x" +
                      std::to_string(d) + ")");
  }
  Mat m(d, d);
  int idx = 0;
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c, ++idx) m(r, c) = matrix[idx].get<double>();
  }
  Vec mean = Vec::Zero(d);
  bool has_mean = false;
  if (j.contains("mean")) {
    const json& mv = j["mean"];
    if (!mv.is_array() || static_cast<int>(mv.size()) != d) {
      throw FormatError("covariance: mean must hold 2n numbers");
    }
    for (int i = 0; i < d; ++i) mean(i) = mv[i].get<double>();
    has_mean = true;
  }
  CovarianceDocument doc{GaussianState(CovarianceMatrix(n, m), mean),
                         std::nullopt, has_mean};
  if (j.contains("partition")) {
    doc.partition = partition_from_json(j["partition"], n, "covariance");
  }
  return doc;
}

void write_covariance_file(const std::string& path, const GaussianState& state,
                           const std::optional<ModePartition>& partition) {
  write_text_file(path, covariance_to_json(state, partition) + "\n");
}

CovarianceDocument read_covariance_file(const std::string& path) {
  return covariance_from_json(read_text_file(path));
}

std::string circuit_to_json(const CircuitSpec& spec) {
  JsonWriter w;
  w.begin_object();
  w.key("sources").begin_array();
  for (const SourceSpec& s : spec.sources) {
    w.begin_object();
    w.key("kind").value(s.kind == SourceKind::Vacuum ? "vacuum"
                                                     : "squeezed_thermal");
    w.key("v_min").value(s.v_min);
    w.key("v_max").value(s.v_max);
    w.key("orientation_deg").value(s.orientation_deg);
    w.end_object();
  }
  w.end_array();
  w.key("gates").begin_array();
  for (const GateSpec& g : spec.gates) {
    w.begin_object();
    if (g.type == GateSpec::Type::Rotation) {
      w.key("type").value("rotation");
      w.key("modes").begin_array().value(g.mode_a + 1).end_array();
    } else {
      w.key("type").value("beamsplitter");
      w.key("modes").begin_array().value(g.mode_a + 1).value(g.mode_b + 1)
          .end_array();
      w.key("transmissivity").value(g.transmissivity);
    }
    w.key("phase_deg").value(g.phase_deg);
    w.end_object();
  }
  w.end_array();
  w.key("losses").begin_array();
  for (const LossSpec& l : spec.losses) {
    w.begin_object();
    w.key("mode").value(l.mode + 1);
    w.key("efficiency").value(l.efficiency);
    w.end_object();
  }
  w.end_array();
  if (spec.partition) {
    w.key("partition");
    write_partition(w, *spec.partition);
  }
  w.end_object();
  return w.str();
}

CircuitSpec circuit_from_json(const std::string& text) {
  const json j = parse_json(text, "circuit");
  CircuitSpec spec;
  const json& sources = require(j, "sources", "circuit");
  if (!sources.is_array() || sources.empty()) {
    throw FormatError("circuit: sources must be a nonempty array");
  }
  int index = 0;
  for (const auto& s : sources) {
    ++index;
    SourceSpec src;
    const std::string kind =
        require(s, "kind", "circuit.sources").get<std::string>();
    if (kind == "vacuum") {
      src.kind = SourceKind::Vacuum;
    } else if (kind == "squeezed_thermal") {
      src.kind = SourceKind::SqueezedThermal;
      src.v_min = require(s, "v_min", "circuit.sources").get<double>();
      src.v_max = require(s, "v_max", "circuit.sources").get<double>();
      if (s.contains("orientation_deg")) {
        src.orientation_deg = s["orientation_deg"].get<double>();
      }
      if (src.v_min * src.v_max < 1.0 - 1e-9) {
        throw FormatError("circuit: source " + std::to_string(index) +
                          " is unphysical (v_min*v_max < 1)");
      }
    } else {
      throw FormatError("circuit: source " + std::to_string(index) +
                        " has unknown kind \"" + kind + "\"");
    }
    spec.sources.push_back(src);
  }
  if (j.contains("gates")) {
    int gate_index = 0;
    for (const auto& g : j["gates"]) {
      ++gate_index;
      const std::string type =
          require(g, "type", "circuit.gates").get<std::string>();
      const json& modes = require(g, "modes", "circuit.gates");
      if (type == "rotation") {
        if (modes.size() != 1) {
          throw FormatError("circuit: gate " + std::to_string(gate_index) +
                            ": rotation takes one mode");
        }
        spec.gates.push_back(GateSpec::rotation(
            modes[0].get<int>() - 1,
            require(g, "phase_deg", "circuit.gates").get<double>()));
      } else if (type == "beamsplitter") {
        if (modes.size() != 2) {
          throw FormatError("circuit: gate " + std::to_string(gate_index) +
                            ": beamsplitter takes two modes");
        }
        spec.gates.push_back(GateSpec::beamsplitter(
            modes[0].get<int>() - 1, modes[1].get<int>() - 1,
            require(g, "transmissivity", "circuit.gates").get<double>(),
            require(g, "phase_deg", "circuit.gates").get<double>()));
      } else {
        throw FormatError("circuit: gate " + std::to_string(gate_index) +
                          " has unknown type \"" + type + "\"");
      }
    }
  }
  if (j.contains("losses")) {
    for (const auto& l : j["losses"]) {
      spec.losses.push_back(
          {require(l, "mode", "circuit.losses").get<int>() - 1,
           require(l, "efficiency", "circuit.losses").get<double>()});
    }
  }
  if (j.contains("partition")) {
    spec.partition =
        partition_from_json(j["partition"], spec.n_modes(), "circuit");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& err) {
    throw FormatError(std::string("circuit: ") + err.what());
  }
  return spec;
}

void write_circuit_file(const std::string& path, const CircuitSpec& spec) {
  write_text_file(path, circuit_to_json(spec) + "\n");
}

CircuitSpec read_circuit_file(const std::string& path) {
  return circuit_from_json(read_text_file(path));
}

std::string certification_report_to_json(const CertificationReport& report,
                                         double tol) {
  JsonWriter w;
  w.begin_object();
  w.key("entanglement").value(report.entanglement);
  w.key("ppt_margin").value(report.ppt_margin);
  w.key("physicality").value(report.physicality);
  w.key("classification").value(report.classification);
  w.key("e_bracket_width").value(report.e_bracket_width);
  w.key("tol").value(tol);
  w.key("iterations").begin_object();
  w.key("feasibility_solves").value(report.feasibility_solves);
  w.key("newton_iterations").value(report.newton_iterations);
  w.end_object();
  w.key("witness_a");
  write_matrix_array(w, report.witness_a);
  w.key("witness_b");
  write_matrix_array(w, report.witness_b);
  w.end_object();
  return w.str();
}

std::string search_result_to_json(const SearchResult& result,
                                  const std::string& space) {
  JsonWriter w;
  w.begin_object();
  w.key("space").value(space);
  w.key("seed").value(result.rng_seed);
  w.key("steps_taken").value(result.steps_taken);
  w.key("draws_used").value(result.draws_used);
  w.key("feasibility_solves").value(result.feasibility_solves);
  w.key("interrupted").value(result.interrupted);
  w.key("hit_solve_budget").value(result.hit_solve_budget);
  w.key("best").begin_object();
  w.key("entanglement").value(result.best_e);
  w.key("ppt_margin").value(result.best_p);
  w.key("physicality").value(result.best_physicality);
  w.end_object();
  w.key("partition");
  write_partition(w, result.partition);
  if (result.best_params) {
    w.key("lambda").begin_array();
    for (double v : result.best_params->lambda) w.value(v);
    w.end_array();
  }
  w.key("trajectory").begin_array();
  for (const TrajectoryPoint& pt : result.trajectory) {
    w.begin_object();
    w.key("step").value(pt.step);
    w.key("entanglement").value(pt.e);
    w.key("ppt_margin").value(pt.p);
    w.key("move_index").value(pt.move_index);
    w.end_object();
  }
  w.end_array();
  w.key("covariance");
  // Inline covariance document (same schema as the covariance file).
  w.begin_object();
  w.key("n_modes").value(result.best_cov.n_modes());
  w.key("ordering").value(kQuadratureOrdering);
  w.key("matrix");
  write_matrix_array(w, result.best_cov.matrix());
  w.key("partition");
  write_partition(w, result.partition);
  w.end_object();
  w.end_object();
  std::string out = w.str();
  if (result.best_circuit) {
    // Splice the circuit JSON in as a sibling of "covariance".
    out.pop_back();  // trailing '}'
    out += ",\"circuit\":" + circuit_to_json(*result.best_circuit) + "}";
  }
  return out;
}

std::string bootstrap_report_to_json(const BootstrapReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("resamples").value(report.resample_count);
  w.key("full_data").begin_object();
  w.key("entanglement").value(report.full_e);
  w.key("ppt_margin").value(report.full_p);
  w.key("physicality").value(report.full_phys);
  w.end_object();
  auto block = [&w](const char* name, double mean, double sd, double sig) {
    w.key(name).begin_object();
    w.key("mean").value(mean);
    w.key("std").value(sd);
    w.key("significance").value(sig);  // NaN becomes null
    w.end_object();
  };
  block("entanglement", report.e_mean, report.e_std, report.significance_e);
  block("ppt_margin", report.p_mean, report.p_std, report.significance_p);
  block("physicality", report.phys_mean, report.phys_std,
        report.significance_phys);
  w.key("significance_defined").value(report.significance_defined);
  w.end_object();
  return w.str();
}

std::string bootstrap_scatter_csv(const BootstrapReport& report) {
  std::string out = "ppt_margin,entanglement,physicality\n";
  for (long i = 0; i < report.resample_count; ++i) {
    out += format_double(report.p_samples[i]);
    out += ',';
    out += format_double(report.e_samples[i]);
    out += ',';
    out += format_double(report.physicality_samples[i]);
    out += '\n';
  }
  return out;
}

std::string gaussianity_report_to_json(const GaussianityReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("quantile_grid").value(report.quantile_grid);
  w.key("channels").begin_array();
  for (const ChannelReport& c : report.channels) {
    w.begin_object();
    w.key("setting").value(c.setting_label);
    w.key("mode").value(c.mode + 1);
    w.key("degenerate").value(c.degenerate);
    w.key("mean").value(c.moments.mean);
    w.key("variance").value(c.moments.variance);
    w.key("skewness").value(c.moments.skewness);
    w.key("excess_kurtosis").value(c.moments.excess_kurtosis);
    if (!c.degenerate) {
      w.key("chi2").begin_object();
      w.key("statistic").value(c.chi2.statistic);
      w.key("dof").value(c.chi2.dof);
      w.key("bins").value(c.chi2.bins);
      w.key("p_value").value(c.chi2.p_value);
      w.end_object();
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string gaussianity_qq_csv(const GaussianityReport& report) {
  std::string out = "setting,mode,theoretical_quantile,sample_quantile\n";
  for (const ChannelReport& c : report.channels) {
    for (const auto& [theory, sample] : c.qq) {
      out += c.setting_label;
      out += ',';
      out += std::to_string(c.mode + 1);
      out += ',';
      out += format_double(theory);
      out += ',';
      out += format_double(sample);
      out += '\n';
    }
  }
  return out;
}

namespace {
constexpr char kDatasetMagic[9] = "GBQDSET1";
}

void write_dataset_file(const std::string& path,
                        const QuadratureDataset& data) {
  JsonWriter w;
  w.begin_object();
  w.key("version").value(1);
  w.key("n_modes").value(data.n_modes);
  w.key("ordering").value(kQuadratureOrdering);
  w.key("settings").begin_array();
  for (size_t s = 0; s < data.settings.size(); ++s) {
    const MeasurementSetting& setting = data.settings[s];
    w.begin_object();
    w.key("label").value(setting.label);
    w.key("angles_deg").begin_array();
    for (double a : setting.angles_deg) w.value(a);
    w.end_array();
    w.key("shot_noise").value(setting.shot_noise);
    w.key("count").value(static_cast<long>(data.samples[s].rows()));
    w.end_object();
  }
  w.end_array();
  w.end_object();
  const std::string header = w.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("dataset: cannot open " + path + " for writing");
  out.write(kDatasetMagic, 8);
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const SampleBlock& block : data.samples) {
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(sizeof(double) * block.size()));
  }
  if (!out) throw FormatError("dataset: write failed for " + path);
}

QuadratureDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("dataset: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDatasetMagic, 8) != 0) {
    throw FormatError("dataset: bad magic in " + path);
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || len == 0 || len > (1u << 24)) {
    throw FormatError("dataset: bad header length");
  }
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw FormatError("dataset: truncated header");
  const json j = parse_json(header, "dataset header");
  QuadratureDataset data;
  data.n_modes = require(j, "n_modes", "dataset").get<int>();
  if (data.n_modes < 1) throw FormatError("dataset: n_modes must be >= 1");
  const std::string ordering =
      require(j, "ordering", "dataset").get<std::string>();
  if (ordering != kQuadratureOrdering) {
    throw FormatError("dataset: unexpected ordering \"" + ordering + "\"");
  }
  for (const auto& s : require(j, "settings", "dataset")) {
    MeasurementSetting setting;
    setting.label = require(s, "label", "dataset.settings").get<std::string>();
    for (const auto& a : require(s, "angles_deg", "dataset.settings")) {
      setting.angles_deg.push_back(a.get<double>());
    }
    if (static_cast<int>(setting.angles_deg.size()) != data.n_modes) {
      throw FormatError("dataset: setting \"" + setting.label +
                        "\" angle count != n_modes");
    }
    setting.shot_noise = s.contains("shot_noise") && s["shot_noise"].get<bool>();
    const long count = require(s, "count", "dataset.settings").get<long>();
    if (count < 1) throw FormatError("dataset: nonpositive sample count");
    data.settings.push_back(setting);
    SampleBlock block(count, data.n_modes);
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(sizeof(double) * block.size()));
    if (!in) {
      throw FormatError("dataset: truncated sample block for setting \"" +
                        setting.label + "\"");
    }
    data.samples.push_back(std::move(block));
  }
  return data;
}

QuadratureDataset read_csv_manifest(const std::string& path) {
  const json j = parse_json(read_text_file(path), "csv manifest");
  QuadratureDataset data;
  data.n_modes = require(j, "n_modes", "csv manifest").get<int>();
  const auto base = std::filesystem::path(path).parent_path();
  for (const auto& s : require(j, "settings", "csv manifest")) {
    MeasurementSetting setting;
    setting.label = require(s, "label", "csv manifest").get<std::string>();
    for (const auto& a : require(s, "angles_deg", "csv manifest")) {
      setting.angles_deg.push_back(a.get<double>());
    }
    setting.shot_noise = s.contains("shot_noise") && s["shot_noise"].get<bool>();
    const std::string csv_rel =
        require(s, "csv", "csv manifest").get<std::string>();
    const std::string csv_path = (base / csv_rel).string();
    std::ifstream in(csv_path);
    if (!in) throw FormatError("csv manifest: cannot open " + csv_path);
    std::vector<double> values;
    std::string line;
    long rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string tok;
      int cols = 0;
      while (std::getline(ss, tok, ',')) {
        values.push_back(std::stod(tok));
        ++cols;
      }
      if (cols != data.n_modes) {
        throw FormatError("csv manifest: " + csv_path + " line " +
                          std::to_string(rows + 1) + " has " +
                          std::to_string(cols) + " columns, expected " +
                          std::to_string(data.n_modes));
      }
      ++rows;
    }
    if (rows == 0) throw FormatError("csv manifest: " + csv_path + " is empty");
    SampleBlock block(rows, data.n_modes);
    std::memcpy(block.data(), values.data(), sizeof(double) * values.size());
    data.settings.push_back(setting);
    data.samples.push_back(std::move(block));
  }
  return data;
}

std::vector<MeasurementSetting> plan_from_json(const std::string& text,
                                               int n_modes) {
  const json j = parse_json(text, "plan");
  std::vector<MeasurementSetting> plan;
  for (const auto& s : require(j, "settings", "plan")) {
    MeasurementSetting setting;
    setting.label = require(s, "label", "plan.settings").get<std::string>();
    for (const auto& a : require(s, "angles_deg", "plan.settings")) {
      setting.angles_deg.push_back(a.get<double>());
    }
    if (static_cast<int>(setting.angles_deg.size()) != n_modes) {
      throw FormatError("plan: setting \"" + setting.label +
                        "\" angle count != n_modes");
    }
    setting.shot_noise = s.contains("shot_noise") && s["shot_noise"].get<bool>();
    plan.push_back(setting);
  }
  if (plan.empty()) throw FormatError("plan: settings must be nonempty");
  return plan;
}

std::string plan_to_json(const std::vector<MeasurementSetting>& plan) {
  JsonWriter w;
  w.begin_object();
  w.key("settings").begin_array();
  for (const MeasurementSetting& s : plan) {
    w.begin_object();
    w.key("label").value(s.label);
    w.key("angles_deg").begin_array();
    for (double a : s.angles_deg) w.value(a);
    w.end_array();
    w.key("shot_noise").value(s.shot_noise);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace gaussbound
