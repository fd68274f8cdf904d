#pragma once

#include "gaussbound/certifier.hpp"
#include "gaussbound/circuit.hpp"
#include "gaussbound/search.hpp"
#include "gaussbound/tomography.hpp"

#include <optional>
#include <string>

namespace gaussbound {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kQuadratureOrdering = "x1,p1,...,xn,pn";

// Malformed or mismatching input file; the message names the offending field.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Streaming JSON writer. Numbers are emitted with %.17g so every double
// round-trips; NaN and infinities become null.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(long v);
  JsonWriter& value(int v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  JsonWriter& null_value();
  std::string str() const { return out_; }

 private:
  void separator();
  std::string out_;
  std::vector<bool> need_comma_;
  bool pending_key_ = false;
};

std::string format_double(double v);  // %.17g

struct CovarianceDocument {
  GaussianState state{CovarianceMatrix(1, Mat::Identity(2, 2))};
  std::optional<ModePartition> partition;
  bool has_mean = false;
};

std::string covariance_to_json(const GaussianState& state,
                               const std::optional<ModePartition>& partition);
CovarianceDocument covariance_from_json(const std::string& text);
void write_covariance_file(const std::string& path, const GaussianState& state,
                           const std::optional<ModePartition>& partition);
CovarianceDocument read_covariance_file(const std::string& path);

std::string circuit_to_json(const CircuitSpec& spec);
CircuitSpec circuit_from_json(const std::string& text);
void write_circuit_file(const std::string& path, const CircuitSpec& spec);
CircuitSpec read_circuit_file(const std::string& path);

std::string certification_report_to_json(const CertificationReport& report,
                                         double tol);

std::string search_result_to_json(const SearchResult& result,
                                  const std::string& space);

std::string bootstrap_report_to_json(const BootstrapReport& report);
std::string bootstrap_scatter_csv(const BootstrapReport& report);

std::string gaussianity_report_to_json(const GaussianityReport& report);
std::string gaussianity_qq_csv(const GaussianityReport& report);

// Binary dataset container: magic "GBQDSET1", uint32 little-endian header
// length, JSON header (n_modes, ordering, settings with counts), then one
// row-major float64 little-endian block per setting.
void write_dataset_file(const std::string& path, const QuadratureDataset& data);
QuadratureDataset read_dataset_file(const std::string& path);

// CSV import manifest: {"n_modes": n, "settings": [{"label", "angles_deg",
// "shot_noise", "csv"}]}; csv paths are resolved relative to the manifest.
// Each CSV holds one joint outcome per line, one column per mode.
QuadratureDataset read_csv_manifest(const std::string& path);

// Measurement plan file: {"settings": [{"label", "angles_deg", "shot_noise"}]}.
std::vector<MeasurementSetting> plan_from_json(const std::string& text,
                                               int n_modes);
std::string plan_to_json(const std::vector<MeasurementSetting>& plan);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gaussbound
