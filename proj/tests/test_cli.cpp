#include "gaussbound/formats.hpp"
#include "gaussbound/presets.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace gaussbound;

namespace {

const std::string kCli = GAUSSBOUND_CLI_PATH;

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("gaussbound_cli_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

bool same_bytes(const std::string& a, const std::string& b) {
  return read_text_file(a) == read_text_file(b);
}

}  // namespace

TEST_CASE("cli: certify vacuum file classifies separable-boundary") {
  TempDir dir;
  GaussianState vac{CovarianceMatrix(4, Mat::Identity(8, 8))};
  write_covariance_file(dir.file("vac.json"), vac,
                        ModePartition{{0, 1}, {2, 3}});
  const std::string out = dir.file("report.json");
  CHECK(run("certify --in " + dir.file("vac.json") + " --out " + out) == 0);
  const std::string report = read_text_file(out);
  CHECK(report.find("\"classification\":\"separable-boundary\"") !=
        std::string::npos);
  CHECK(std::filesystem::exists(out + ".manifest.json"));
}

TEST_CASE("cli: certify the shipped preset end to end") {
  TempDir dir;
  const std::string circuit = dir.file("preset.json");
  const std::string cov = dir.file("cov.json");
  CHECK(run("preset bound-state --out " + circuit + " --cov " + cov) == 0);
  const std::string report = dir.file("report.json");
  CHECK(run("certify --in " + cov + " --out " + report) == 0);
  CHECK(read_text_file(report).find("\"classification\":\"bound-entangled\"") !=
        std::string::npos);
}

TEST_CASE("cli: input errors exit 1 naming the field") {
  TempDir dir;
  CHECK(run("certify --in " + dir.file("missing.json")) == 1);

  write_text_file(dir.file("bad_ordering.json"),
                  "{\"n_modes\":1,\"ordering\":\"p1,x1\","
                  "\"matrix\":[1,0,0,1]}");
  CHECK(run("certify --in " + dir.file("bad_ordering.json")) == 1);

  // No partition anywhere.
  GaussianState vac{CovarianceMatrix(2, Mat::Identity(4, 4))};
  write_covariance_file(dir.file("nopart.json"), vac, std::nullopt);
  CHECK(run("certify --in " + dir.file("nopart.json")) == 1);

  write_text_file(dir.file("badsource.json"),
                  "{\"sources\":[{\"kind\":\"squeezed_thermal\","
                  "\"v_min\":0.1,\"v_max\":2.0}],\"gates\":[]}");
  CHECK(run("simulate --in " + dir.file("badsource.json")) == 1);
}

TEST_CASE("cli: simulate all-vacuum circuit gives the identity") {
  TempDir dir;
  write_text_file(dir.file("vac_circuit.json"),
                  "{\"sources\":[{\"kind\":\"vacuum\"},{\"kind\":\"vacuum\"}],"
                  "\"gates\":[{\"type\":\"beamsplitter\",\"modes\":[1,2],"
                  "\"transmissivity\":0.5,\"phase_deg\":90.0}],"
                  "\"partition\":{\"a\":[1],\"b\":[2]}}");
  const std::string out = dir.file("cov.json");
  CHECK(run("simulate --in " + dir.file("vac_circuit.json") + " --out " +
            out) == 0);
  const CovarianceDocument doc = read_covariance_file(out);
  CHECK((doc.state.cov.matrix() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);
  REQUIRE(doc.partition.has_value());
}

TEST_CASE("cli: search normal-form with max-steps zero") {
  TempDir dir;
  const std::string out = dir.file("search.json");
  CHECK(run("search --space normal-form --seed 7 --max-steps 0 --tol 1e-4 "
            "--out " + out) == 0);
  const std::string text = read_text_file(out);
  CHECK(text.find("\"steps_taken\":0") != std::string::npos);
  CHECK(text.find("\"lambda\":[") != std::string::npos);
}

TEST_CASE("cli: search exhaustion exits 3") {
  TempDir dir;
  CHECK(run("search --space normal-form --seed 99 --budget 3 --tol 1e-4 "
            "--out " + dir.file("s.json")) == 3);
}

TEST_CASE("cli: circuit search with empty mask evaluates the base") {
  TempDir dir;
  const std::string circuit = dir.file("base.json");
  CHECK(run("preset bound-state --out " + circuit) == 0);
  const std::string out = dir.file("walk.json");
  CHECK(run("search --space circuit --base " + circuit +
            " --mask none --seed 3 --tol 1e-4 --out " + out) == 0);
  CHECK(read_text_file(out).find("\"steps_taken\":0") != std::string::npos);
  CHECK(read_text_file(out).find("\"circuit\":") != std::string::npos);
}

TEST_CASE("cli: tomography chain with determinism across reruns and threads") {
  TempDir dir;
  const std::string cov = dir.file("cov.json");
  CHECK(run("preset bound-state --cov " + cov) == 0);

  const std::string d1 = dir.file("a.qds");
  const std::string d2 = dir.file("b.qds");
  const std::string d4 = dir.file("c.qds");
  CHECK(run("tomo generate --state " + cov +
            " --count 16000 --seed 5 --threads 1 --out " + d1) == 0);
  CHECK(run("tomo generate --state " + cov +
            " --count 16000 --seed 5 --threads 2 --out " + d2) == 0);
  CHECK(run("tomo generate --state " + cov +
            " --count 16000 --seed 5 --threads 2 --out " + d4) == 0);
  CHECK(same_bytes(d1, d2));
  CHECK(same_bytes(d2, d4));

  const std::string est = dir.file("est.json");
  CHECK(run("tomo estimate --in " + d1 + " --partition \"1,4|2,3\" --out " +
            est) == 0);
  CHECK(read_text_file(est).find("\"partition\"") != std::string::npos);

  const std::string boot1 = dir.file("boot1.json");
  const std::string boot2 = dir.file("boot2.json");
  const std::string scatter = dir.file("scatter.csv");
  CHECK(run("tomo bootstrap --in " + d1 +
            " --partition \"1,4|2,3\" --resamples 20 --seed 11 --tol 1e-4 "
            "--threads 1 --scatter-csv " + scatter + " --out " + boot1) == 0);
  CHECK(run("tomo bootstrap --in " + d1 +
            " --partition \"1,4|2,3\" --resamples 20 --seed 11 --tol 1e-4 "
            "--threads 2 --out " + boot2) == 0);
  CHECK(same_bytes(boot1, boot2));
  const std::string csv = read_text_file(scatter);
  CHECK(csv.rfind("ppt_margin,entanglement,physicality", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

  const std::string gauss = dir.file("gauss.json");
  const std::string qq = dir.file("qq.csv");
  CHECK(run("tomo gauss-test --in " + d1 + " --qq-grid 31 --qq-csv " + qq +
            " --out " + gauss) == 0);
  CHECK(read_text_file(gauss).find("\"p_value\"") != std::string::npos);
  CHECK(read_text_file(qq).rfind("setting,mode,", 0) == 0);

  // Estimate on a rank-deficient plan exits 1.
  const std::string xplan = dir.file("xonly.json");
  write_text_file(xplan,
                  "{\"settings\":[{\"label\":\"x\",\"angles_deg\":[0,0,0,0]},"
                  "{\"label\":\"x2\",\"angles_deg\":[0,0,0,0]}]}");
  const std::string xdata = dir.file("xonly.qds");
  CHECK(run("tomo generate --state " + cov + " --count 4000 --plan " + xplan +
            " --seed 2 --out " + xdata) == 0);
  CHECK(run("tomo estimate --in " + xdata + " --out " + dir.file("no.json")) ==
        1);
}

TEST_CASE("cli: manifest records a rerunnable command") {
  TempDir dir;
  const std::string out = dir.file("walk.json");
  CHECK(run("search --space normal-form --seed 7 --max-steps 2 --tol 1e-4 "
            "--out " + out) == 0);
  const std::string manifest = read_text_file(out + ".manifest.json");
  CHECK(manifest.find("\"command\":\"search\"") != std::string::npos);
  CHECK(manifest.find("\"seed\":7") != std::string::npos);
  CHECK(manifest.find("--max-steps") != std::string::npos);

  // Rerunning the recorded argv reproduces the output bytes.
  const std::string rerun = dir.file("walk2.json");
  CHECK(run("search --space normal-form --seed 7 --max-steps 2 --tol 1e-4 "
            "--out " + rerun) == 0);
  CHECK(same_bytes(out, rerun));
}
