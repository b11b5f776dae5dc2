#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("scalext_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// runs `scalext run <cfg> --out <dir>` and returns the exit status
int run_cli(const std::string& name, const std::string& config, const std::string& extra = "") {
  const fs::path cfg = scratch() / (name + ".json");
  std::ofstream(cfg) << config;
  const fs::path out = scratch() / name;
  const std::string cmd = std::string("\"") + SCALEXT_CLI_PATH + "\" run \"" + cfg.string() + "\" --out \"" +
                          out.string() + "\" " + extra + " 2>\"" + (scratch() / (name + ".err")).string() + "\"";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted && c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
      out.back() += '"';
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

// first data row of a CSV keyed by header
std::map<std::string, std::string> summary(const std::string& name) {
  std::istringstream in(slurp(scratch() / name / "summary.csv"));
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  const auto h = split_csv(head), r = split_csv(row);
  REQUIRE(h.size() == r.size());
  std::map<std::string, std::string> out;
  for (size_t i = 0; i < h.size(); ++i) out[h[i]] = r[i];
  return out;
}

const char* kExtension = R"({
  "experiment": "extension",
  "chart": {"n": 1, "d": 1},
  "model": {"name": "power_law", "a": 0.5},
  "s": -0.5,
  "cutoffs": [{"a": 0.5, "b": 1.0, "profile": "exp"}, {"a": 0.25, "b": 0.75, "profile": "exp2"}],
  "probes": [{"center": [0.0, 0.0], "radius": [0.5, 0.6]}, {"center": [0.2, 0.1], "radius": [0.4, 0.3]}]
})";

}  // namespace

TEST_CASE("degree experiment on a delta derivative") {
  REQUIRE(run_cli("degree", R"({
    "experiment": "degree",
    "chart": {"n": 0, "d": 1},
    "model": {"name": "delta_derivative", "alpha": [1]}
  })") == 0);
  const auto s = summary("degree");
  const double s_hat = std::stod(s.at("s_hat"));
  CHECK(s_hat >= -2.05);
  CHECK(s_hat <= -1.95);
  CHECK(fs::exists(scratch() / "degree" / "degree_fits.csv"));
  CHECK(fs::exists(scratch() / "degree" / "degree_raw.csv"));
}

TEST_CASE("extension experiment is cutoff independent and reproducible") {
  REQUIRE(run_cli("ext_a", kExtension) == 0);
  REQUIRE(run_cli("ext_b", kExtension, "--threads 2 --verbose") == 0);
  CHECK(std::stod(summary("ext_a").at("max_pairwise_discrepancy")) < 1e-6);
  const std::string a = slurp(scratch() / "ext_a" / "extension.csv");
  CHECK(a == slurp(scratch() / "ext_b" / "extension.csv"));
  CHECK(a.rfind("probe,cutoff,value\n", 0) == 0);
  // 17 significant digits
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const std::string value = line.substr(line.rfind(',') + 1);
  CHECK(std::stod(value) > 0.0);
  CHECK(value.size() >= 17);
  const auto rep = nlohmann::json::parse(slurp(scratch() / "ext_a" / "report.json"));
  CHECK(rep.size() == 2);
}

TEST_CASE("ambiguity, conjugation and product experiments") {
  REQUIRE(run_cli("amb", R"({
    "experiment": "ambiguity",
    "chart": {"n": 1, "d": 1},
    "model": {"name": "power_law", "a": 1.0},
    "s": -1.0,
    "cutoffs": [{"a": 0.5, "b": 1.0}, {"a": 0.25, "b": 0.75}],
    "x_grid": [[0.0], [0.3]]
  })") == 0);
  const auto a = summary("amb");
  CHECK(a.at("rank") == "1");
  CHECK(a.at("equal") == "0");
  CHECK(std::stod(a.at("residual")) < 1e-6);

  REQUIRE(run_cli("conj", R"({
    "experiment": "conjugation",
    "chart": {"n": 0, "d": 1, "half_h": 0.5},
    "euler": ["standard", "logistic"],
    "points": [[0.1], [-0.2]],
    "lambda_grid": [1.0, 0.1, 0.001]
  })") == 0);
  CHECK(std::stod(summary("conj").at("max_relation_error")) < 1e-6);

  REQUIRE(run_cli("prod", R"({
    "experiment": "product",
    "chart": {"n": 0, "d": 1},
    "u1": {"name": "power_law", "a": 0.4},
    "u2": {"name": "power_law", "a": 0.4},
    "s1": -0.4, "s2": -0.4,
    "probes": [{"center": [0.0], "radius": [0.6]}]
  })") == 0);
  CHECK(summary("prod").at("landing") == "1");
}

TEST_CASE("wf experiment") {
  REQUIRE(run_cli("wf", R"({
    "experiment": "wf",
    "chart": {"n": 1, "d": 1},
    "model": {"name": "delta_derivative"},
    "points": [[0.0, 0.0]],
    "directions": [[0, 1], [1, 0]],
    "bound": "conormal_I"
  })") == 0);
  const auto s = summary("wf");
  CHECK(s.at("slow") == "1");
  CHECK(s.at("bound_ok") == "1");
  CHECK(slurp(scratch() / "wf" / "wf.csv").rfind("p0,p1,w0,w1,decay_exponent,slow,ok,amp_k8", 0) == 0);
}

TEST_CASE("errors give machine-readable records and exit codes") {
  CHECK(run_cli("empty_probes", R"({
    "experiment": "degree", "chart": {"n": 0, "d": 1},
    "model": {"name": "delta_derivative"}, "probes": []
  })") == 2);
  const auto rec = nlohmann::json::parse(slurp(scratch() / "empty_probes" / "error.json"));
  CHECK(rec.at("kind") == "config");
  CHECK(run_cli("unknown_key", R"({"experiment": "degree", "chart": {"n": 0, "d": 1},
    "model": {"name": "delta_derivative"}, "colour": 1})") == 2);
  CHECK(run_cli("unknown_model", R"({"experiment": "degree", "chart": {"n": 0, "d": 1},
    "model": {"name": "nope"}})") == 2);
  CHECK(run_cli("bad_json", "{ not json") == 2);
  CHECK(run_cli("bad_kind", R"({"experiment": "dance"})") == 2);
  // δ_I · δ_I is refused
  CHECK(run_cli("refused", R"({
    "experiment": "product", "chart": {"n": 1, "d": 1},
    "u1": {"name": "delta_derivative"}, "u2": {"name": "delta_derivative"},
    "s1": -1, "s2": -1, "g1": "conormal_I", "g2": "conormal_I"
  })") == 3);
  const auto ref = nlohmann::json::parse(slurp(scratch() / "refused" / "error.json"));
  CHECK(ref.at("kind") == "transversality");
  CHECK(ref.at("direction").size() >= 2);
  // the wrong degree makes the shell integral diverge
  CHECK(run_cli("diverges", R"({
    "experiment": "extension", "chart": {"n": 0, "d": 1},
    "model": {"name": "power_law", "a": 1.5}, "s": -0.5,
    "probes": [{"center": [0.0], "radius": [0.6]}]
  })") == 3);
}
