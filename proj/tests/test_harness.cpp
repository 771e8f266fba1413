#include "doctest.h"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spike/errors.hpp"
#include "spike/harness.hpp"
#include "spike/kernels.hpp"

using namespace spike;

namespace {

const std::vector<std::string> kExperiments = {
    "alignment", "esd",     "outliers",      "power",
    "querybound", "twoside", "concentration"};

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("spike-test-" + std::to_string(::getpid()) + "-" + name))
      .string();
}

std::string slurp(const std::string& path) {
  std::ifstream ifs(path, std::ios::binary);
  std::ostringstream ss;
  ss << ifs.rdbuf();
  return ss.str();
}

struct ThreadGuard {
  int saved;
  ThreadGuard() : saved(get_threads()) {}
  ~ThreadGuard() { set_threads(saved); }
};

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full = {"spike"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(full.size());
  for (std::string& s : full) argv.push_back(s.data());

  const std::string out_path = temp_path("cli-stdout.txt");
  const std::string err_path = temp_path("cli-stderr.txt");
  std::fflush(stdout);
  std::fflush(stderr);
  const int saved_out = dup(1);
  const int saved_err = dup(2);
  const int fo = ::open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  const int fe = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  dup2(fo, 1);
  dup2(fe, 2);
  ::close(fo);
  ::close(fe);

  CliResult r;
  r.code = cli(static_cast<int>(argv.size()), argv.data());

  std::fflush(stdout);
  std::fflush(stderr);
  dup2(saved_out, 1);
  dup2(saved_err, 2);
  ::close(saved_out);
  ::close(saved_err);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return r;
}

bool type_matches(const std::string& t, const nlohmann::json& v) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

// Checks the subset of schema constructs the report schema uses: type
// (string or list), required, properties, items.
void check_schema(const nlohmann::json& schema, const nlohmann::json& v,
                  const std::string& where, std::vector<std::string>& errs) {
  if (schema.contains("type")) {
    const nlohmann::json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(t.get<std::string>(), v);
    } else {
      for (const auto& e : t)
        if (type_matches(e.get<std::string>(), v)) {
          ok = true;
          break;
        }
    }
    if (!ok) errs.push_back(where + ": type mismatch");
  }
  if (schema.contains("required") && v.is_object())
    for (const auto& r : schema.at("required"))
      if (!v.contains(r.get<std::string>()))
        errs.push_back(where + ": missing field " + r.get<std::string>());
  if (schema.contains("properties") && v.is_object())
    for (const auto& [key, sub] : schema.at("properties").items())
      if (v.contains(key)) check_schema(sub, v.at(key), where + "." + key, errs);
  if (schema.contains("items") && v.is_array()) {
    std::size_t i = 0;
    for (const auto& e : v)
      check_schema(schema.at("items"), e,
                   where + "[" + std::to_string(i++) + "]", errs);
  }
}

ExperimentConfig tiny_alignment() {
  ExperimentConfig cfg = default_config("alignment");
  cfg.d = 80;
  cfg.trials = 3;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("every default configuration validates") {
  for (const std::string& name : kExperiments) {
    ExperimentConfig cfg = default_config(name);
    CHECK(cfg.experiment == name);
    CHECK_NOTHROW(validate_config(cfg));
  }
  CHECK(error_code([] { default_config("frobnicate"); }) == "config-error");
}

TEST_CASE("configs survive a json round trip byte for byte") {
  ExperimentConfig cfg = default_config("outliers");
  cfg.gap = 0.25;
  cfg.seed = 99;
  cfg.output_dir = "some/dir";
  const std::string text1 = config_json_text(cfg);
  ExperimentConfig back = config_from_json_text(text1);
  CHECK(back.experiment == cfg.experiment);
  CHECK(back.d == cfg.d);
  CHECK(back.r == cfg.r);
  CHECK(back.lambdas == cfg.lambdas);
  CHECK(back.gap == cfg.gap);
  CHECK(back.seed == cfg.seed);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(config_json_text(back) == text1);
}

TEST_CASE("a minimal config inherits experiment defaults") {
  ExperimentConfig cfg = config_from_json_text(R"({"experiment":"esd"})");
  ExperimentConfig want = default_config("esd");
  CHECK(cfg.d == want.d);
  CHECK(cfg.r == want.r);
  CHECK(cfg.lambdas == want.lambdas);

  // Lambdas without an explicit r resize the spike count.
  ExperimentConfig two = config_from_json_text(
      R"({"experiment":"alignment","lambdas":[3.0,2.0]})");
  CHECK(two.r == 2);
}

TEST_CASE("malformed configs name the offending field") {
  auto code = [](const std::string& text) {
    return error_code([&] { config_from_json_text(text); });
  };
  CHECK(code("this is not json") == "config-error");
  CHECK(code("[1,2,3]") == "config-error");
  CHECK(code("{}") == "config-error");
  CHECK(code(R"({"experiment":"alignment","bogus":1})") == "config-error");
  CHECK(code(R"({"experiment":"alignment","d":"big"})") == "config-error");
  CHECK(code(R"({"experiment":"alignment","d":-4})") == "config-error");
  CHECK(code(R"({"experiment":"alignment","d":1})") == "config-error");
  CHECK(code(R"({"experiment":"alignment","entry_law":"cauchy"})") ==
        "config-error");
  CHECK(code(R"({"experiment":"alignment","delta":1.5})") == "config-error");
  CHECK(code(R"({"experiment":"alignment","lambdas":[1.0]})") ==
        "config-error");
  CHECK(code(R"({"experiment":"alignment","lambdas":"2"})") ==
        "config-error");
  CHECK(code(R"({"experiment":"outliers","lambdas":[3.0],"r":2})") ==
        "config-error");
  CHECK(code(R"({"experiment":"outliers","lambdas":[2.0,3.0]})") ==
        "config-error");
  CHECK(code(R"({"experiment":"outliers","gap":0.35})") == "config-error");
  CHECK(code(R"({"experiment":"twoside","trials":1})") == "config-error");
  CHECK(code(R"({"experiment":"power","gap":0.7})") == "config-error");
  CHECK(code(R"({"experiment":"querybound","lambdas":[3.0]})") ==
        "config-error");
  CHECK(code(R"({"experiment":"querybound","delta":0.5})") ==
        "config-error");

  // The message carries the field name, not just a generic complaint.
  try {
    config_from_json_text(R"({"experiment":"alignment","delta":1.5})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
}

TEST_CASE("a missing config file reports its path") {
  const std::string path = temp_path("no-such-config.json");
  try {
    config_from_json_file(path);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.code()) == "io-error");
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}

TEST_CASE("zero trials yield an empty report for every experiment") {
  for (const std::string& name : kExperiments) {
    ExperimentConfig cfg = default_config(name);
    cfg.trials = 0;
    ExperimentReport rep = run(cfg);
    CHECK(rep.trials.empty());
    CHECK(rep.summaries.empty());
    CHECK(rep.criteria.empty());
    CHECK(rep.failed_trials == 0);
  }
}

TEST_CASE("equal configs produce byte-identical report signatures") {
  ExperimentConfig cfg = tiny_alignment();
  ExperimentReport a = run(cfg);
  ExperimentReport b = run(cfg);
  CHECK(report_signature(a) == report_signature(b));
  CHECK(a.wall_time_s >= 0.0);

  ExperimentConfig other = cfg;
  other.seed = 8;
  CHECK(report_signature(run(other)) != report_signature(a));

  // The summary mean round-trips through the metric helper.
  REQUIRE(!a.summaries.empty());
  const MetricSummary& s = a.summaries.front();
  CHECK(metric_mean(a, s.name) == doctest::Approx(s.mean));
  CHECK(std::isnan(metric_mean(a, "no-such-metric")));
}

TEST_CASE("the report does not depend on the worker thread count") {
  ThreadGuard guard;
  ExperimentConfig cfg = tiny_alignment();
  set_threads(1);
  const std::string sig1 = report_signature(run(cfg));
  set_threads(4);
  const std::string sig4 = report_signature(run(cfg));
  CHECK(sig1 == sig4);
}

TEST_CASE("csv trials round-trip through parsing") {
  ExperimentReport rep = run(tiny_alignment());
  const std::string path = temp_path("trials.csv");
  emit_csv(rep, path);
  std::ifstream ifs(path);
  std::string header;
  REQUIRE(std::getline(ifs, header));
  CHECK(header.rfind("trial,ok,error", 0) == 0);
  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    for (int i = 0; i < 3; ++i) std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  for (const TrialRecord& t : rep.trials) {
    std::string line;
    REQUIRE(std::getline(ifs, line));
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    CHECK(cell == std::to_string(t.index));
    std::getline(ss, cell, ',');
    CHECK(cell == (t.ok ? "1" : "0"));
    std::getline(ss, cell, ',');
    for (const std::string& col : columns) {
      std::getline(ss, cell, ',');
      for (const auto& [name, v] : t.metrics)
        if (name == col) CHECK(std::stod(cell) == v);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("report json validates against the published schema") {
  ExperimentReport rep = run(tiny_alignment());
  const std::string path = temp_path("report.json");
  emit_json(rep, path);
  const nlohmann::json doc = nlohmann::json::parse(slurp(path));
  const nlohmann::json schema = nlohmann::json::parse(
      slurp(std::string(SPIKE_SOURCE_DIR) + "/schema/report.schema.json"));
  std::vector<std::string> errs;
  check_schema(schema, doc, "$", errs);
  for (const std::string& e : errs) {
    CAPTURE(e);
    CHECK(false);
  }
  CHECK(errs.empty());
  CHECK(doc.at("config").at("experiment") == "alignment");
  CHECK(doc.at("trials").size() == 3);
  std::filesystem::remove(path);
}

TEST_CASE("scatter svg stays inside its fixed canvas") {
  const std::string path = temp_path("scatter.svg");
  emit_svg_scatter({}, path);
  std::string empty_svg = slurp(path);
  CHECK(empty_svg.find("viewBox=\"0 0 1000 1000\"") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t pos = 0;
       (pos = empty_svg.find("<circle", pos)) != std::string::npos; ++pos)
    ++circles;
  CHECK(circles == 1);  // just the unit-circle overlay

  emit_svg_scatter({cdouble(3.0, 0.0), cdouble(0.0, -3.0), cdouble(0.5, 0.5)},
                   path);
  std::string svg = slurp(path);
  circles = 0;
  for (std::size_t pos = 0;
       (pos = svg.find("<circle", pos)) != std::string::npos; ++pos)
    ++circles;
  CHECK(circles == 4);
  // Every cx/cy coordinate lands inside [0, 1000].
  for (const char* key : {"cx=\"", "cy=\""}) {
    for (std::size_t pos = 0; (pos = svg.find(key, pos)) != std::string::npos;
         ++pos) {
      const double val = std::stod(svg.substr(pos + 4));
      CHECK(val >= 0.0);
      CHECK(val <= 1000.0);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("emitters surface unwritable paths as io errors") {
  ExperimentReport rep = run(tiny_alignment());
  CHECK(error_code([&] {
          emit_json(rep, "/no-such-dir-xyzzy/report.json");
        }) == "io-error");
  CHECK(error_code([&] {
          emit_csv(rep, "/no-such-dir-xyzzy/trials.csv");
        }) == "io-error");
}

TEST_CASE("the cli prints help and rejects junk") {
  CliResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("experiment") != std::string::npos);

  CHECK(run_cli({"--frobnicate"}).code == 1);
  CHECK(run_cli({}).code == 1);
}

TEST_CASE("the cli reports a missing config file with its path") {
  const std::string path = temp_path("nope.json");
  CliResult r = run_cli({"--config", path});
  CHECK(r.code == 1);
  CHECK(r.err.find(path) != std::string::npos);
}

TEST_CASE("the cli rejects a subcommand contradicting the config file") {
  const std::string path = temp_path("align.json");
  {
    std::ofstream ofs(path);
    ofs << R"({"experiment":"alignment","d":80,"trials":1})";
  }
  CliResult r = run_cli({"esd", "--config", path});
  CHECK(r.code == 1);
  CHECK(r.err.find("config-error") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("the THREADS environment variable caps the workers") {
  ThreadGuard guard;
  setenv("THREADS", "3", 1);
  CliResult r = run_cli({"alignment", "--d", "40", "--trials", "1"});
  unsetenv("THREADS");
  CHECK(r.code == 0);
  CHECK(get_threads() == 3);
}

TEST_CASE("check mode exit status mirrors the criteria") {
  ExperimentConfig cfg = default_config("esd");
  cfg.d = 120;
  cfg.trials = 1;
  cfg.seed = 5;
  ExperimentReport rep = run(cfg);
  bool any_fail = false;
  for (const CriterionResult& c : rep.criteria)
    if (!c.passed) any_fail = true;

  CliResult r = run_cli({"esd", "--d", "120", "--trials", "1", "--seed", "5",
                         "--check"});
  CHECK(r.code == (any_fail ? 2 : 0));
  CHECK(r.out.find(any_fail ? "[FAIL]" : "[PASS]") != std::string::npos);

  // Without --check the exit stays 0 either way.
  CliResult plain =
      run_cli({"esd", "--d", "120", "--trials", "1", "--seed", "5"});
  CHECK(plain.code == 0);
}

TEST_CASE("the cli writes the full output bundle") {
  const std::string dir = temp_path("outdir");
  CliResult r = run_cli({"esd", "--d", "100", "--trials", "1", "--seed", "2",
                         "--out", dir});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir + "/esd-report.json"));
  CHECK(std::filesystem::exists(dir + "/esd-trials.csv"));
  CHECK(std::filesystem::exists(dir + "/esd-eigenvalues.svg"));
  std::filesystem::remove_all(dir);
}
