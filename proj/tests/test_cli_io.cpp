#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <propermap/propermap.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path workdir() {
  static fs::path d = [] {
    auto p = fs::temp_directory_path() / ("propermap_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

int sh(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " \"" PROPERMAP_CLI "\" " + args + " > /dev/null 2> \"" + (workdir() / "stderr.txt").string() + "\"";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Builds the shared N=2 run once.
const fs::path& built() {
  static fs::path dir = [] {
    auto d = workdir() / "n2";
    put(workdir() / "n2.json", R"({"steps": 2, "param_grid": ["0"], "seed": "2"})");
    int rc = sh("build --config " + (workdir() / "n2.json").string() + " --out " + d.string());
    if (rc != 0) throw std::runtime_error("build failed: " + slurp(workdir() / "stderr.txt"));
    return d;
  }();
  return dir;
}

// Rough well-formedness: balanced element nesting, one svg root.
bool balanced_svg(const std::string& s) {
  if (s.rfind("<svg", 0) != 0) return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '<') continue;
    std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = s.substr(i, j - i + 1);
    if (tag.rfind("</", 0) == 0) --depth;
    else if (tag.size() >= 2 && tag[tag.size() - 2] == '/') {
    } else if (tag.rfind("<?", 0) != 0 && tag.rfind("<!", 0) != 0) ++depth;
    if (depth < 0) return false;
    i = j;
  }
  return depth == 0 && s.find("</svg>") != std::string::npos;
}

}  // namespace

TEST_CASE("bad configurations exit with status 2") {
  put(workdir() / "broken.json", "{ not json");
  CHECK(sh("build --config " + (workdir() / "broken.json").string()) == 2);
  put(workdir() / "unknown.json", R"({"steps": 2, "colour": "blue"})");
  CHECK(sh("build --config " + (workdir() / "unknown.json").string()) == 2);
  put(workdir() / "range.json", R"({"steps": 0})");
  CHECK(sh("build --config " + (workdir() / "range.json").string()) == 2);
  put(workdir() / "grid.json", R"({"param_grid": ["1", "0"]})");
  CHECK(sh("build --config " + (workdir() / "grid.json").string()) == 2);
  CHECK(sh("build --config /nonexistent/config.json") == 2);
  CHECK(sh("frobnicate") == 2);
  CHECK(sh("") == 2);
}

TEST_CASE("build writes a state and a manifest with string reals") {
  auto d = built();
  REQUIRE(fs::exists(d / "state.json"));
  REQUIRE(fs::exists(d / "manifest.json"));
  auto st = json::parse(slurp(d / "state.json"));
  CHECK(st["steps"].size() == 2u);
  CHECK(st["steps"][1]["F1"][0]["coeffs"][0][0].is_string());
  CHECK(st["ledger"][1]["budget"] == "0.5");
  auto man = json::parse(slurp(d / "manifest.json"));
  CHECK(man.contains("certificates"));
  CHECK(man.contains("config"));
}

TEST_CASE("verify exit codes") {
  auto d = built();
  CHECK(sh("verify --state " + (d / "state.json").string() + " --out " + (workdir() / "report.json").string()) == 0);
  auto rep = json::parse(slurp(workdir() / "report.json"));
  CHECK(rep["passed"].get<bool>());

  auto st = json::parse(slurp(d / "state.json"));
  auto& c = st["steps"][1]["F2"][0]["coeffs"][1][0];
  c = std::to_string(std::stod(c.get<std::string>()) + 1.0);
  put(workdir() / "tampered.json", st.dump());
  CHECK(sh("verify --state " + (workdir() / "tampered.json").string()) == 1);

  put(workdir() / "garbage.json", "[1, 2, 3]");
  CHECK(sh("verify --state " + (workdir() / "garbage.json").string()) == 2);
}

TEST_CASE("samples: one row per grid point and H is the real part of F") {
  auto d = built();
  auto csv = workdir() / "s.csv";
  REQUIRE(sh("sample --state " + (d / "state.json").string() + " --param 0 --grid 13 --out " + csv.string()) == 0);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "b,re_z,im_z,re_F1,im_F1,re_F2,im_F2,re_H1,re_H2");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 9u);
    CHECK(v[7] == v[3]);
    CHECK(v[8] == v[5]);
    CHECK(std::fabs(v[1]) <= 2.0);
  }
  CHECK(rows == 13 * 13);
  CHECK(sh("sample --state " + (d / "state.json").string() + " --param 0.5 --out " + csv.string()) != 0);
  CHECK(sh("sample --state " + (d / "state.json").string() + " --param 0 --grid 1 --out " + csv.string()) == 2);
}

TEST_CASE("figures are well-formed SVG") {
  auto d = built();
  for (std::string what : {"regions", "growth"}) {
    auto p = workdir() / (what + ".svg");
    REQUIRE(sh("render --state " + (d / "state.json").string() + " --what " + what + " --n 2 --out " + p.string()) == 0);
    CHECK(balanced_svg(slurp(p)));
  }
  auto cat = workdir() / "catalog.svg";
  REQUIRE(sh("regions --n 2 --out " + cat.string()) == 0);
  auto s = slurp(cat);
  CHECK(balanced_svg(s));
  CHECK(s.find("lblock") != std::string::npos);
  CHECK(sh("render --state " + (d / "state.json").string() + " --what teapot --n 2 --out x.svg") == 2);
}

TEST_CASE("thread count does not change the result") {
  put(workdir() / "grid3.json", R"({"steps": 2, "param_grid": ["0", "0.5", "1"], "seed": "2"})");
  REQUIRE(sh("build --config " + (workdir() / "grid3.json").string() + " --out " + (workdir() / "t1").string(),
             "PROPERMAP_THREADS=1") == 0);
  REQUIRE(sh("build --config " + (workdir() / "grid3.json").string() + " --out " + (workdir() / "t4").string(),
             "PROPERMAP_THREADS=4") == 0);
  auto a = json::parse(slurp(workdir() / "t1" / "state.json"));
  auto b = json::parse(slurp(workdir() / "t4" / "state.json"));
  CHECK(a["steps"] == b["steps"]);
}

TEST_CASE("C API: handles, status codes and evaluation") {
  pm_config* cfg = nullptr;
  CHECK(pm_config_parse("{ nope", &cfg) == PM_E_CONFIG);
  CHECK(std::string(pm_last_error()).size() > 0);
  CHECK(pm_config_parse(R"({"steps": 0})", &cfg) == PM_E_CONFIG);
  CHECK(pm_config_parse(nullptr, &cfg) == PM_E_ARGUMENT);
  REQUIRE(pm_config_parse(R"({"steps": 1})", &cfg) == PM_OK);
  pm_state* st = nullptr;
  REQUIRE(pm_build(cfg, nullptr, nullptr, &st) == PM_OK);
  pm_config_free(cfg);
  CHECK(pm_state_steps(st) == 1);
  CHECK(pm_state_param_count(st) == 1u);
  double out[4];
  int cert = 0;
  REQUIRE(pm_evaluate(st, 0.0, 0.5, 0.5, out, &cert) == PM_OK);
  CHECK(out[0] == 2.0);
  CHECK(out[2] == 2.0);
  CHECK(cert == 1);
  CHECK(pm_evaluate(st, 3.0, 0.5, 0.5, out, &cert) == PM_E_DOMAIN);
  char* report = nullptr;
  int passed = 0;
  REQUIRE(pm_verify(st, &report, &passed) == PM_OK);
  CHECK(passed == 1);
  CHECK(json::parse(report)["passed"].get<bool>());
  pm_string_free(report);
  CHECK(pm_render(st, "teapot", 1, (workdir() / "x.svg").string().c_str()) == PM_E_ARGUMENT);
  pm_state_free(st);

  pm_state* none = nullptr;
  CHECK(pm_state_load((workdir() / "missing.json").string().c_str(), &none) == PM_E_IO);
  CHECK(std::string(pm_version()).size() > 0);
}
