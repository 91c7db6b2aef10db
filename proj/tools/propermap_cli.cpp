#include <propermap/propermap.h>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

namespace {

int report(pm_status st, const char* what) {
  std::cerr << "propermap: " << what << ": " << pm_last_error() << "\n";
  return st == PM_E_CONFIG ? 2 : 1;
}

int do_build(const std::string& config_path, const std::string& out_dir) {
  pm_config* cfg = nullptr;
  pm_status st = pm_config_load(config_path.c_str(), &cfg);
  if (st != PM_OK) return report(st, "config");
  if (!out_dir.empty()) pm_config_set_output_dir(cfg, out_dir.c_str());
  fs::path dir = pm_config_output_dir(cfg);
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);

  pm_state* state = nullptr;
  st = pm_build(
      cfg, [](const char* msg, void*) { std::cerr << msg << "\n"; }, nullptr, &state);
  pm_config_free(cfg);
  int code = 0;
  if (st != PM_OK) {
    std::cerr << "propermap: build aborted: " << pm_last_error() << "\n";
    code = st == PM_E_CONFIG ? 2 : 3;
  }
  if (state) {
    if (pm_state_steps(state) > 0 && pm_state_save(state, (dir / "state.json").string().c_str()) != PM_OK)
      code = report(PM_E_IO, "state.json");
    if (pm_manifest_save(state, (dir / "manifest.json").string().c_str()) != PM_OK)
      code = report(PM_E_IO, "manifest.json");
    std::cout << "completed steps: " << pm_state_steps(state) << "\n";
    pm_state_free(state);
  }
  return code;
}

pm_state* load_state(const std::string& path, int& code) {
  pm_state* s = nullptr;
  pm_status st = pm_state_load(path.c_str(), &s);
  if (st != PM_OK) {
    report(st, "state");
    code = 2;
    return nullptr;
  }
  return s;
}

int do_verify(const std::string& state_path, const std::string& out) {
  int code = 0;
  pm_state* s = load_state(state_path, code);
  if (!s) return code;
  char* json = nullptr;
  int passed = 0;
  pm_status st = pm_verify(s, &json, &passed);
  pm_state_free(s);
  if (st != PM_OK) {
    report(st, "verify");
    return 2;
  }
  if (out.empty()) {
    std::cout << json << "\n";
  } else {
    FILE* f = std::fopen(out.c_str(), "w");
    if (!f) {
      pm_string_free(json);
      std::cerr << "propermap: cannot write " << out << "\n";
      return 2;
    }
    std::fputs(json, f);
    std::fputs("\n", f);
    std::fclose(f);
  }
  pm_string_free(json);
  std::cerr << (passed ? "verify: all checks passed" : "verify: FAILED") << "\n";
  return passed ? 0 : 1;
}

int do_sample(const std::string& state_path, double b, int grid, const std::string& out) {
  int code = 0;
  pm_state* s = load_state(state_path, code);
  if (!s) return code;
  pm_status st = pm_write_samples(s, b, grid, out.c_str());
  pm_state_free(s);
  return st == PM_OK ? 0 : report(st, "sample");
}

int do_render(const std::string& state_path, const std::string& what, int n, const std::string& out) {
  int code = 0;
  pm_state* s = load_state(state_path, code);
  if (!s) return code;
  pm_status st = pm_render(s, what.c_str(), n, out.c_str());
  pm_state_free(s);
  return st == PM_OK ? 0 : report(st, "render");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inductive construction of proper holomorphic maps on a parameter grid"};
  app.set_version_flag("--version", std::string(pm_version()));
  app.require_subcommand(1);

  std::string config, state, out, what = "regions";
  double param = 0.0;
  int grid = 101, n = 1;

  auto* build = app.add_subcommand("build", "run the construction and write state.json and manifest.json");
  build->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  build->add_option("--out", out, "output directory (overrides output_dir)");

  auto* verify = app.add_subcommand("verify", "recheck every certificate of a saved state");
  verify->add_option("--state", state)->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out, "write the JSON report here instead of stdout");

  auto* sample = app.add_subcommand("sample", "tabulate F and its harmonic parts on a square grid");
  sample->add_option("--state", state)->required()->check(CLI::ExistingFile);
  sample->add_option("--param", param, "parameter value b (must be in the grid)")->required();
  sample->add_option("--grid", grid, "points per side")->check(CLI::Range(2, 4000));
  sample->add_option("--out", out)->required();

  auto* render = app.add_subcommand("render", "draw the region decomposition or the growth picture");
  render->add_option("--state", state)->required()->check(CLI::ExistingFile);
  render->add_option("--what", what)->check(CLI::IsMember({"regions", "growth"}));
  render->add_option("--n", n)->required();
  render->add_option("--out", out)->required();

  auto* regions = app.add_subcommand("regions", "draw every region kind at one index");
  regions->add_option("--n", n)->required();
  regions->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*build) return do_build(config, out);
  if (*verify) return do_verify(state, out);
  if (*sample) return do_sample(state, param, grid, out);
  if (*render) return do_render(state, what, n, out);
  if (*regions) {
    pm_status st = pm_render_region_catalog(n, out.c_str());
    return st == PM_OK ? 0 : report(st, "regions");
  }
  return 2;
}
