#include "propermap/propermap.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "errors.hpp"
#include "serialize.hpp"
#include "verify.hpp"

using namespace propermap;

struct pm_config {
  driver::RunConfig cfg;
};

struct pm_state {
  driver::RunResult result;
};

namespace {

thread_local std::string g_error;

pm_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::config: return PM_E_CONFIG;
    case ErrorCode::io: return PM_E_IO;
    case ErrorCode::state: return PM_E_STATE;
    case ErrorCode::no_convergence: return PM_E_NO_CONVERGENCE;
    case ErrorCode::certificate_failed:
    case ErrorCode::post_check_failed: return PM_E_CERTIFICATE;
    case ErrorCode::domain: return PM_E_DOMAIN;
    case ErrorCode::validation:
    case ErrorCode::mode:
    case ErrorCode::precondition:
    case ErrorCode::grid_mismatch: return PM_E_ARGUMENT;
    default: return PM_E_INTERNAL;
  }
}

template <class Fn>
pm_status guarded(Fn&& fn) {
  try {
    g_error.clear();
    return fn();
  } catch (const Error& e) {
    g_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_error = e.what();
    return PM_E_INTERNAL;
  }
}

pm_status fail(pm_status s, const char* msg) {
  g_error = msg;
  return s;
}

std::size_t param_index(const pm_state* s, double b) {
  auto i = families::index_of(s->result.state.grid, b, 1e-9);
  if (!i) throw Error(ErrorCode::domain, "parameter value not in the grid");
  return *i;
}

}  // namespace

extern "C" {

const char* pm_version(void) { return io::kVersion; }
const char* pm_last_error(void) { return g_error.c_str(); }
void pm_string_free(char* s) { std::free(s); }

pm_status pm_config_load(const char* path, pm_config** out) {
  if (!path || !out) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = io::read_json_file(path);
    } catch (const Error& e) {
      throw Error(ErrorCode::config, e.what());
    }
    *out = new pm_config{io::config_from_json(j)};
    return PM_OK;
  });
}

pm_status pm_config_parse(const char* text, pm_config** out) {
  if (!text || !out) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::config, std::string("malformed config: ") + e.what());
    }
    *out = new pm_config{io::config_from_json(j)};
    return PM_OK;
  });
}

pm_status pm_config_set_output_dir(pm_config* c, const char* dir) {
  if (!c || !dir) return fail(PM_E_ARGUMENT, "null argument");
  c->cfg.output_dir = dir;
  return PM_OK;
}

const char* pm_config_output_dir(const pm_config* c) { return c ? c->cfg.output_dir.c_str() : ""; }

void pm_config_free(pm_config* c) { delete c; }

pm_status pm_build(const pm_config* c, pm_progress_fn progress, void* user, pm_state** out) {
  if (!c || !out) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    driver::Progress cb;
    if (progress) cb = [progress, user](const std::string& m) { progress(m.c_str(), user); };
    auto* s = new pm_state{driver::run(c->cfg, cb)};
    *out = s;
    if (s->result.ok) return PM_OK;
    g_error = s->result.error;
    return map_code(static_cast<ErrorCode>(s->result.error_code));
  });
}

pm_status pm_state_load(const char* path, pm_state** out) {
  if (!path || !out) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto* s = new pm_state{};
    try {
      s->result.state = io::state_from_json(io::read_json_file(path));
    } catch (...) {
      delete s;
      throw;
    }
    s->result.ok = true;
    *out = s;
    return PM_OK;
  });
}

pm_status pm_state_save(const pm_state* s, const char* path) {
  if (!s || !path) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    if (s->result.state.steps.empty()) throw Error(ErrorCode::state, "no completed steps to save");
    io::write_text_file(path, io::state_to_json(s->result.state).dump(1) + "\n");
    return PM_OK;
  });
}

pm_status pm_manifest_save(const pm_state* s, const char* path) {
  if (!s || !path) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    io::write_text_file(path, io::manifest_json(s->result).dump(1) + "\n");
    return PM_OK;
  });
}

void pm_state_free(pm_state* s) { delete s; }

int pm_state_steps(const pm_state* s) { return s ? s->result.state.n() : 0; }
size_t pm_state_param_count(const pm_state* s) { return s ? s->result.state.grid.size() : 0; }
double pm_state_param(const pm_state* s, size_t i) {
  if (!s || i >= s->result.state.grid.size()) return 0.0;
  return s->result.state.grid.labels[i];
}

pm_status pm_evaluate(const pm_state* s, double b, double re, double im, double out[4], int* certified) {
  if (!s || !out) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto e = driver::evaluate(s->result.state, param_index(s, b), {re, im});
    out[0] = e.f1.real();
    out[1] = e.f1.imag();
    out[2] = e.f2.real();
    out[3] = e.f2.imag();
    if (certified) *certified = e.certified ? 1 : 0;
    return PM_OK;
  });
}

pm_status pm_verify(const pm_state* s, char** report_json, int* passed) {
  if (!s) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto v = verify::verify_state(s->result.state);
    if (passed) *passed = v.passed ? 1 : 0;
    if (report_json) {
      std::string txt = verify::to_json(v).dump(1);
      char* buf = static_cast<char*>(std::malloc(txt.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, txt.c_str(), txt.size() + 1);
      *report_json = buf;
    }
    return PM_OK;
  });
}

pm_status pm_write_samples(const pm_state* s, double b, int resolution, const char* path) {
  if (!s || !path) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    io::write_samples_csv(s->result.state, param_index(s, b), resolution, path);
    return PM_OK;
  });
}

pm_status pm_render(const pm_state* s, const char* what, int n, const char* path) {
  if (!s || !what || !path) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    std::string w = what;
    if (w == "regions") io::write_text_file(path, io::regions_svg(s->result.state, n));
    else if (w == "growth") io::write_text_file(path, io::growth_svg(s->result.state, n));
    else throw Error(ErrorCode::validation, "render target must be 'regions' or 'growth'");
    return PM_OK;
  });
}

pm_status pm_render_region_catalog(int n, const char* path) {
  if (!path) return fail(PM_E_ARGUMENT, "null argument");
  return guarded([&] {
    io::write_text_file(path, io::region_catalog_svg(n));
    return PM_OK;
  });
}

}  // extern "C"
