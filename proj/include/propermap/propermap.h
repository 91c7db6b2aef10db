#ifndef PROPERMAP_PROPERMAP_H
#define PROPERMAP_PROPERMAP_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(PROPERMAP_BUILDING)
#    define PM_API __declspec(dllexport)
#  else
#    define PM_API __declspec(dllimport)
#  endif
#else
#  define PM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pm_config pm_config;
typedef struct pm_state pm_state;

typedef enum pm_status {
  PM_OK = 0,
  PM_E_ARGUMENT = 1,
  PM_E_CONFIG = 2,
  PM_E_IO = 3,
  PM_E_STATE = 4,
  PM_E_NO_CONVERGENCE = 5,
  PM_E_CERTIFICATE = 6,
  PM_E_DOMAIN = 7,
  PM_E_INTERNAL = 8
} pm_status;

typedef void (*pm_progress_fn)(const char* message, void* user);

PM_API const char* pm_version(void);
/* Message of the last failed call on this thread; never NULL. */
PM_API const char* pm_last_error(void);
PM_API void pm_string_free(char* s);

PM_API pm_status pm_config_load(const char* path, pm_config** out);
PM_API pm_status pm_config_parse(const char* json_text, pm_config** out);
PM_API pm_status pm_config_set_output_dir(pm_config* c, const char* dir);
PM_API const char* pm_config_output_dir(const pm_config* c);
PM_API void pm_config_free(pm_config* c);

/* Runs the construction. On a step abort the call still returns the partial
   state in *out (with the completed steps) together with the error status. */
PM_API pm_status pm_build(const pm_config* c, pm_progress_fn progress, void* user, pm_state** out);

PM_API pm_status pm_state_load(const char* path, pm_state** out);
PM_API pm_status pm_state_save(const pm_state* s, const char* path);
PM_API pm_status pm_manifest_save(const pm_state* s, const char* path);
PM_API void pm_state_free(pm_state* s);

PM_API int pm_state_steps(const pm_state* s);
PM_API size_t pm_state_param_count(const pm_state* s);
PM_API double pm_state_param(const pm_state* s, size_t index);

/* out = {Re F1, Im F1, Re F2, Im F2}; *certified is 1 when |z| <= N. */
PM_API pm_status pm_evaluate(const pm_state* s, double b, double re, double im, double out[4], int* certified);

/* Report is a JSON document owned by the caller (free with pm_string_free). */
PM_API pm_status pm_verify(const pm_state* s, char** report_json, int* passed);

PM_API pm_status pm_write_samples(const pm_state* s, double b, int resolution, const char* csv_path);
/* what is "regions" or "growth". */
PM_API pm_status pm_render(const pm_state* s, const char* what, int n, const char* svg_path);
/* Catalogue of every region kind at index n. */
PM_API pm_status pm_render_region_catalog(int n, const char* svg_path);

#ifdef __cplusplus
}
#endif

#endif
