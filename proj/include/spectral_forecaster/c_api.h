#ifndef SPECTRAL_FORECASTER_C_API_H
#define SPECTRAL_FORECASTER_C_API_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SF_BUILDING_LIBRARY)
#    define SF_API __declspec(dllexport)
#  else
#    define SF_API __declspec(dllimport)
#  endif
#else
#  define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_ARGUMENT = 1,
  SF_ERR_CONFIG = 2,
  SF_ERR_DATA = 3,
  SF_ERR_NUMERIC = 4,
  SF_ERR_IO = 5,
  SF_ERR_INTERNAL = 6
} sf_status;

typedef struct sf_experiment sf_experiment;
typedef struct sf_report sf_report;
typedef struct sf_model sf_model;

/* Library version, e.g. "0.1.0". */
SF_API const char* sf_version(void);

/* Message of the last failed call on this thread ("" if none). */
SF_API const char* sf_last_error(void);

/* Caps worker threads for the process (overrides SPECTRAL_FORECASTER_THREADS). */
SF_API sf_status sf_set_max_threads(size_t n);

/* Silences (0) or enables (1) progress messages on stderr. */
SF_API void sf_set_verbose(int enabled);

/* Experiment configuration. */
SF_API sf_status sf_experiment_from_file(const char* path, sf_experiment** out);
SF_API sf_status sf_experiment_from_json(const char* json_text, sf_experiment** out);
SF_API void sf_experiment_destroy(sf_experiment* exp);

SF_API sf_status sf_experiment_set_seed(sf_experiment* exp, uint64_t seed);
SF_API sf_status sf_experiment_set_output_dir(sf_experiment* exp, const char* dir);
/* Comma-separated lists, e.g. "96,192" and "OT,3". */
SF_API sf_status sf_experiment_set_horizons(sf_experiment* exp, const char* list);
SF_API sf_status sf_experiment_set_excluded_channels(sf_experiment* exp, const char* list);
/* Replaces the model settings with the tiny smoke-test preset. */
SF_API sf_status sf_experiment_use_tiny_model(sf_experiment* exp);
/* Effective configuration as JSON; owned by exp, valid until the next call on it. */
SF_API const char* sf_experiment_json(sf_experiment* exp);

/* Commands. Each writes its artifacts under the output directory and, on
   success, returns a report that must be released with sf_report_destroy. */
SF_API sf_status sf_run(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_ablate_layers(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_ablate_alpha(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_ablate_placement(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_export_spectra(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_param_count(sf_experiment* exp, sf_report** out);
SF_API sf_status sf_synth(sf_experiment* exp, sf_report** out);

/* Reports. Strings are owned by the report. */
SF_API const char* sf_report_json(const sf_report* report);
SF_API size_t sf_report_row_count(const sf_report* report);
SF_API sf_status sf_report_row(const sf_report* report, size_t index, const char** setting, size_t* horizon,
                               double* mse, double* mae, size_t* parameters);
SF_API size_t sf_report_file_count(const sf_report* report);
SF_API const char* sf_report_file(const sf_report* report, size_t index);
SF_API void sf_report_destroy(sf_report* report);

/* Trained models. */
SF_API sf_status sf_model_load(const char* checkpoint_path, sf_model** out);
SF_API void sf_model_destroy(sf_model* model);
SF_API sf_status sf_model_shape(const sf_model* model, size_t* lookback, size_t* horizon);
/* input: batch x channels x lookback, row-major; output: batch x channels x horizon. */
SF_API sf_status sf_model_forecast(sf_model* model, const double* input, size_t batch, size_t channels,
                                   double* output);
SF_API sf_status sf_model_parameter_count(const sf_model* model, size_t* count);

#ifdef __cplusplus
}
#endif

#endif
