#ifndef QDM_QDM_H
#define QDM_QDM_H

/* C interface to the QDM protocol simulator.
 *
 * Every fallible call returns a qdm_status; on failure qdm_last_error()
 * describes the problem (thread-local, valid until the next failing call on
 * the same thread). Handles are opaque and released with their _free
 * function. Strings returned through char** are released with
 * qdm_string_free. Units: us, um, mW, mW/um^2, counts/us, MHz. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(QDM_BUILDING_LIBRARY)
#define QDM_API __declspec(dllexport)
#else
#define QDM_API __declspec(dllimport)
#endif
#else
#define QDM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qdm_status {
  QDM_OK = 0,
  QDM_ERR_DOMAIN = 1,
  QDM_ERR_OUT_OF_RANGE = 2,
  QDM_ERR_INDEX = 3,
  QDM_ERR_EXTRACTION = 4,
  QDM_ERR_UNDERDETERMINED = 5,
  QDM_ERR_CONFIG = 6,
  QDM_ERR_IO = 7,
  QDM_ERR_INVALID_ARGUMENT = 8,
  QDM_ERR_INTERNAL = 9
} qdm_status;

typedef enum qdm_protocol {
  QDM_PROTOCOL_LCQDM = 0,
  QDM_PROTOCOL_LEIBOLD = 1,
  QDM_PROTOCOL_CONVENTIONAL = 2,
  QDM_PROTOCOL_CALIBRATION = 3
} qdm_protocol;

typedef enum qdm_event_kind {
  QDM_EVENT_LIGHT_SHEET = 0,
  QDM_EVENT_CONFOCAL_LASER = 1,
  QDM_EVENT_MW_BLOCK = 2,
  QDM_EVENT_READOUT = 3,
  QDM_EVENT_DEAD_TIME = 4
} qdm_event_kind;

typedef enum qdm_criterion {
  QDM_CRITERION_WINDOW_AVERAGE = 0,
  QDM_CRITERION_INSTANTANEOUS = 1
} qdm_criterion;

QDM_API const char* qdm_version(void);
QDM_API const char* qdm_last_error(void);
QDM_API const char* qdm_status_name(qdm_status status);
QDM_API void qdm_string_free(char* s);

/* ---- plain data ---- */

typedef struct qdm_model {
  double init_a, init_b, init_c; /* log10 t_init = a + b x + c x^2, x = log10 I */
  double ro_a, ro_b, ro_c;
  double i_sat;
  double r_max;
  double c0;
  double i_valid_min, i_valid_max;
} qdm_model;

typedef struct qdm_params {
  double t_init_ls;
  double t_init_conf;
  double t_ro_conf;
  double t_mw;
  double t_d;
  double t1;
} qdm_params;

typedef struct qdm_eta {
  double eta_lcqdm;
  double eta_leibold;
  double eta_conventional;
  double ratio_leibold_over_lc;
  double ratio_conv_over_lc;
} qdm_eta;

/* Synthetic default photophysics model. */
QDM_API qdm_status qdm_model_default(qdm_model* out);
QDM_API qdm_status qdm_model_validate(const qdm_model* model);

/* ---- config ---- */

typedef struct qdm_config qdm_config;

QDM_API qdm_status qdm_config_parse(const char* text, qdm_config** out);
QDM_API qdm_status qdm_config_load(const char* path, qdm_config** out);
QDM_API qdm_status qdm_config_serialize(const qdm_config* config, char** out);
/* 1 when equal, 0 otherwise (including NULL arguments). */
QDM_API int qdm_config_equal(const qdm_config* a, const qdm_config* b);
QDM_API qdm_status qdm_config_model(const qdm_config* config, qdm_model* out);
/* Operating-point timing. */
QDM_API qdm_status qdm_config_params(const qdm_config* config, qdm_params* out);
QDM_API qdm_status qdm_config_intensities(const qdm_config* config, double* i_ls, double* i_conf);
QDM_API void qdm_config_free(qdm_config* config);

/* ---- photophysics ---- */

QDM_API qdm_status qdm_lightsheet_intensity(double p_ls, double l_y, double d_ls, double* out);
QDM_API qdm_status qdm_confocal_intensity(double p_conf, double delta_conf, double* out);
QDM_API qdm_status qdm_init_time(const qdm_model* model, double intensity, double* out);
QDM_API qdm_status qdm_readout_time(const qdm_model* model, double intensity, double* out);
QDM_API qdm_status qdm_photon_flux(const qdm_model* model, double intensity, double* out);
QDM_API qdm_status qdm_contrast_at_delay(const qdm_model* model, double intensity, double t, double* out);

/* ---- sensitivity ---- */

QDM_API double qdm_endpoint_snr_prefactor(void);
QDM_API qdm_status qdm_evaluate(const qdm_params* params, qdm_eta* out);
QDM_API qdm_status qdm_time_reduction_factor(double eta_ratio, double* out);

typedef struct qdm_sweep qdm_sweep;

typedef struct qdm_sweep_cell {
  double i_conf;
  double t_mw;
  int valid;
  qdm_eta eta;
} qdm_sweep_cell;

QDM_API qdm_status qdm_sweep_run(const qdm_config* config, unsigned workers, qdm_sweep** out);
QDM_API qdm_status qdm_sweep_dims(const qdm_sweep* sweep, size_t* n_t_mw, size_t* n_i_conf);
QDM_API qdm_status qdm_sweep_cell_at(const qdm_sweep* sweep, size_t t_mw_index, size_t i_conf_index,
                                     qdm_sweep_cell* out);
QDM_API qdm_status qdm_sweep_csv(const qdm_sweep* sweep, char** out);
QDM_API void qdm_sweep_free(qdm_sweep* sweep);

/* ---- sequence ---- */

typedef struct qdm_sequence qdm_sequence;

typedef struct qdm_event {
  qdm_event_kind kind;
  double start;
  double duration;
  int64_t voxel; /* -1 when the event is not tied to a voxel */
} qdm_event;

/* t_sweep is used by QDM_PROTOCOL_CALIBRATION only. */
QDM_API qdm_status qdm_sequence_build(const qdm_params* params, qdm_protocol protocol, double t_sweep,
                                      qdm_sequence** out);
QDM_API qdm_status qdm_sequence_parse(const char* timeline, qdm_sequence** out);
QDM_API size_t qdm_sequence_size(const qdm_sequence* seq);
QDM_API qdm_status qdm_sequence_event(const qdm_sequence* seq, size_t index, qdm_event* out);
/* *valid is 1 or 0; *message (may be NULL) receives the report text. */
QDM_API qdm_status qdm_sequence_validate(const qdm_sequence* seq, const qdm_params* params, int* valid,
                                         char** message);
QDM_API qdm_status qdm_sequence_duty_cycle(const qdm_sequence* seq, double* out);
QDM_API qdm_status qdm_sequence_timeline(const qdm_sequence* seq, char** out);
QDM_API void qdm_sequence_free(qdm_sequence* seq);

/* ---- Monte Carlo ---- */

typedef struct qdm_sim_request {
  qdm_params params;
  qdm_model model;
  double i_conf;
  uint64_t n_trials;
  uint64_t seed;
  int noiseless;
  int null_signal;
  unsigned workers;
} qdm_sim_request;

typedef struct qdm_sim_result {
  double eta_empirical;
  double eta_stderr; /* NaN when stderr_available is 0 */
  int stderr_available;
  size_t readouts_per_cycle;
  double cycle_time;
  double signal_mean;
  double signal_stderr;
} qdm_sim_result;

QDM_API qdm_status qdm_simulate(const qdm_sim_request* request, qdm_protocol protocol, qdm_sim_result* out);

/* ---- calibration ---- */

typedef struct qdm_trace qdm_trace;

typedef struct qdm_extraction {
  double t_init;
  double t_ro;
  double peak_contrast;
  size_t warning_count;
} qdm_extraction;

QDM_API qdm_status qdm_trace_load(const char* path, double intensity, qdm_trace** out);
QDM_API qdm_status qdm_trace_simulate(const qdm_model* model, double intensity, size_t points, size_t shots,
                                      uint64_t seed, int noiseless, qdm_trace** out);
QDM_API size_t qdm_trace_size(const qdm_trace* trace);
QDM_API qdm_status qdm_trace_extract(const qdm_trace* trace, qdm_criterion criterion, qdm_extraction* out);
QDM_API qdm_status qdm_trace_csv(const qdm_trace* trace, char** out);
QDM_API void qdm_trace_free(qdm_trace* trace);

/* coeffs receives {a, b, c} of log10 t = a + b x + c x^2. */
QDM_API qdm_status qdm_fit_log_quadratic(const double* intensities, const double* durations, size_t n,
                                         double coeffs[3]);

/* ---- scan planning ---- */

typedef struct qdm_plan qdm_plan;

QDM_API qdm_status qdm_plan_build(const qdm_config* config, qdm_protocol protocol, qdm_plan** out);
QDM_API qdm_status qdm_plan_total_time(const qdm_plan* plan, double* out);
QDM_API size_t qdm_plan_cycle_count(const qdm_plan* plan);
QDM_API qdm_status qdm_plan_csv(const qdm_plan* plan, char** out);
QDM_API qdm_status qdm_plan_rf_csv(const qdm_plan* plan, char** out);
QDM_API void qdm_plan_free(qdm_plan* plan);

/* rf receives {f_scan_x, f_scan_y, f_descan_x, f_descan_y} in MHz. */
QDM_API qdm_status qdm_rf_for_voxel(const qdm_config* config, size_t x, size_t y, size_t z, double rf[4]);
QDM_API qdm_status qdm_voxel_for_rf(const qdm_config* config, const double rf[4], size_t z, size_t xyz[3]);

/* ---- batch commands ---- */

typedef struct qdm_command {
  const char* command; /* eval, sweep, simulate, calibrate, plan, trace */
  const char* config_path;
  const char* out_dir;    /* NULL: config output_dir */
  const char* trace_path; /* calibrate */
  const char* protocol;   /* NULL: all scanning protocols */
  const char* criterion;  /* NULL: window */
  int has_seed;
  uint64_t seed;
  int has_trials;
  uint64_t trials;
  int has_intensity;
  double intensity;
  int noiseless;
  unsigned workers; /* 0 is treated as 1 */
} qdm_command;

/* Returns the process exit code: 0 ok, 1 config/usage, 2 domain/numeric,
 * 3 I/O. summary and error (either may be NULL) receive owned strings. */
QDM_API int qdm_run_command(const qdm_command* command, char** summary, char** error);

#ifdef __cplusplus
}
#endif

#endif /* QDM_QDM_H */
