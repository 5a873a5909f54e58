#include "qdm/qdm.h"

#include "qdm/calibration.hpp"
#include "qdm/commands.hpp"
#include "qdm/config.hpp"
#include "qdm/error.hpp"
#include "qdm/montecarlo.hpp"
#include "qdm/photophysics.hpp"
#include "qdm/scanplan.hpp"
#include "qdm/sensitivity.hpp"
#include "qdm/sequence.hpp"
#include "qdm/text.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct qdm_config {
  qdm::RunConfig value;
};
struct qdm_sweep {
  qdm::SensitivityGrid value;
};
struct qdm_sequence {
  qdm::PulseSequence value;
};
struct qdm_trace {
  qdm::CalibrationTrace value;
};
struct qdm_plan {
  qdm::ScanPlan value;
};

namespace {

thread_local std::string g_last_error;

class InvalidArgument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

qdm_status status_for(qdm::ErrorKind kind) {
  switch (kind) {
    case qdm::ErrorKind::Domain: return QDM_ERR_DOMAIN;
    case qdm::ErrorKind::OutOfRange: return QDM_ERR_OUT_OF_RANGE;
    case qdm::ErrorKind::Index: return QDM_ERR_INDEX;
    case qdm::ErrorKind::Extraction: return QDM_ERR_EXTRACTION;
    case qdm::ErrorKind::Underdetermined: return QDM_ERR_UNDERDETERMINED;
    case qdm::ErrorKind::Config: return QDM_ERR_CONFIG;
    case qdm::ErrorKind::Io: return QDM_ERR_IO;
  }
  return QDM_ERR_INTERNAL;
}

template <typename F>
qdm_status guarded(F&& fn) noexcept {
  try {
    fn();
    return QDM_OK;
  } catch (const qdm::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const InvalidArgument& e) {
    g_last_error = e.what();
    return QDM_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QDM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QDM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return QDM_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* name) {
  if (p == nullptr) throw InvalidArgument(std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qdm::PhotophysicsModel to_model(const qdm_model& m) {
  qdm::PhotophysicsModel out;
  out.init_curve = {m.init_a, m.init_b, m.init_c};
  out.readout_curve = {m.ro_a, m.ro_b, m.ro_c};
  out.i_sat = qdm::Intensity(m.i_sat);
  out.r_max = m.r_max;
  out.c0 = m.c0;
  out.validity = {m.i_valid_min, m.i_valid_max};
  return out;
}

qdm_model from_model(const qdm::PhotophysicsModel& m) {
  return {m.init_curve.a, m.init_curve.b, m.init_curve.c, m.readout_curve.a, m.readout_curve.b, m.readout_curve.c,
          m.i_sat.value(), m.r_max, m.c0, m.validity.lo, m.validity.hi};
}

qdm::ProtocolParams to_params(const qdm_params& p) {
  qdm::ProtocolParams out;
  out.t_init_ls = p.t_init_ls;
  out.t_init_conf = p.t_init_conf;
  out.t_ro_conf = p.t_ro_conf;
  out.t_mw = p.t_mw;
  out.t_d = p.t_d;
  out.t1 = p.t1;
  return out;
}

qdm_params from_params(const qdm::ProtocolParams& p) {
  return {p.t_init_ls, p.t_init_conf, p.t_ro_conf, p.t_mw, p.t_d, p.t1};
}

qdm_eta from_result(const qdm::SensitivityResult& r) {
  return {r.eta_lcqdm, r.eta_leibold, r.eta_conventional, r.ratio_leibold_over_lc, r.ratio_conv_over_lc};
}

qdm::Protocol to_protocol(qdm_protocol p) {
  switch (p) {
    case QDM_PROTOCOL_LCQDM: return qdm::Protocol::LCQDM;
    case QDM_PROTOCOL_LEIBOLD: return qdm::Protocol::Leibold;
    case QDM_PROTOCOL_CONVENTIONAL: return qdm::Protocol::Conventional;
    case QDM_PROTOCOL_CALIBRATION: return qdm::Protocol::Calibration;
  }
  throw InvalidArgument("unknown protocol " + std::to_string(static_cast<int>(p)));
}

qdm::Protocol to_scan_protocol(qdm_protocol p) {
  const auto out = to_protocol(p);
  if (out == qdm::Protocol::Calibration) throw InvalidArgument("calibration is not a scanning protocol");
  return out;
}

qdm_event_kind from_kind(qdm::EventKind k) {
  switch (k) {
    case qdm::EventKind::LightSheetPulse: return QDM_EVENT_LIGHT_SHEET;
    case qdm::EventKind::ConfocalLaserPulse: return QDM_EVENT_CONFOCAL_LASER;
    case qdm::EventKind::MWBlock: return QDM_EVENT_MW_BLOCK;
    case qdm::EventKind::ReadoutWindow: return QDM_EVENT_READOUT;
    case qdm::EventKind::DeadTime: return QDM_EVENT_DEAD_TIME;
  }
  return QDM_EVENT_DEAD_TIME;
}

qdm::ReadoutCriterion to_criterion(qdm_criterion c) {
  switch (c) {
    case QDM_CRITERION_WINDOW_AVERAGE: return qdm::ReadoutCriterion::WindowAverage;
    case QDM_CRITERION_INSTANTANEOUS: return qdm::ReadoutCriterion::Instantaneous;
  }
  throw InvalidArgument("unknown criterion " + std::to_string(static_cast<int>(c)));
}

template <typename T>
void require_handle_out(T** out) {
  require(out, "out");
  *out = nullptr;
}

}  // namespace

extern "C" {

const char* qdm_version(void) { return QDM_VERSION_STRING; }

const char* qdm_last_error(void) { return g_last_error.c_str(); }

const char* qdm_status_name(qdm_status status) {
  switch (status) {
    case QDM_OK: return "ok";
    case QDM_ERR_DOMAIN: return "domain error";
    case QDM_ERR_OUT_OF_RANGE: return "out of range";
    case QDM_ERR_INDEX: return "index error";
    case QDM_ERR_EXTRACTION: return "extraction error";
    case QDM_ERR_UNDERDETERMINED: return "underdetermined";
    case QDM_ERR_CONFIG: return "config error";
    case QDM_ERR_IO: return "I/O error";
    case QDM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QDM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qdm_string_free(char* s) { std::free(s); }

qdm_status qdm_model_default(qdm_model* out) {
  return guarded([&] {
    require(out, "out");
    *out = from_model(qdm::PhotophysicsModel::synthetic_default());
  });
}

qdm_status qdm_model_validate(const qdm_model* model) {
  return guarded([&] {
    require(model, "model");
    to_model(*model).validate();
  });
}

qdm_status qdm_config_parse(const char* text, qdm_config** out) {
  return guarded([&] {
    require_handle_out(out);
    require(text, "text");
    *out = new qdm_config{qdm::parse_config(text)};
  });
}

qdm_status qdm_config_load(const char* path, qdm_config** out) {
  return guarded([&] {
    require_handle_out(out);
    require(path, "path");
    *out = new qdm_config{qdm::load_config(path)};
  });
}

qdm_status qdm_config_serialize(const qdm_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = dup_string(qdm::serialize_config(config->value));
  });
}

int qdm_config_equal(const qdm_config* a, const qdm_config* b) {
  return a != nullptr && b != nullptr && a->value == b->value ? 1 : 0;
}

qdm_status qdm_config_model(const qdm_config* config, qdm_model* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = from_model(config->value.model());
  });
}

qdm_status qdm_config_params(const qdm_config* config, qdm_params* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = from_params(config->value.params());
  });
}

qdm_status qdm_config_intensities(const qdm_config* config, double* i_ls, double* i_conf) {
  return guarded([&] {
    require(config, "config");
    if (i_ls) *i_ls = config->value.light_sheet_intensity().value();
    if (i_conf) *i_conf = config->value.confocal_readout_intensity().value();
  });
}

void qdm_config_free(qdm_config* config) { delete config; }

qdm_status qdm_lightsheet_intensity(double p_ls, double l_y, double d_ls, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = qdm::lightsheet_intensity(p_ls, l_y, d_ls).value();
  });
}

qdm_status qdm_confocal_intensity(double p_conf, double delta_conf, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = qdm::confocal_intensity(p_conf, delta_conf).value();
  });
}

qdm_status qdm_init_time(const qdm_model* model, double intensity, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = qdm::init_time(to_model(*model), qdm::Intensity(intensity));
  });
}

qdm_status qdm_readout_time(const qdm_model* model, double intensity, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = qdm::readout_time(to_model(*model), qdm::Intensity(intensity));
  });
}

qdm_status qdm_photon_flux(const qdm_model* model, double intensity, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = qdm::photon_flux(to_model(*model), qdm::Intensity(intensity));
  });
}

qdm_status qdm_contrast_at_delay(const qdm_model* model, double intensity, double t, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = qdm::contrast_at_delay(to_model(*model), qdm::Intensity(intensity), t);
  });
}

double qdm_endpoint_snr_prefactor(void) { return qdm::endpoint_snr_prefactor(); }

qdm_status qdm_evaluate(const qdm_params* params, qdm_eta* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = from_result(qdm::evaluate_all(to_params(*params)));
  });
}

qdm_status qdm_time_reduction_factor(double eta_ratio, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = qdm::time_reduction_factor(eta_ratio);
  });
}

qdm_status qdm_sweep_run(const qdm_config* config, unsigned workers, qdm_sweep** out) {
  return guarded([&] {
    require_handle_out(out);
    require(config, "config");
    *out = new qdm_sweep{qdm::sweep(config->value.sweep_spec(), workers == 0 ? 1 : workers)};
  });
}

qdm_status qdm_sweep_dims(const qdm_sweep* sweep, size_t* n_t_mw, size_t* n_i_conf) {
  return guarded([&] {
    require(sweep, "sweep");
    if (n_t_mw) *n_t_mw = sweep->value.spec.t_mw_grid.size();
    if (n_i_conf) *n_i_conf = sweep->value.spec.i_conf_grid.size();
  });
}

qdm_status qdm_sweep_cell_at(const qdm_sweep* sweep, size_t t_mw_index, size_t i_conf_index, qdm_sweep_cell* out) {
  return guarded([&] {
    require(sweep, "sweep");
    require(out, "out");
    const auto& c = sweep->value.at(t_mw_index, i_conf_index);
    *out = {c.i_conf, c.t_mw, c.valid ? 1 : 0, from_result(c.result)};
  });
}

qdm_status qdm_sweep_csv(const qdm_sweep* sweep, char** out) {
  return guarded([&] {
    require(sweep, "sweep");
    require(out, "out");
    std::ostringstream s;
    qdm::write_sweep_csv(sweep->value, s);
    *out = dup_string(s.str());
  });
}

void qdm_sweep_free(qdm_sweep* sweep) { delete sweep; }

qdm_status qdm_sequence_build(const qdm_params* params, qdm_protocol protocol, double t_sweep, qdm_sequence** out) {
  return guarded([&] {
    require_handle_out(out);
    require(params, "params");
    const auto p = to_params(*params);
    const auto proto = to_protocol(protocol);
    *out = new qdm_sequence{proto == qdm::Protocol::Calibration ? qdm::build_calibration_sequence(p, t_sweep)
                                                                : qdm::build_cycle(p, proto)};
  });
}

qdm_status qdm_sequence_parse(const char* timeline, qdm_sequence** out) {
  return guarded([&] {
    require_handle_out(out);
    require(timeline, "timeline");
    *out = new qdm_sequence{qdm::parse_timeline(timeline)};
  });
}

size_t qdm_sequence_size(const qdm_sequence* seq) { return seq ? seq->value.events.size() : 0; }

qdm_status qdm_sequence_event(const qdm_sequence* seq, size_t index, qdm_event* out) {
  return guarded([&] {
    require(seq, "seq");
    require(out, "out");
    if (index >= seq->value.events.size()) {
      throw qdm::IndexError("event index " + std::to_string(index) + " out of range");
    }
    const auto& e = seq->value.events[index];
    *out = {from_kind(e.kind), e.start, e.duration, e.voxel ? static_cast<int64_t>(*e.voxel) : -1};
  });
}

qdm_status qdm_sequence_validate(const qdm_sequence* seq, const qdm_params* params, int* valid, char** message) {
  return guarded([&] {
    require(seq, "seq");
    require(params, "params");
    require(valid, "valid");
    const auto report = qdm::validate_sequence(seq->value, to_params(*params));
    *valid = report.valid() ? 1 : 0;
    if (message) *message = dup_string(report.to_string());
  });
}

qdm_status qdm_sequence_duty_cycle(const qdm_sequence* seq, double* out) {
  return guarded([&] {
    require(seq, "seq");
    require(out, "out");
    *out = qdm::duty_cycle(seq->value);
  });
}

qdm_status qdm_sequence_timeline(const qdm_sequence* seq, char** out) {
  return guarded([&] {
    require(seq, "seq");
    require(out, "out");
    *out = dup_string(qdm::to_timeline(seq->value));
  });
}

void qdm_sequence_free(qdm_sequence* seq) { delete seq; }

qdm_status qdm_simulate(const qdm_sim_request* request, qdm_protocol protocol, qdm_sim_result* out) {
  return guarded([&] {
    require(request, "request");
    require(out, "out");
    qdm::SimConfig cfg;
    cfg.params = to_params(request->params);
    cfg.model = to_model(request->model);
    cfg.i_conf = qdm::Intensity(request->i_conf);
    cfg.n_trials = static_cast<std::size_t>(request->n_trials);
    cfg.master_seed = request->seed;
    cfg.noiseless = request->noiseless != 0;
    cfg.null_signal = request->null_signal != 0;
    const auto o = qdm::simulate_protocol(cfg, to_scan_protocol(protocol),
                                          request->workers == 0 ? 1 : request->workers);
    *out = {o.eta_empirical, o.eta_stderr,  o.stderr_available ? 1 : 0, o.readouts_per_cycle,
            o.cycle_time,    o.signal_mean, o.signal_stderr};
  });
}

qdm_status qdm_trace_load(const char* path, double intensity, qdm_trace** out) {
  return guarded([&] {
    require_handle_out(out);
    require(path, "path");
    std::istringstream in(qdm::text::read_file(path));
    *out = new qdm_trace{qdm::read_trace_csv(in, qdm::Intensity(intensity))};
  });
}

qdm_status qdm_trace_simulate(const qdm_model* model, double intensity, size_t points, size_t shots, uint64_t seed,
                              int noiseless, qdm_trace** out) {
  return guarded([&] {
    require_handle_out(out);
    require(model, "model");
    const auto m = to_model(*model);
    const qdm::Intensity i(intensity);
    const auto grid = qdm::calibration_grid(m, i, points);
    *out = new qdm_trace{qdm::simulate_calibration(m, i, grid, shots, seed, noiseless != 0)};
  });
}

size_t qdm_trace_size(const qdm_trace* trace) { return trace ? trace->value.samples.size() : 0; }

qdm_status qdm_trace_extract(const qdm_trace* trace, qdm_criterion criterion, qdm_extraction* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    const auto t = qdm::extract_times(trace->value, to_criterion(criterion));
    *out = {t.t_init, t.t_ro, t.peak_contrast, t.warnings.size()};
  });
}

qdm_status qdm_trace_csv(const qdm_trace* trace, char** out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    std::ostringstream s;
    qdm::write_trace_csv(trace->value, s);
    *out = dup_string(s.str());
  });
}

void qdm_trace_free(qdm_trace* trace) { delete trace; }

qdm_status qdm_fit_log_quadratic(const double* intensities, const double* durations, size_t n, double coeffs[3]) {
  return guarded([&] {
    require(coeffs, "coeffs");
    if (n > 0) {
      require(intensities, "intensities");
      require(durations, "durations");
    }
    std::vector<qdm::CurvePoint> points;
    points.reserve(n);
    for (size_t k = 0; k < n; ++k) points.push_back({qdm::Intensity(intensities[k]), durations[k]});
    const auto c = qdm::fit_log_quadratic(points);
    coeffs[0] = c.a;
    coeffs[1] = c.b;
    coeffs[2] = c.c;
  });
}

qdm_status qdm_plan_build(const qdm_config* config, qdm_protocol protocol, qdm_plan** out) {
  return guarded([&] {
    require_handle_out(out);
    require(config, "config");
    const auto& c = config->value;
    *out = new qdm_plan{qdm::plan_acquisition(c.grid(), c.params(), to_scan_protocol(protocol), c.plan_options())};
  });
}

qdm_status qdm_plan_total_time(const qdm_plan* plan, double* out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    *out = plan->value.total_time;
  });
}

size_t qdm_plan_cycle_count(const qdm_plan* plan) { return plan ? plan->value.cycles.size() : 0; }

qdm_status qdm_plan_csv(const qdm_plan* plan, char** out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    std::ostringstream s;
    qdm::write_plan_csv(plan->value, s);
    *out = dup_string(s.str());
  });
}

qdm_status qdm_plan_rf_csv(const qdm_plan* plan, char** out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    std::ostringstream s;
    qdm::write_rf_csv(plan->value, s);
    *out = dup_string(s.str());
  });
}

void qdm_plan_free(qdm_plan* plan) { delete plan; }

qdm_status qdm_rf_for_voxel(const qdm_config* config, size_t x, size_t y, size_t z, double rf[4]) {
  return guarded([&] {
    require(config, "config");
    require(rf, "rf");
    const auto q = qdm::rf_for_voxel({x, y, z}, config->value.grid(), config->value.aom);
    rf[0] = q.f_scan_x;
    rf[1] = q.f_scan_y;
    rf[2] = q.f_descan_x;
    rf[3] = q.f_descan_y;
  });
}

qdm_status qdm_voxel_for_rf(const qdm_config* config, const double rf[4], size_t z, size_t xyz[3]) {
  return guarded([&] {
    require(config, "config");
    require(rf, "rf");
    require(xyz, "xyz");
    const auto v = qdm::voxel_for_rf({rf[0], rf[1], rf[2], rf[3]}, config->value.grid(), config->value.aom, z);
    xyz[0] = v.x;
    xyz[1] = v.y;
    xyz[2] = v.z;
  });
}

int qdm_run_command(const qdm_command* command, char** summary, char** error) {
  if (summary) *summary = nullptr;
  if (error) *error = nullptr;
  qdm::CommandResult result;
  try {
    if (command == nullptr || command->command == nullptr || command->config_path == nullptr) {
      result.exit_code = qdm::kExitConfig;
      result.error = "command and config_path are required";
    } else {
      qdm::CommandRequest req;
      req.command = command->command;
      req.config_path = command->config_path;
      if (command->out_dir) req.out_dir = command->out_dir;
      if (command->trace_path) req.trace_path = command->trace_path;
      if (command->protocol) req.protocol = command->protocol;
      if (command->criterion) req.criterion = command->criterion;
      if (command->has_seed) req.seed = command->seed;
      if (command->has_trials) req.trials = static_cast<std::size_t>(command->trials);
      if (command->has_intensity) req.intensity = command->intensity;
      req.noiseless = command->noiseless != 0;
      req.workers = command->workers == 0 ? 1 : command->workers;
      result = qdm::run_command(req);
    }
    if (summary) *summary = dup_string(result.summary);
    if (error) *error = dup_string(result.error);
  } catch (...) {
    if (summary) qdm_string_free(*summary), *summary = nullptr;
    return qdm::kExitDomain;
  }
  if (result.exit_code != qdm::kExitOk) g_last_error = result.error;
  return result.exit_code;
}

}  // extern "C"
