#include "qdm/commands.hpp"

#include "qdm/calibration.hpp"
#include "qdm/config.hpp"
#include "qdm/error.hpp"
#include "qdm/montecarlo.hpp"
#include "qdm/scanplan.hpp"
#include "qdm/sensitivity.hpp"
#include "qdm/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <sstream>

namespace qdm {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

struct Run {
  const CommandRequest& req;
  RunConfig cfg;
  std::vector<std::pair<std::string, std::string>> inputs;  // name, sha256
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<OutputFile> outputs;
  std::string summary;

  void kv(std::string_view key, const std::string& value) {
    summary += key;
    summary += " = ";
    summary += value;
    summary += '\n';
  }
};

std::string kv_line(std::string_view key, const std::string& value) {
  std::string s(key);
  s += " = ";
  s += value;
  s += '\n';
  return s;
}

std::vector<Protocol> selected_protocols(const CommandRequest& req) {
  if (!req.protocol) return {Protocol::LCQDM, Protocol::Leibold, Protocol::Conventional};
  Protocol p;
  try {
    p = parse_protocol(*req.protocol);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (p == Protocol::Calibration) throw UsageError("--protocol calibration is not a scanning protocol");
  return {p};
}

std::string lower_name(Protocol p) {
  std::string s(to_string(p));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Intensity trace_intensity(const Run& run) {
  return run.req.intensity ? Intensity(*run.req.intensity) : run.cfg.confocal_readout_intensity();
}

void cmd_eval(Run& run) {
  const auto p = run.cfg.params();
  const auto r = evaluate_all(p);
  std::string out;
  out += kv_line("i_ls_mw_per_um2", text::format_double(run.cfg.light_sheet_intensity().value()));
  out += kv_line("i_conf_mw_per_um2", text::format_double(run.cfg.confocal_readout_intensity().value()));
  out += kv_line("t_init_ls_us", text::format_double(p.t_init_ls));
  out += kv_line("t_init_conf_us", text::format_double(p.t_init_conf));
  out += kv_line("t_ro_conf_us", text::format_double(p.t_ro_conf));
  out += kv_line("t_mw_us", text::format_double(p.t_mw));
  out += kv_line("t_d_us", text::format_double(p.t_d));
  out += kv_line("t1_us", text::format_double(p.t1));
  out += kv_line("eta_lcqdm_sqrt_us", text::format_double(r.eta_lcqdm));
  out += kv_line("eta_leibold_sqrt_us", text::format_double(r.eta_leibold));
  out += kv_line("eta_conventional_sqrt_us", text::format_double(r.eta_conventional));
  out += kv_line("ratio_leibold_over_lc", text::format_double(r.ratio_leibold_over_lc));
  out += kv_line("ratio_conv_over_lc", text::format_double(r.ratio_conv_over_lc));
  out += kv_line("time_reduction_vs_leibold", text::format_double(time_reduction_factor(r.ratio_leibold_over_lc)));
  out += kv_line("time_reduction_vs_conv", text::format_double(time_reduction_factor(r.ratio_conv_over_lc)));
  run.summary += out;
  run.outputs.push_back({"eval.txt", std::move(out)});
}

void cmd_sweep(Run& run) {
  const auto grid = sweep(run.cfg.sweep_spec(), run.req.workers);
  std::ostringstream csv;
  write_sweep_csv(grid, csv);
  run.outputs.push_back({"sweep.csv", csv.str()});
  run.outputs.push_back({"ratio_leibold_over_lc.pgm", ratio_heatmap_pgm(grid, RatioMap::LeiboldOverLc)});
  run.outputs.push_back({"ratio_conv_over_lc.pgm", ratio_heatmap_pgm(grid, RatioMap::ConvOverLc)});
  run.kv("cells", std::to_string(grid.cells.size()));
  run.kv("valid_cells", std::to_string(grid.valid_count()));
}

void cmd_simulate(Run& run) {
  SimConfig sc;
  sc.params = run.cfg.params();
  sc.model = run.cfg.model();
  sc.i_conf = run.cfg.confocal_readout_intensity();
  sc.n_trials = run.cfg.trials;
  sc.master_seed = run.cfg.seed;
  sc.noiseless = run.req.noiseless;
  const auto analytic = evaluate_all(sc.params);
  for (const auto protocol : selected_protocols(run.req)) {
    const auto outcome = simulate_protocol(sc, protocol, run.req.workers);
    const double eta = protocol == Protocol::LCQDM     ? analytic.eta_lcqdm
                       : protocol == Protocol::Leibold ? analytic.eta_leibold
                                                       : analytic.eta_conventional;
    std::string report = format_sim_report(sc, protocol, outcome);
    report += kv_line("eta_analytic_sqrt_us", text::format_double(eta));
    report += kv_line("relative_deviation", text::format_double((outcome.eta_empirical - eta) / eta));
    run.kv(std::string(to_string(protocol)) + ".eta_empirical", text::format_double(outcome.eta_empirical));
    run.kv(std::string(to_string(protocol)) + ".eta_analytic", text::format_double(eta));
    run.outputs.push_back({"simulate_" + lower_name(protocol) + ".txt", std::move(report)});
  }
}

void cmd_trace(Run& run) {
  const auto i = trace_intensity(run);
  const auto model = run.cfg.model();
  const auto grid = calibration_grid(model, i, run.cfg.trace_points);
  const auto trace = simulate_calibration(model, i, grid, run.cfg.shots, run.cfg.seed, run.req.noiseless);
  std::ostringstream csv;
  write_trace_csv(trace, csv);
  run.outputs.push_back({"trace.csv", csv.str()});
  run.kv("intensity_mw_per_um2", text::format_double(i.value()));
  run.kv("points", std::to_string(trace.samples.size()));
}

void cmd_calibrate(Run& run) {
  if (!run.req.trace_path) throw UsageError("calibrate needs --trace");
  ReadoutCriterion criterion;
  if (run.req.criterion == "window") {
    criterion = ReadoutCriterion::WindowAverage;
  } else if (run.req.criterion == "instantaneous") {
    criterion = ReadoutCriterion::Instantaneous;
  } else {
    throw UsageError("unknown criterion '" + run.req.criterion + "' (window, instantaneous)");
  }
  const std::string data = text::read_file(*run.req.trace_path);
  run.inputs.emplace_back("trace", text::sha256_hex(data));
  std::istringstream in(data);
  const auto trace = read_trace_csv(in, trace_intensity(run));
  const auto times = extract_times(trace, criterion);
  std::string report = format_extraction_report(trace, times, criterion);
  run.summary += report;
  run.outputs.push_back({"calibration.txt", std::move(report)});
}

void cmd_plan(Run& run) {
  const auto p = run.cfg.params();
  const auto grid = run.cfg.grid();
  const auto options = run.cfg.plan_options();
  for (const auto protocol : selected_protocols(run.req)) {
    const auto plan = plan_acquisition(grid, p, protocol, options);
    std::ostringstream csv;
    write_plan_csv(plan, csv);
    run.outputs.push_back({"plan_" + lower_name(protocol) + ".csv", csv.str()});
    std::ostringstream rf;
    write_rf_csv(plan, rf);
    run.outputs.push_back({"rf_" + lower_name(protocol) + ".csv", rf.str()});
    run.kv(std::string(to_string(protocol)) + ".total_time_us", text::format_double(plan.total_time));
  }
  std::string report = format_speedup_report(grid, speedup_report(grid, p, options));
  run.summary += report;
  run.outputs.push_back({"speedup.txt", std::move(report)});
}

constexpr std::array<std::pair<std::string_view, void (*)(Run&)>, 6> kCommands = {{
    {"eval", cmd_eval},
    {"sweep", cmd_sweep},
    {"simulate", cmd_simulate},
    {"calibrate", cmd_calibrate},
    {"plan", cmd_plan},
    {"trace", cmd_trace},
}};

std::string manifest(const Run& run, const std::string& config_digest) {
  std::string m;
  m += kv_line("command", run.req.command);
  m += kv_line("version", std::string(version()));
  m += kv_line("config_sha256", config_digest);
  for (const auto& [name, digest] : run.inputs) m += kv_line(name + "_sha256", digest);
  m += kv_line("seed", std::to_string(run.cfg.seed));
  m += kv_line("trials", std::to_string(run.cfg.trials));
  for (const auto& [key, value] : run.settings) m += kv_line(key, value);
  for (const auto& f : run.outputs) m += kv_line("output " + f.name, text::sha256_hex(f.contents));
  return m;
}

void write_outputs(Run& run, CommandResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(run.cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  // Canonical resolved config, without the output location.
  RunConfig hashed = run.cfg;
  hashed.output_dir.clear();
  const std::string digest = text::sha256_hex(serialize_config(hashed));
  run.outputs.push_back({run.req.command + ".manifest", manifest(run, digest)});
  for (const auto& f : run.outputs) {
    const auto path = (dir / f.name).string();
    text::write_file(path, f.contents);
    result.files.push_back(path);
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io: return kExitIo;
    default: return kExitDomain;
  }
}

}  // namespace

std::string_view version() noexcept { return QDM_VERSION_STRING; }

CommandResult run_command(const CommandRequest& req) {
  CommandResult result;
  try {
    const auto it = std::find_if(kCommands.begin(), kCommands.end(),
                                 [&](const auto& c) { return c.first == req.command; });
    if (it == kCommands.end()) throw UsageError("unknown command '" + req.command + "'");
    if (req.workers == 0) throw UsageError("workers must be >= 1");
    if (req.trials && *req.trials == 0) throw UsageError("trials must be >= 1");

    Run run{req, load_config(req.config_path), {}, {}, {}, {}};
    if (req.out_dir) run.cfg.output_dir = *req.out_dir;
    if (req.seed) run.cfg.seed = *req.seed;
    if (req.trials) run.cfg.trials = *req.trials;
    if (req.protocol) run.settings.emplace_back("protocol", *req.protocol);
    if (req.intensity) run.settings.emplace_back("intensity_mw_per_um2", text::format_double(*req.intensity));
    if (req.command == "calibrate") run.settings.emplace_back("criterion", req.criterion);
    if (req.noiseless) run.settings.emplace_back("noiseless", "true");

    it->second(run);
    write_outputs(run, result);
    result.summary = std::move(run.summary);
  } catch (const UsageError& e) {
    result.exit_code = kExitConfig;
    result.error = e.what();
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.kind());
    result.error = e.what();
  } catch (const std::bad_alloc&) {
    result.exit_code = kExitDomain;
    result.error = "out of memory";
  } catch (const std::exception& e) {
    result.exit_code = kExitDomain;
    result.error = e.what();
  }
  if (result.exit_code != kExitOk) result.files.clear();
  return result;
}

}  // namespace qdm
