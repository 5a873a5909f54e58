// qdmsim: batch front end over the qdm C API.

#include "qdm/qdm.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> trace;
  std::optional<std::string> protocol;
  std::optional<double> intensity;
  std::string criterion = "window";
  bool noiseless = false;
  bool quiet = false;
  unsigned workers = 1;
};

struct Owned {
  char* s = nullptr;
  ~Owned() { qdm_string_free(s); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and compare confocal NV-diamond microscope scanning protocols"};
  app.set_version_flag("--version", std::string(qdm_version()));
  app.require_subcommand(1);

  Options opt;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config, "Run configuration file")->required();
    sub->add_option("-o,--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_option("-j,--workers", opt.workers, "Worker threads; output does not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_flag("-q,--quiet", opt.quiet, "Do not print the summary");
  };

  auto* eval = app.add_subcommand("eval", "Sensitivity of the three protocols at the operating point");
  auto* sweep = app.add_subcommand("sweep", "Sensitivity over the (I_conf, t_MW) grid, CSV and heatmaps");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo photon-counting check of the sensitivities");
  auto* calibrate = app.add_subcommand("calibrate", "Extract t_init and t_RO from a contrast trace CSV");
  auto* plan = app.add_subcommand("plan", "Acquisition schedule, total time and AOM drive frequencies");
  auto* trace = app.add_subcommand("trace", "Write a synthetic contrast trace CSV");
  for (auto* sub : {eval, sweep, simulate, calibrate, plan, trace}) add_common(sub);

  for (auto* sub : {simulate, trace}) {
    sub->add_option("-s,--seed", opt.seed, "Master seed (overrides seed)");
    sub->add_flag("--noiseless", opt.noiseless, "Use expected counts instead of Poisson draws");
  }
  simulate->add_option("-n,--trials", opt.trials, "Monte Carlo trials (overrides trials)")
      ->check(CLI::PositiveNumber);
  for (auto* sub : {simulate, plan}) {
    sub->add_option("-p,--protocol", opt.protocol, "lcqdm, leibold or conventional (default: all)");
  }
  calibrate->add_option("-t,--trace", opt.trace, "Trace CSV (t_sweep_us,sig_pl,ref_pl)");
  calibrate->add_option("--criterion", opt.criterion, "Readout criterion")
      ->check(CLI::IsMember({"window", "instantaneous"}));
  for (auto* sub : {calibrate, trace}) {
    sub->add_option("-i,--intensity", opt.intensity, "Trace intensity in mW/um2 (default: confocal operating point)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  qdm_command cmd{};
  cmd.command = name.c_str();
  cmd.config_path = opt.config.c_str();
  cmd.out_dir = opt.out ? opt.out->c_str() : nullptr;
  cmd.trace_path = opt.trace ? opt.trace->c_str() : nullptr;
  cmd.protocol = opt.protocol ? opt.protocol->c_str() : nullptr;
  cmd.criterion = opt.criterion.c_str();
  cmd.has_seed = opt.seed.has_value();
  cmd.seed = opt.seed.value_or(0);
  cmd.has_trials = opt.trials.has_value();
  cmd.trials = opt.trials.value_or(0);
  cmd.has_intensity = opt.intensity.has_value();
  cmd.intensity = opt.intensity.value_or(0.0);
  cmd.noiseless = opt.noiseless ? 1 : 0;
  cmd.workers = opt.workers;

  Owned summary, error;
  const int code = qdm_run_command(&cmd, &summary.s, &error.s);
  if (code != 0) {
    std::cerr << "qdmsim " << name << ": " << (error.s ? error.s : "failed") << '\n';
    return code;
  }
  if (!opt.quiet && summary.s) std::cout << summary.s;
  return 0;
}
