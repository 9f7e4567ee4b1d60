// Command-line front end over the C interface.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "spectral_forecaster/c_api.h"

namespace {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitIo = 5,
  kExitInternal = 6,
};

int exit_code(sf_status s) {
  switch (s) {
    case SF_OK: return kExitOk;
    case SF_ERR_INVALID_ARGUMENT: return kExitUsage;
    case SF_ERR_CONFIG: return kExitConfig;
    case SF_ERR_DATA: return kExitData;
    case SF_ERR_NUMERIC: return kExitNumeric;
    case SF_ERR_IO: return kExitIo;
    default: return kExitInternal;
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string horizons;
  std::string exclude;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool tiny = false;
  bool quiet = false;
};

using Command = sf_status (*)(sf_experiment*, sf_report**);

int fail(sf_status s, const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, sf_last_error());
  return exit_code(s);
}

void print_report(const sf_report* r) {
  const size_t rows = sf_report_row_count(r);
  if (rows) std::printf("%-18s %8s %14s %14s %12s\n", "setting", "horizon", "mse", "mae", "parameters");
  for (size_t i = 0; i < rows; ++i) {
    const char* setting = nullptr;
    size_t horizon = 0, params = 0;
    double mse = 0.0, mae = 0.0;
    sf_report_row(r, i, &setting, &horizon, &mse, &mae, &params);
    std::printf("%-18s %8zu %14.6g %14.6g %12zu\n", setting, horizon, mse, mae, params);
  }
  for (size_t i = 0; i < sf_report_file_count(r); ++i) std::printf("wrote %s\n", sf_report_file(r, i));
}

int execute(const Options& o, Command cmd, bool config_required) {
  sf_set_verbose(o.quiet ? 0 : 1);
  sf_experiment* exp = nullptr;
  sf_status s;
  if (!o.config.empty()) {
    s = sf_experiment_from_file(o.config.c_str(), &exp);
  } else if (config_required) {
    std::fprintf(stderr, "error: --config is required for this command\n");
    return kExitUsage;
  } else {
    s = sf_experiment_from_json("{}", &exp);
  }
  if (s != SF_OK) return fail(s, "loading config");

  int code = kExitOk;
  auto apply = [&](sf_status st, const char* what) {
    if (st != SF_OK && code == kExitOk) code = fail(st, what);
  };
  if (o.seed_set) apply(sf_experiment_set_seed(exp, o.seed), "--seed");
  if (!o.out.empty()) apply(sf_experiment_set_output_dir(exp, o.out.c_str()), "--out");
  if (!o.horizons.empty()) apply(sf_experiment_set_horizons(exp, o.horizons.c_str()), "--horizon");
  if (!o.exclude.empty()) apply(sf_experiment_set_excluded_channels(exp, o.exclude.c_str()), "--exclude-channels");
  if (o.tiny) apply(sf_experiment_use_tiny_model(exp), "--tiny");
  if (code == kExitOk) {
    sf_report* report = nullptr;
    s = cmd(exp, &report);
    if (s == SF_OK) {
      print_report(report);
      sf_report_destroy(report);
    } else {
      code = fail(s, "command failed");
    }
  }
  sf_experiment_destroy(exp);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer forecasters with learnable frequency filters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sf_version());

  Options o;
  struct Sub {
    const char* name;
    const char* help;
    Command cmd;
    bool config_required;
  };
  const Sub subs[] = {
      {"run", "Train and evaluate at each configured horizon", sf_run, true},
      {"ablate-layers", "Vary the number of attention blocks", sf_ablate_layers, true},
      {"ablate-alpha", "Vary the number of spectral blocks at fixed depth", sf_ablate_alpha, true},
      {"ablate-placement", "Compare filters after embedding, before embedding, and none", sf_ablate_placement, true},
      {"export-spectra", "Write filter and embedding amplitude spectra", sf_export_spectra, true},
      {"param-count", "Report analytic parameter counts", sf_param_count, false},
      {"synth", "Write the synthetic three-sine series", sf_synth, false},
  };
  for (const auto& sub : subs) {
    CLI::App* s = app.add_subcommand(sub.name, sub.help);
    s->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed, "Seed for initialization, shuffling and synthetic noise")
        ->each([&o](const std::string&) { o.seed_set = true; });
    s->add_option("--out", o.out, "Output directory");
    s->add_option("--horizon", o.horizons, "Comma-separated forecast horizons");
    s->add_option("--exclude-channels", o.exclude, "Comma-separated channel names or indices to drop");
    s->add_flag("--tiny", o.tiny, "Use the tiny model preset");
    s->add_flag("-q,--quiet", o.quiet, "Suppress progress messages");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& sub : subs) {
    if (app.got_subcommand(sub.name)) return execute(o, sub.cmd, sub.config_required);
  }
  return kExitUsage;
}
