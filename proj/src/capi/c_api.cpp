#include "spectral_forecaster/c_api.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiment/config.hpp"
#include "experiment/runner.hpp"
#include "log.hpp"
#include "model/checkpoint.hpp"
#include "numeric/parallel.hpp"

struct sf_experiment {
  sf::experiment::ExperimentConfig config;
  std::string json_text;
};

struct sf_report {
  sf::experiment::Report report;
  std::string json_text;
};

struct sf_model {
  std::unique_ptr<sf::model::Forecaster> model;
};

namespace {

thread_local std::string t_last_error;

template <class Fn>
sf_status guarded(Fn&& fn) {
  t_last_error.clear();
  try {
    fn();
    return SF_OK;
  } catch (const sf::ConfigError& e) {
    t_last_error = e.what();
    return SF_ERR_CONFIG;
  } catch (const sf::DataError& e) {
    t_last_error = e.what();
    return SF_ERR_DATA;
  } catch (const sf::NumericError& e) {
    t_last_error = e.what();
    return SF_ERR_NUMERIC;
  } catch (const sf::IoError& e) {
    t_last_error = e.what();
    return SF_ERR_IO;
  } catch (const sf::InvalidArgument& e) {
    t_last_error = e.what();
    return SF_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return SF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SF_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return SF_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw sf::InvalidArgument(std::string(what) + " must not be null");
}

sf_status command(sf_experiment* exp, sf_report** out,
                  sf::experiment::Report (*fn)(const sf::experiment::ExperimentConfig&)) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    *out = nullptr;
    auto r = std::make_unique<sf_report>();
    r->report = fn(exp->config);
    r->json_text = r->report.to_json().dump(2);
    *out = r.release();
  });
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_last_error(void) { return t_last_error.c_str(); }

sf_status sf_set_max_threads(size_t n) {
  return guarded([&] {
    if (n == 0) throw sf::InvalidArgument("thread count must be >= 1");
    sf::numeric::set_max_threads(n);
  });
}

void sf_set_verbose(int enabled) {
  if (enabled) {
    sf::set_log_sink([](sf::LogLevel level, const std::string& m) {
      std::fprintf(stderr, "%s%s\n", level == sf::LogLevel::kWarning ? "warning: " : "", m.c_str());
    });
  } else {
    sf::set_log_sink([](sf::LogLevel level, const std::string& m) {
      if (level == sf::LogLevel::kWarning) std::fprintf(stderr, "warning: %s\n", m.c_str());
    });
  }
}

sf_status sf_experiment_from_file(const char* path, sf_experiment** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto e = std::make_unique<sf_experiment>();
    e->config = sf::experiment::ExperimentConfig::load(path);
    *out = e.release();
  });
}

sf_status sf_experiment_from_json(const char* json_text, sf_experiment** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    auto e = std::make_unique<sf_experiment>();
    e->config = sf::experiment::ExperimentConfig::parse(json_text);
    *out = e.release();
  });
}

void sf_experiment_destroy(sf_experiment* exp) { delete exp; }

sf_status sf_experiment_set_seed(sf_experiment* exp, uint64_t seed) {
  return guarded([&] {
    require(exp, "experiment");
    exp->config.seed = seed;
  });
}

sf_status sf_experiment_set_output_dir(sf_experiment* exp, const char* dir) {
  return guarded([&] {
    require(exp, "experiment");
    require(dir, "dir");
    if (!*dir) throw sf::ConfigError("output directory must not be empty");
    exp->config.output_dir = dir;
  });
}

sf_status sf_experiment_set_horizons(sf_experiment* exp, const char* list) {
  return guarded([&] {
    require(exp, "experiment");
    require(list, "list");
    auto h = sf::experiment::parse_size_list(list);
    if (h.empty()) throw sf::ConfigError("horizon list is empty");
    for (auto v : h) {
      if (v == 0) throw sf::ConfigError("horizons must be positive");
    }
    exp->config.horizons = std::move(h);
  });
}

sf_status sf_experiment_set_excluded_channels(sf_experiment* exp, const char* list) {
  return guarded([&] {
    require(exp, "experiment");
    require(list, "list");
    exp->config.exclude_channels = sf::experiment::parse_string_list(list);
  });
}

sf_status sf_experiment_use_tiny_model(sf_experiment* exp) {
  return guarded([&] {
    require(exp, "experiment");
    exp->config.model = sf::model::ModelConfig::tiny();
  });
}

const char* sf_experiment_json(sf_experiment* exp) {
  if (!exp) return "";
  exp->json_text = nlohmann::json(exp->config).dump(2);
  return exp->json_text.c_str();
}

sf_status sf_run(sf_experiment* exp, sf_report** out) { return command(exp, out, sf::experiment::run); }
sf_status sf_ablate_layers(sf_experiment* exp, sf_report** out) {
  return command(exp, out, sf::experiment::ablate_layers);
}
sf_status sf_ablate_alpha(sf_experiment* exp, sf_report** out) {
  return command(exp, out, sf::experiment::ablate_alpha);
}
sf_status sf_ablate_placement(sf_experiment* exp, sf_report** out) {
  return command(exp, out, sf::experiment::ablate_placement);
}
sf_status sf_export_spectra(sf_experiment* exp, sf_report** out) {
  return command(exp, out, sf::experiment::export_spectra);
}
sf_status sf_param_count(sf_experiment* exp, sf_report** out) {
  return command(exp, out, sf::experiment::param_count);
}
sf_status sf_synth(sf_experiment* exp, sf_report** out) { return command(exp, out, sf::experiment::synth); }

const char* sf_report_json(const sf_report* report) { return report ? report->json_text.c_str() : ""; }

size_t sf_report_row_count(const sf_report* report) { return report ? report->report.rows.size() : 0; }

sf_status sf_report_row(const sf_report* report, size_t index, const char** setting, size_t* horizon, double* mse,
                        double* mae, size_t* parameters) {
  return guarded([&] {
    require(report, "report");
    if (index >= report->report.rows.size()) throw sf::InvalidArgument("report row index out of range");
    const auto& r = report->report.rows[index];
    if (setting) *setting = r.setting.c_str();
    if (horizon) *horizon = r.horizon;
    if (mse) *mse = r.mse;
    if (mae) *mae = r.mae;
    if (parameters) *parameters = r.parameters;
  });
}

size_t sf_report_file_count(const sf_report* report) { return report ? report->report.files.size() : 0; }

const char* sf_report_file(const sf_report* report, size_t index) {
  if (!report || index >= report->report.files.size()) return nullptr;
  return report->report.files[index].c_str();
}

void sf_report_destroy(sf_report* report) { delete report; }

sf_status sf_model_load(const char* checkpoint_path, sf_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<sf_model>();
    m->model = sf::model::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

void sf_model_destroy(sf_model* model) { delete model; }

sf_status sf_model_shape(const sf_model* model, size_t* lookback, size_t* horizon) {
  return guarded([&] {
    require(model, "model");
    if (lookback) *lookback = model->model->config().lookback;
    if (horizon) *horizon = model->model->config().horizon;
  });
}

sf_status sf_model_forecast(sf_model* model, const double* input, size_t batch, size_t channels, double* output) {
  return guarded([&] {
    require(model, "model");
    require(input, "input");
    require(output, "output");
    if (batch == 0 || channels == 0) throw sf::InvalidArgument("batch and channels must be positive");
    const auto& cfg = model->model->config();
    std::vector<double> in(input, input + batch * channels * cfg.lookback);
    const auto y = model->model->predict(sf::numeric::Tensor({batch, channels, cfg.lookback}, std::move(in)));
    std::copy(y.data().begin(), y.data().end(), output);
  });
}

sf_status sf_model_parameter_count(const sf_model* model, size_t* count) {
  return guarded([&] {
    require(model, "model");
    require(count, "count");
    *count = model->model->state().parameter_count();
  });
}

}  // extern "C"
