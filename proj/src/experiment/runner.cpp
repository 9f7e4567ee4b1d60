#include "experiment/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "experiment/csv.hpp"
#include "log.hpp"
#include "model/checkpoint.hpp"
#include "numeric/fft.hpp"
#include "numeric/ops.hpp"

namespace sf::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

void prepare_output(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) {
    throw IoError("cannot create output directory '" + cfg.output_dir + "'");
  }
}

void write_csv(Report& r, const ExperimentConfig& cfg, const std::string& name, const CsvTable& t) {
  const std::string path = out_path(cfg, name);
  t.write(path);
  r.files.push_back(path);
}

void write_report(Report& r, const ExperimentConfig& cfg) {
  const std::string path = out_path(cfg, "report_" + r.command + ".json");
  r.files.push_back(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << r.to_json().dump(2) << '\n';
}

Report start(const std::string& command, const ExperimentConfig& cfg) {
  cfg.validate();
  prepare_output(cfg);
  Report r;
  r.command = command;
  r.tag = cfg.tag;
  r.details["config"] = cfg;
  return r;
}

model::ModelConfig model_for(const ExperimentConfig& cfg, std::size_t horizon, std::size_t channels) {
  model::ModelConfig m = cfg.model;
  m.horizon = horizon;
  m.channels = channels;
  return m;
}

// Mean amplitude along the filtered (last) axis over all other rows.
std::vector<double> mean_amplitude(const numeric::Tensor& t) {
  const std::size_t n = t.shape().back();
  const std::size_t rows = t.numel() / n;
  std::vector<double> acc(n / 2 + 1, 0.0);
  auto v = t.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto s = numeric::dft(v.subspan(r * n, n));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::abs(s.bins[k]);
  }
  for (auto& a : acc) a /= double(rows);
  return acc;
}

CsvTable curve_table(const training::FitResult& fit) {
  CsvTable t({"epoch", "train_mse", "val_mse"});
  for (const auto& e : fit.curve) {
    t.row({std::to_string(e.epoch), format_double(e.train_mse), format_double(e.val_mse)});
  }
  return t;
}

json spectra_json(const std::vector<SpectrumSnapshot>& spectra) {
  json arr = json::array();
  for (const auto& s : spectra) arr.push_back({{"low_ratio", s.low_ratio()}, {"high_ratio", s.high_ratio()}});
  return arr;
}

void write_spectra(Report& r, const ExperimentConfig& cfg, const std::vector<SpectrumSnapshot>& spectra,
                   const std::string& infix) {
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const std::string suffix = infix + "b" + std::to_string(i) + ".csv";
    write_csv(r, cfg, "filter_spectrum_" + suffix, spectrum_table(spectra[i].filter));
    write_csv(r, cfg, "embedding_pre_" + suffix, spectrum_table(spectra[i].pre));
    write_csv(r, cfg, "embedding_post_" + suffix, spectrum_table(spectra[i].post));
  }
}

const char* placement_name(model::FilterPlacement p) {
  return p == model::FilterPlacement::kPostEmbedding ? "post_embedding" : "pre_embedding";
}

// Windowing failures on a loaded dataset are reported as data errors.
data::WindowedData windows_for(const data::RawSeries& rs, const data::SplitSpec& split, std::size_t lookback,
                               std::size_t horizon) {
  try {
    return data::make_windows(rs, split, lookback, horizon);
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("dataset too short for lookback ") + std::to_string(lookback) + " and horizon " +
                    std::to_string(horizon) + ": " + e.what());
  }
}

// Trains one variant per setting at the first horizon.
Report sweep(const std::string& command, const std::string& column, const ExperimentConfig& cfg,
             const std::vector<std::pair<std::string, model::ModelConfig>>& variants) {
  Report r = start(command, cfg);
  const data::RawSeries rs = load_dataset(cfg);
  const std::size_t horizon = cfg.effective_horizons().front();
  const auto w = windows_for(rs, cfg.split, cfg.model.lookback, horizon);
  CsvTable table({"setting", "mse", "mae"});
  json runs = json::array();
  for (const auto& [setting, base] : variants) {
    model::ModelConfig m = base;
    m.horizon = horizon;
    m.channels = rs.channels();
    const TrainedModel t = train_model(cfg, m, w, cfg.tag + " " + column + "=" + setting);
    r.rows.push_back({setting, horizon, t.test.mse, t.test.mae, t.parameters});
    table.row({setting, format_double(t.test.mse), format_double(t.test.mae)});
    runs.push_back({{"setting", setting},
                    {"axis", column},
                    {"epochs_run", t.fit.curve.size()},
                    {"best_epoch", t.fit.best_epoch},
                    {"parameters", t.parameters}});
  }
  write_csv(r, cfg, "ablation_" + column + ".csv", table);
  r.details["runs"] = runs;
  write_report(r, cfg);
  return r;
}

}  // namespace

json Report::to_json() const {
  json rows_json = json::array();
  for (const auto& m : rows) {
    rows_json.push_back({{"setting", m.setting},
                         {"horizon", m.horizon},
                         {"mse", m.mse},
                         {"mae", m.mae},
                         {"parameters", m.parameters}});
  }
  return json{{"command", command}, {"tag", tag}, {"rows", rows_json}, {"details", details}, {"files", files}};
}

double SpectrumSnapshot::low_ratio() const {
  const std::size_t low = (pre.size() + 2) / 3;
  double s = 0.0;
  for (std::size_t k = 0; k < low; ++k) s += post[k] / pre[k];
  return s / double(low);
}

double SpectrumSnapshot::high_ratio() const {
  const std::size_t low = (pre.size() + 2) / 3;
  if (low >= pre.size()) return 0.0;
  double s = 0.0;
  for (std::size_t k = low; k < pre.size(); ++k) s += post[k] / pre[k];
  return s / double(pre.size() - low);
}

data::RawSeries load_dataset(const ExperimentConfig& cfg) {
  data::RawSeries rs = cfg.dataset.path.empty() ? data::synth_three_sine(*cfg.dataset.synthetic, cfg.seed)
                                                : data::load_csv(cfg.dataset.path);
  rs.frequency = cfg.dataset.frequency;
  if (!cfg.exclude_channels.empty()) rs = data::exclude_channels(rs, cfg.exclude_channels);
  return rs;
}

TrainedModel train_model(const ExperimentConfig& cfg, const model::ModelConfig& mcfg, const data::WindowedData& w,
                         const std::string& label) {
  TrainedModel t;
  t.model = model::make_forecaster(mcfg, cfg.seed);
  t.parameters = t.model->state().parameter_count();
  training::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  t.fit = training::fit(*t.model, w.train, w.val, tc, [&label](const training::EpochRecord& e) {
    log_info(label + ": epoch " + std::to_string(e.epoch) + " train_mse " + format_double(e.train_mse) +
             " val_mse " + format_double(e.val_mse));
  });
  t.test = training::evaluate(*t.model, w.test, cfg.eval_batch_size);
  log_info(label + ": test mse " + format_double(t.test.mse) + " mae " + format_double(t.test.mae));
  return t;
}

std::vector<SpectrumSnapshot> probe_spectra(model::Forecaster& m, const data::WindowSet& windows,
                                            std::size_t max_windows) {
  auto* ff = dynamic_cast<model::FilterFormer*>(&m);
  if (!ff || ff->spectral_block_count() == 0) throw ConfigError("export-spectra: model has no spectral filters");
  if (windows.empty()) throw DataError("export-spectra: no probe windows");
  const auto batch = windows.range(0, max_windows);
  model::ForwardTrace trace;
  {
    numeric::NoGradGuard guard;
    ff->forward(batch.input, false, &trace);
  }
  const bool patch_axis = ff->config().filter_placement == model::FilterPlacement::kPostEmbedding &&
                          ff->config().filter_axis == spectral::FilterAxis::kPatch;
  std::vector<SpectrumSnapshot> out;
  for (std::size_t i = 0; i < trace.spectral.size(); ++i) {
    numeric::Tensor pre = trace.spectral[i].filter_input;
    numeric::Tensor post = trace.spectral[i].filter_output;
    if (patch_axis) {
      numeric::NoGradGuard guard;
      pre = numeric::permute(pre, {0, 2, 1});
      post = numeric::permute(post, {0, 2, 1});
    }
    out.push_back({ff->filter(i).amplitude_spectrum(), mean_amplitude(pre), mean_amplitude(post)});
  }
  return out;
}

Report run(const ExperimentConfig& cfg) {
  Report r = start("run", cfg);
  const data::RawSeries rs = load_dataset(cfg);
  CsvTable metrics({"horizon", "mse", "mae"});
  json horizons = json::array();
  for (std::size_t h : cfg.effective_horizons()) {
    const auto w = windows_for(rs, cfg.split, cfg.model.lookback, h);
    const model::ModelConfig m = model_for(cfg, h, rs.channels());
    const TrainedModel t = train_model(cfg, m, w, cfg.tag + " H=" + std::to_string(h));
    r.rows.push_back({"H=" + std::to_string(h), h, t.test.mse, t.test.mae, t.parameters});
    metrics.row({std::to_string(h), format_double(t.test.mse), format_double(t.test.mae)});

    const std::string infix = "h" + std::to_string(h);
    write_csv(r, cfg, "curve_" + infix + ".csv", curve_table(t.fit));
    const std::string ckpt = out_path(cfg, "checkpoint_" + infix + ".sfckpt");
    model::save_checkpoint(ckpt, *t.model, cfg.seed);
    r.files.push_back(ckpt);

    json entry{{"horizon", h},
               {"mse", t.test.mse},
               {"mae", t.test.mae},
               {"parameters", t.parameters},
               {"epochs_run", t.fit.curve.size()},
               {"best_epoch", t.fit.best_epoch},
               {"best_val_mse", t.fit.best_val_mse},
               {"early_stopped", t.fit.early_stopped},
               {"windows", {{"train", w.train.size()}, {"val", w.val.size()}, {"test", w.test.size()}}}};
    if (m.alpha > 0) {
      const auto spectra = probe_spectra(*t.model, w.test, cfg.probe_windows);
      write_spectra(r, cfg, spectra, infix + "_");
      entry["spectra"] = spectra_json(spectra);
    }
    horizons.push_back(entry);
  }
  write_csv(r, cfg, "metrics.csv", metrics);
  r.details["horizons"] = horizons;
  r.details["channels"] = rs.channels();
  write_report(r, cfg);
  return r;
}

Report ablate_layers(const ExperimentConfig& cfg) {
  if (cfg.ablation.attention_layers.empty()) throw ConfigError("ablate-layers: attention_layers list is empty");
  std::vector<std::pair<std::string, model::ModelConfig>> variants;
  for (std::size_t n : cfg.ablation.attention_layers) {
    model::ModelConfig m = cfg.model;
    m.alpha = cfg.ablation.spectral_blocks;
    m.total_layers = m.alpha + n;
    variants.emplace_back(std::to_string(n), m);
  }
  return sweep("ablate_layers", "attention_layers", cfg, variants);
}

Report ablate_alpha(const ExperimentConfig& cfg) {
  if (cfg.ablation.alphas.empty()) throw ConfigError("ablate-alpha: alphas list is empty");
  std::vector<std::pair<std::string, model::ModelConfig>> variants;
  for (std::size_t a : cfg.ablation.alphas) {
    if (a > cfg.ablation.total_layers) {
      throw ConfigError("ablate-alpha: alpha " + std::to_string(a) + " exceeds total_layers " +
                        std::to_string(cfg.ablation.total_layers));
    }
    model::ModelConfig m = cfg.model;
    m.total_layers = cfg.ablation.total_layers;
    m.alpha = a;
    variants.emplace_back(std::to_string(a), m);
  }
  return sweep("ablate_alpha", "alpha", cfg, variants);
}

Report ablate_placement(const ExperimentConfig& cfg) {
  if (cfg.model.alpha == 0) throw ConfigError("ablate-placement: model.alpha must be >= 1");
  std::vector<std::pair<std::string, model::ModelConfig>> variants;
  for (auto p : {model::FilterPlacement::kPostEmbedding, model::FilterPlacement::kPreEmbedding}) {
    model::ModelConfig m = cfg.model;
    m.filter_placement = p;
    variants.emplace_back(placement_name(p), m);
  }
  model::ModelConfig none = cfg.model;
  none.total_layers -= none.alpha;
  none.alpha = 0;
  variants.emplace_back("none", none);
  return sweep("ablate_placement", "placement", cfg, variants);
}

Report export_spectra(const ExperimentConfig& cfg) {
  Report r = start("export_spectra", cfg);
  const data::RawSeries rs = load_dataset(cfg);
  std::unique_ptr<model::Forecaster> m;
  std::unique_ptr<data::WindowedData> w;
  if (!cfg.checkpoint.empty()) {
    m = model::load_checkpoint(cfg.checkpoint);
    w = std::make_unique<data::WindowedData>(
        windows_for(rs, cfg.split, m->config().lookback, m->config().horizon));
    r.details["checkpoint"] = cfg.checkpoint;
  } else {
    const std::size_t h = cfg.effective_horizons().front();
    const model::ModelConfig mc = model_for(cfg, h, rs.channels());
    if (mc.alpha == 0) throw ConfigError("export-spectra: model has no spectral filters");
    w = std::make_unique<data::WindowedData>(windows_for(rs, cfg.split, cfg.model.lookback, h));
    TrainedModel t = train_model(cfg, mc, *w, cfg.tag + " H=" + std::to_string(h));
    r.rows.push_back({"H=" + std::to_string(h), h, t.test.mse, t.test.mae, t.parameters});
    m = std::move(t.model);
  }
  const auto spectra = probe_spectra(*m, w->test, cfg.probe_windows);
  write_spectra(r, cfg, spectra, "");
  r.details["spectra"] = spectra_json(spectra);
  write_report(r, cfg);
  return r;
}

Report param_count(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("experiment: output_dir must not be empty");
  prepare_output(cfg);
  Report r;
  r.command = "param_count";
  r.tag = cfg.tag;
  r.details["config"] = cfg;
  std::size_t channels = cfg.model.channels;
  if (cfg.model.revin_affine && channels == 0) channels = load_dataset(cfg).channels();
  CsvTable table({"horizon", "component", "parameters"});
  json breakdowns = json::array();
  for (std::size_t h : cfg.effective_horizons()) {
    const auto b = model::count_parameters(model_for(cfg, h, channels));
    json entries = json::object();
    for (const auto& e : b.entries) {
      table.row({std::to_string(h), e.component, std::to_string(e.count)});
      entries[e.component] = e.count;
    }
    table.row({std::to_string(h), "total", std::to_string(b.total)});
    r.rows.push_back({"H=" + std::to_string(h), h, 0.0, 0.0, b.total});
    breakdowns.push_back({{"horizon", h}, {"total", b.total}, {"components", entries}});
  }
  write_csv(r, cfg, "param_count.csv", table);
  r.details["breakdown"] = breakdowns;
  write_report(r, cfg);
  return r;
}

Report synth(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (!c.dataset.synthetic) c.dataset.synthetic = data::SyntheticSpec{};
  c.dataset.path.clear();
  Report r = start("synth", c);
  const data::RawSeries rs = data::synth_three_sine(*c.dataset.synthetic, c.seed);
  CsvTable series({"date", "signal"});
  for (std::size_t t = 0; t < rs.steps(); ++t) series.row({rs.timestamps[t], format_double(rs.values[t])});
  write_csv(r, c, "synthetic.csv", series);
  const auto spectrum = numeric::dft(rs.values);
  std::vector<double> amp(spectrum.bins.size());
  for (std::size_t k = 0; k < amp.size(); ++k) amp[k] = std::abs(spectrum.bins[k]) / double(rs.steps());
  write_csv(r, c, "synthetic_spectrum.csv", spectrum_table(amp));
  r.details["length"] = rs.steps();
  write_report(r, c);
  return r;
}

}  // namespace sf::experiment
