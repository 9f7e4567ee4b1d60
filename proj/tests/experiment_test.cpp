#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "experiment/config.hpp"
#include "experiment/csv.hpp"
#include "experiment/runner.hpp"
#include "log.hpp"
#include "model/checkpoint.hpp"
#include "model/filterformer.hpp"
#include "numeric/tensor.hpp"

namespace fs = std::filesystem;
namespace ex = sf::experiment;
namespace md = sf::model;

namespace {

struct Quiet {
  Quiet() { sf::set_log_sink([](sf::LogLevel, const std::string&) {}); }
};
const Quiet quiet;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sf_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

ex::ExperimentConfig tiny_synthetic(const fs::path& out) {
  ex::ExperimentConfig c;
  c.tag = "tiny";
  c.dataset.synthetic = sf::data::SyntheticSpec{};
  c.dataset.synthetic->length = 400;
  c.model = md::ModelConfig::tiny();
  c.model.channels = 1;
  c.train.max_epochs = 2;
  c.train.learning_rate = 1e-3;
  c.split.lookback_context = true;
  c.output_dir = out.string();
  c.seed = 5;
  c.probe_windows = 8;
  return c;
}

}  // namespace

TEST(Csv, ShortestRoundTripFormatting) {
  EXPECT_EQ(ex::format_double(0.1), "0.1");
  EXPECT_EQ(ex::format_double(1.0), "1");
  EXPECT_EQ(ex::format_double(-2.5e-7), "-2.5e-07");
  const double v = 0.12345678901234567;
  EXPECT_EQ(std::stod(ex::format_double(v)), v);
}

TEST(Csv, HeaderAndRows) {
  ex::CsvTable t({"horizon", "mse", "mae"});
  t.row({"96", "0.5", "0.25"});
  EXPECT_EQ(t.str(), "horizon,mse,mae\n96,0.5,0.25\n");
  EXPECT_THROW(t.row({"1"}), sf::InvalidArgument);
}

TEST(Csv, SpectrumTableSchema) {
  EXPECT_EQ(ex::spectrum_table({1.0, 0.5}).str(), "bin_index,amplitude\n0,1\n1,0.5\n");
}

TEST(Config, ParsesListsAndRejectsUnknownKeys) {
  EXPECT_EQ(ex::parse_size_list("96, 192,336"), (std::vector<std::size_t>{96, 192, 336}));
  EXPECT_THROW(ex::parse_size_list("96,x"), sf::ConfigError);
  EXPECT_EQ(ex::parse_string_list("OT, 3"), (std::vector<std::string>{"OT", "3"}));
  EXPECT_THROW(ex::ExperimentConfig::parse(R"({"bogus": 1})"), sf::ConfigError);
  EXPECT_THROW(ex::ExperimentConfig::parse("{not json"), sf::ConfigError);
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const auto c = ex::ExperimentConfig::parse(R"({"dataset": {"path": "data/x.csv"}})", "/base/dir");
  EXPECT_EQ(fs::path(c.dataset.path), fs::path("/base/dir/data/x.csv"));
}

TEST(Config, JsonRoundTrip) {
  ex::ExperimentConfig c = tiny_synthetic("out");
  c.horizons = {8, 12};
  c.exclude_channels = {"a"};
  const auto back = ex::ExperimentConfig::parse(nlohmann::json(c).dump());
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
}

TEST(Run, MissingDatasetIsConfigError) {
  ex::ExperimentConfig c;
  c.dataset.path = "/nonexistent/file.csv";
  c.output_dir = scratch("missing").string();
  EXPECT_THROW(ex::run(c), sf::ConfigError);
}

TEST(Run, TinySyntheticWritesAllArtifacts) {
  const auto out = scratch("run");
  const auto r = ex::run(tiny_synthetic(out));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.rows[0].mse));
  for (const auto& f : r.files) EXPECT_TRUE(fs::exists(f)) << f;
  const auto metrics = read_csv(out / "metrics.csv");
  EXPECT_EQ(metrics[0], (std::vector<std::string>{"horizon", "mse", "mae"}));
  const auto curve = read_csv(out / "curve_h8.csv");
  EXPECT_EQ(curve[0], (std::vector<std::string>{"epoch", "train_mse", "val_mse"}));
  EXPECT_EQ(curve.size(), 3u);
  const auto spectrum = read_csv(out / "filter_spectrum_h8_b0.csv");
  EXPECT_EQ(spectrum[0], (std::vector<std::string>{"bin_index", "amplitude"}));
  EXPECT_EQ(spectrum.size() - 1, 8u / 2 + 1);
}

TEST(Run, RerunIsByteIdentical) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  ex::run(tiny_synthetic(a));
  ex::run(tiny_synthetic(b));
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(read_file(e.path()), read_file(b / e.path().filename())) << e.path();
  }
}

TEST(Run, MultipleHorizons) {
  auto c = tiny_synthetic(scratch("multi"));
  c.horizons = {4, 8};
  const auto r = ex::run(c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].horizon, 4u);
  EXPECT_EQ(read_csv(fs::path(c.output_dir) / "metrics.csv").size(), 3u);
}

TEST(Ablation, SingletonListGivesSingleRow) {
  auto c = tiny_synthetic(scratch("single"));
  c.ablation.attention_layers = {1};
  c.ablation.spectral_blocks = 1;
  const auto r = ex::ablate_layers(c);
  ASSERT_EQ(r.rows.size(), 1u);
  const auto rows = read_csv(fs::path(c.output_dir) / "ablation_attention_layers.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"setting", "mse", "mae"}));
  EXPECT_EQ(rows.size(), 2u);
}

TEST(Ablation, ZeroAttentionLayersIsFilterOnlyModel) {
  auto c = tiny_synthetic(scratch("filteronly"));
  c.ablation.attention_layers = {0};
  c.ablation.spectral_blocks = 2;
  const auto r = ex::ablate_layers(c);
  md::ModelConfig m = c.model;
  m.total_layers = 2;
  m.alpha = 2;
  m.horizon = 8;
  EXPECT_EQ(r.rows.at(0).parameters, md::count_parameters(m).total);
}

TEST(Ablation, AlphaSweepShape) {
  auto c = tiny_synthetic(scratch("alpha"));
  c.ablation.alphas = {0, 1, 2};
  c.ablation.total_layers = 2;
  const auto r = ex::ablate_alpha(c);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_GT(r.rows[0].parameters, r.rows[1].parameters);
}

TEST(Ablation, PlacementRunsThreeVariants) {
  auto c = tiny_synthetic(scratch("placement"));
  const auto r = ex::ablate_placement(c);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].setting, "post_embedding");
  EXPECT_EQ(r.rows[1].setting, "pre_embedding");
  EXPECT_EQ(r.rows[2].setting, "none");
}

TEST(ExportSpectra, AlphaZeroIsExplicitError) {
  auto c = tiny_synthetic(scratch("alpha0"));
  c.model.alpha = 0;
  try {
    ex::export_spectra(c);
    FAIL() << "expected ConfigError";
  } catch (const sf::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no spectral filters"), std::string::npos);
  }
}

TEST(ExportSpectra, ImpulseFilterGivesFlatSpectrum) {
  const auto out = scratch("impulse");
  fs::create_directories(out);
  md::ModelConfig m = md::ModelConfig::tiny();
  m.channels = 1;
  m.d_model = 10;
  md::FilterFormer model(m, 3);
  sf::numeric::Tensor weights = model.filter(0).weights();
  auto w = weights.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  w[0] = 1.0;
  const auto ckpt = out / "impulse.sfckpt";
  md::save_checkpoint(ckpt.string(), model, 3);

  auto c = tiny_synthetic(out);
  c.checkpoint = ckpt.string();
  ex::export_spectra(c);
  const auto rows = read_csv(out / "filter_spectrum_b0.csv");
  ASSERT_EQ(rows.size() - 1, 10u / 2 + 1);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][1]), 1.0, 1e-12);
  const auto pre = read_csv(out / "embedding_pre_b0.csv");
  const auto post = read_csv(out / "embedding_post_b0.csv");
  for (std::size_t i = 1; i < pre.size(); ++i) EXPECT_NEAR(std::stod(pre[i][1]), std::stod(post[i][1]), 1e-12);
}

TEST(ParamCount, TotalMatchesModel) {
  auto c = tiny_synthetic(scratch("params"));
  const auto r = ex::param_count(c);
  const auto rows = read_csv(fs::path(c.output_dir) / "param_count.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"horizon", "component", "parameters"}));
  EXPECT_EQ(rows.back()[1], "total");
  md::ModelConfig m = c.model;
  EXPECT_EQ(std::stoul(rows.back()[2]), md::FilterFormer(m, 0).state().parameter_count());
}

TEST(Synth, WritesSeriesAndSpectrum) {
  auto c = tiny_synthetic(scratch("synth"));
  ex::synth(c);
  const auto series = read_csv(fs::path(c.output_dir) / "synthetic.csv");
  EXPECT_EQ(series[0], (std::vector<std::string>{"date", "signal"}));
  EXPECT_EQ(series.size(), 401u);
  const auto spec = read_csv(fs::path(c.output_dir) / "synthetic_spectrum.csv");
  EXPECT_EQ(spec.size() - 1, 400u / 2 + 1);
}
