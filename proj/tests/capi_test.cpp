#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_forecaster/c_api.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sf_capi_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kTinyJson = R"({
  "dataset": {"synthetic": {"length": 300}},
  "train": {"max_epochs": 2, "learning_rate": 0.001},
  "split": {"lookback_context": true},
  "seed": 3
})";

struct Experiment {
  sf_experiment* exp = nullptr;
  explicit Experiment(const fs::path& out) {
    sf_set_verbose(0);
    EXPECT_EQ(sf_experiment_from_json(kTinyJson, &exp), SF_OK) << sf_last_error();
    EXPECT_EQ(sf_experiment_use_tiny_model(exp), SF_OK);
    EXPECT_EQ(sf_experiment_set_output_dir(exp, out.string().c_str()), SF_OK);
  }
  ~Experiment() { sf_experiment_destroy(exp); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(CApi, VersionAndEmptyError) {
  EXPECT_STREQ(sf_version(), "0.1.0");
  EXPECT_NE(sf_last_error(), nullptr);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(sf_experiment_from_json(nullptr, nullptr), SF_ERR_INVALID_ARGUMENT);
  EXPECT_GT(std::strlen(sf_last_error()), 0u);
  sf_report* r = nullptr;
  EXPECT_EQ(sf_run(nullptr, &r), SF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sf_set_max_threads(0), SF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sf_set_max_threads(1), SF_OK);
}

TEST(CApi, MalformedConfigIsConfigError) {
  sf_experiment* exp = nullptr;
  EXPECT_EQ(sf_experiment_from_json("{\"nope\": 1}", &exp), SF_ERR_CONFIG);
  EXPECT_EQ(exp, nullptr);
  EXPECT_EQ(sf_experiment_from_file("/nonexistent/config.json", &exp), SF_ERR_CONFIG);
}

TEST(CApi, MissingDatasetIsConfigError) {
  sf_experiment* exp = nullptr;
  ASSERT_EQ(sf_experiment_from_json(R"({"dataset": {"path": "/nonexistent/data.csv"}})", &exp), SF_OK);
  sf_report* r = nullptr;
  EXPECT_EQ(sf_run(exp, &r), SF_ERR_CONFIG);
  EXPECT_NE(std::string(sf_last_error()).find("data.csv"), std::string::npos);
  EXPECT_EQ(r, nullptr);
  sf_experiment_destroy(exp);
}

TEST(CApi, BadOverridesAreConfigErrors) {
  Experiment e(scratch("overrides"));
  EXPECT_EQ(sf_experiment_set_horizons(e.exp, "12,x"), SF_ERR_CONFIG);
  EXPECT_EQ(sf_experiment_set_horizons(e.exp, "4, 8"), SF_OK);
  EXPECT_EQ(sf_experiment_set_seed(e.exp, 99), SF_OK);
  const std::string json = sf_experiment_json(e.exp);
  EXPECT_NE(json.find("\"seed\": 99"), std::string::npos);
}

TEST(CApi, RunReportAndModelRoundTrip) {
  const auto out = scratch("run");
  Experiment e(out);
  sf_report* r = nullptr;
  ASSERT_EQ(sf_run(e.exp, &r), SF_OK) << sf_last_error();
  ASSERT_EQ(sf_report_row_count(r), 1u);
  const char* setting = nullptr;
  size_t horizon = 0, params = 0;
  double mse = 0, mae = 0;
  ASSERT_EQ(sf_report_row(r, 0, &setting, &horizon, &mse, &mae, &params), SF_OK);
  EXPECT_EQ(horizon, 8u);
  EXPECT_TRUE(std::isfinite(mse));
  EXPECT_GT(params, 0u);
  EXPECT_EQ(sf_report_row(r, 5, &setting, &horizon, &mse, &mae, &params), SF_ERR_INVALID_ARGUMENT);
  std::string checkpoint;
  for (size_t i = 0; i < sf_report_file_count(r); ++i) {
    const std::string f = sf_report_file(r, i);
    EXPECT_TRUE(fs::exists(f)) << f;
    if (f.ends_with(".sfckpt")) checkpoint = f;
  }
  EXPECT_NE(std::string(sf_report_json(r)).find("\"command\""), std::string::npos);
  sf_report_destroy(r);

  ASSERT_FALSE(checkpoint.empty());
  sf_model* m = nullptr;
  ASSERT_EQ(sf_model_load(checkpoint.c_str(), &m), SF_OK) << sf_last_error();
  size_t lookback = 0, h = 0, count = 0;
  ASSERT_EQ(sf_model_shape(m, &lookback, &h), SF_OK);
  EXPECT_EQ(lookback, 16u);
  EXPECT_EQ(h, 8u);
  ASSERT_EQ(sf_model_parameter_count(m, &count), SF_OK);
  EXPECT_EQ(count, params);
  std::vector<double> input(2 * lookback), output(2 * h, std::nan(""));
  for (size_t i = 0; i < input.size(); ++i) input[i] = std::sin(0.3 * static_cast<double>(i));
  ASSERT_EQ(sf_model_forecast(m, input.data(), 2, 1, output.data()), SF_OK) << sf_last_error();
  for (double v : output) EXPECT_TRUE(std::isfinite(v));
  std::vector<double> again(2 * h);
  ASSERT_EQ(sf_model_forecast(m, input.data(), 2, 1, again.data()), SF_OK);
  EXPECT_EQ(output, again);
  EXPECT_EQ(sf_model_forecast(m, input.data(), 2, 0, output.data()), SF_ERR_INVALID_ARGUMENT);
  sf_model_destroy(m);

  EXPECT_EQ(sf_model_load((out / "metrics.csv").string().c_str(), &m), SF_ERR_IO);
}

TEST(CApi, RerunProducesByteIdenticalCsvs) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    Experiment e(dir);
    sf_report* r = nullptr;
    ASSERT_EQ(sf_run(e.exp, &r), SF_OK) << sf_last_error();
    sf_report_destroy(r);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename())) << entry.path();
    ++compared;
  }
  EXPECT_GE(compared, 5u);
}

TEST(CApi, ExportSpectraWithoutFiltersFails) {
  sf_experiment* exp = nullptr;
  ASSERT_EQ(sf_experiment_from_json(R"({"dataset": {"synthetic": {"length": 300}},
    "model": {"lookback": 16, "horizon": 8, "patch_len": 4, "d_model": 8, "n_heads": 2, "total_layers": 1, "alpha": 0},
    "train": {"max_epochs": 1}})",
                                    &exp),
            SF_OK)
      << sf_last_error();
  ASSERT_EQ(sf_experiment_set_output_dir(exp, scratch("noflt").string().c_str()), SF_OK);
  sf_report* r = nullptr;
  EXPECT_EQ(sf_export_spectra(exp, &r), SF_ERR_CONFIG);
  EXPECT_NE(std::string(sf_last_error()).find("no spectral filters"), std::string::npos);
  sf_experiment_destroy(exp);
}

TEST(CApi, SynthAndParamCount) {
  Experiment e(scratch("synth"));
  sf_report* r = nullptr;
  ASSERT_EQ(sf_synth(e.exp, &r), SF_OK) << sf_last_error();
  EXPECT_GE(sf_report_file_count(r), 2u);
  sf_report_destroy(r);
  ASSERT_EQ(sf_param_count(e.exp, &r), SF_OK) << sf_last_error();
  ASSERT_EQ(sf_report_row_count(r), 1u);
  sf_report_destroy(r);
}
