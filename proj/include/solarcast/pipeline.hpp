#pragma once

#include "solarcast/evaluation.hpp"
#include "solarcast/forecasters.hpp"
#include "solarcast/model_io.hpp"
#include "solarcast/preprocess.hpp"
#include "solarcast/series.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace solarcast {

/// Inclusive range of calendar years.
struct YearSpan {
	int first = 0;
	int last = 0;

	bool contains(int year) const noexcept { return year >= first && year <= last; }
	/// Parses "1971:1987" or a single year "1988".
	static YearSpan parse(const std::string& text);
	std::string str() const;
};

struct PipelineConfig {
	std::string input_csv;
	double latitude_deg = 41.917;
	double solar_constant = solar::SiteSpec::kDefaultSolarConstant;
	/// Unset spans default to: test = last two years, train = everything before.
	std::optional<YearSpan> train;
	std::optional<YearSpan> test;
	ModelKind model = ModelKind::Mlp;
	ModelParams params{};
	bool preprocess = true;
	int half_width = preprocess::kDefaultHalfWidth;
	/// Independent fits with seeds seed, seed+1, ...; only the MLP draws on them.
	int restarts = 1;
	std::uint64_t seed = 1;
	/// 0 = hardware concurrency.
	int threads = 1;
	std::string output_dir = "out";

	/// Throws ConfigError. Spans are checked against the data in resolve_spans.
	void validate() const;
};

/// Honours SOLARCAST_OUTPUT_DIR when set and non-empty.
std::string resolve_output_dir(const std::string& configured);

/// Fills unset spans from the data and checks that both spans are disjoint,
/// ordered, and covered by the series.
void resolve_spans(PipelineConfig& cfg, const DailySeries& series);

/// Steps 1-2 of the protocol: cleaned data and, when enabled, the fitted
/// preprocessor and the corrected (model-space) series.
struct PreparedData {
	DailySeries cleaned;
	CleaningReport cleaning;
	std::optional<preprocess::Preprocessor> preprocessor;
	DailySeries corrected; // equals cleaned when preprocessing is off
};

PreparedData prepare(const DailySeries& raw, const PipelineConfig& cfg);
/// Step 2 only, on an already cleaned series.
PreparedData prepare_cleaned(DailySeries cleaned, CleaningReport report, const PipelineConfig& cfg);

/// Model-space value back to Wh/m², floored at 0. Identity (plus floor) when
/// there is no preprocessor.
DailySeries to_irradiance(const std::optional<preprocess::Preprocessor>& pre,
                          const DailySeries& model_space);

/// Fits one forecaster on the train span of `data.corrected` and forecasts the
/// test span one step ahead, in model space.
struct FitOutcome {
	std::unique_ptr<Forecaster> model;
	DailySeries predicted_model_space;
	DailySeries predicted; // Wh/m²
	eval::MetricsReport metrics;
};

FitOutcome fit_and_forecast(const PreparedData& data, const PipelineConfig& cfg, std::uint64_t seed);

struct PipelineResult {
	PreparedData data;
	/// One entry per restart, in seed order.
	std::vector<FitOutcome> runs;
	std::optional<eval::CiSummary> ci;
	eval::ForecastRun primary; // restart 0 against the measured test span
};

/// Runs the whole protocol in memory. `cfg` spans must be resolved.
PipelineResult run_experiment(const DailySeries& raw, const PipelineConfig& cfg);
/// Steps 3-5 on already prepared data.
PipelineResult run_models(PreparedData data, const PipelineConfig& cfg);

/// Loads cfg.input_csv, runs the protocol and writes every artifact into the
/// output directory. Each stage reads back the artifact of the previous one,
/// so rerunning a stage from the files gives identical results. Errors are
/// rethrown with the stage name prefixed; files written before the failure
/// are kept.
PipelineResult run_pipeline(PipelineConfig cfg);

/// Model file with the preprocessor embedded (or preprocess=0).
ModelFile make_model_file(const Forecaster& model, const std::optional<preprocess::Preprocessor>& pre,
                          const PipelineConfig& cfg);
std::optional<preprocess::Preprocessor> preprocessor_from(const ModelFile& file);

/// CSV column names.
inline constexpr const char* kPredictionColumn = "ghi_pred_wh_m2";
inline constexpr const char* kCorrectedColumn = "corrected";
inline constexpr const char* kCorrectedPredictionColumn = "corrected_pred";

} // namespace solarcast
