#include "solarcast/pipeline.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

namespace solarcast {

namespace fs = std::filesystem;

YearSpan YearSpan::parse(const std::string& text) {
	YearSpan s;
	try {
		const auto colon = text.find(':');
		std::size_t used = 0;
		if (colon == std::string::npos) {
			s.first = s.last = std::stoi(text, &used);
			if (used != text.size()) {
				throw std::invalid_argument(text);
			}
		} else {
			const std::string a = text.substr(0, colon);
			const std::string b = text.substr(colon + 1);
			s.first = std::stoi(a, &used);
			if (used != a.size()) {
				throw std::invalid_argument(text);
			}
			s.last = std::stoi(b, &used);
			if (used != b.size()) {
				throw std::invalid_argument(text);
			}
		}
	} catch (const std::logic_error&) {
		throw ConfigError("bad year span '" + text + "' (expected YYYY or YYYY:YYYY)");
	}
	if (s.last < s.first) {
		throw ConfigError("year span '" + text + "' ends before it starts");
	}
	return s;
}

std::string YearSpan::str() const {
	return std::to_string(first) + ":" + std::to_string(last);
}

void PipelineConfig::validate() const {
	if (!(std::abs(latitude_deg) < 90.0)) {
		throw ConfigError("latitude must be inside (-90, 90) degrees");
	}
	if (!(solar_constant >= 1300.0 && solar_constant <= 1400.0)) {
		throw ConfigError("solar constant must be in [1300, 1400] W/m2");
	}
	if (train && test) {
		if (train->last >= test->first) {
			throw ConfigError("test span " + test->str() + " must start after train span " + train->str());
		}
	}
	if (half_width < 1) {
		throw ConfigError("moving-average half-width must be >= 1");
	}
	if (restarts < 1) {
		throw ConfigError("restarts must be >= 1");
	}
	if (threads < 0) {
		throw ConfigError("threads must be >= 0");
	}
	params.knn.validate();
	params.layout.validate();
	params.lm.validate();
	if (params.n_classes < 2) {
		throw ConfigError("need at least 2 classes");
	}
	if (params.chain_order < 1) {
		throw ConfigError("chain order must be >= 1");
	}
	if (!(params.smoothing >= 0.0)) {
		throw ConfigError("smoothing must be >= 0");
	}
}

std::string resolve_output_dir(const std::string& configured) {
	if (const char* env = std::getenv("SOLARCAST_OUTPUT_DIR"); env && *env) {
		return env;
	}
	return configured;
}

void resolve_spans(PipelineConfig& cfg, const DailySeries& series) {
	const int y0 = series.start().year();
	const int y1 = series.last_day().year();
	if (!cfg.test) {
		const int train_end = cfg.train ? cfg.train->last : y1 - 2;
		cfg.test = YearSpan{train_end + 1, y1};
	}
	if (!cfg.train) {
		cfg.train = YearSpan{y0, cfg.test->first - 1};
	}
	cfg.validate();
	if (cfg.train->first < y0 || cfg.test->last > y1 || cfg.test->first > cfg.test->last) {
		throw ConfigError("spans train " + cfg.train->str() + " / test " + cfg.test->str() +
		                  " are not covered by the data (" + std::to_string(y0) + "-" + std::to_string(y1) + ")");
	}
}

namespace {

template <class F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
	try {
		return body();
	} catch (const Error& e) {
		const std::string what = name + ": " + e.what();
		switch (e.category()) {
		case Error::Category::Config:
			throw ConfigError(what);
		case Error::Category::Data:
			throw DataError(what);
		case Error::Category::Numerical:
			throw NumericalError(what);
		}
		throw;
	}
}

} // namespace

PreparedData prepare(const DailySeries& raw, const PipelineConfig& cfg) {
	const auto site = solar::SiteSpec::from_degrees(cfg.latitude_deg, cfg.solar_constant);
	auto cleaned = stage("clean", [&] { return clean(raw, site); });
	return prepare_cleaned(std::move(cleaned.series), std::move(cleaned.report), cfg);
}

PreparedData prepare_cleaned(DailySeries cleaned, CleaningReport report, const PipelineConfig& cfg) {
	PreparedData out{cleaned, std::move(report), std::nullopt, cleaned};
	if (cfg.preprocess) {
		stage("preprocess", [&] {
			const auto site = solar::SiteSpec::from_degrees(cfg.latitude_deg, cfg.solar_constant);
			const auto train = out.cleaned.slice_years(cfg.train->first, cfg.train->last);
			out.preprocessor.emplace(preprocess::Preprocessor::fit(train, site, cfg.half_width));
			out.corrected = out.preprocessor->apply(out.cleaned);
		});
	}
	return out;
}

DailySeries to_irradiance(const std::optional<preprocess::Preprocessor>& pre, const DailySeries& model_space) {
	std::vector<double> out(model_space.size());
	for (std::size_t i = 0; i < model_space.size(); ++i) {
		const double v = pre ? pre->invert_one(model_space.day_at(i), model_space[i]) : model_space[i];
		out[i] = std::max(0.0, v);
	}
	return model_space.with_values(std::move(out));
}

FitOutcome fit_and_forecast(const PreparedData& data, const PipelineConfig& cfg, std::uint64_t seed) {
	auto params = cfg.params;
	params.seed = seed;
	auto model = make_forecaster(cfg.model, params);
	stage("train", [&] { model->fit(data.corrected.slice_years(cfg.train->first, cfg.train->last)); });

	const auto test = data.cleaned.slice_years(cfg.test->first, cfg.test->last);
	const std::size_t first = *data.corrected.position_of(test.start());
	auto values = stage("predict", [&] { return model->predict_range(data.corrected, first, test.size()); });
	DailySeries model_space(test.start(), std::move(values), kCorrectedPredictionColumn);
	auto predicted = stage("invert", [&] { return to_irradiance(data.preprocessor, model_space); });
	auto report = stage("evaluate", [&] {
		return eval::metrics(eval::ForecastRun::align(test, predicted, to_string(cfg.model), seed));
	});
	return {std::move(model), std::move(model_space), std::move(predicted), report};
}

PipelineResult run_experiment(const DailySeries& raw, const PipelineConfig& cfg) {
	if (!cfg.train || !cfg.test) {
		throw ConfigError("run_experiment needs resolved train and test spans");
	}
	cfg.validate();
	return run_models(prepare(raw, cfg), cfg);
}

PipelineResult run_models(PreparedData data, const PipelineConfig& cfg) {
	PipelineResult result{std::move(data), {}, std::nullopt, {}};

	const auto n = static_cast<std::size_t>(cfg.restarts);
	std::vector<std::optional<FitOutcome>> slots(n);
	std::vector<std::exception_ptr> errors(n);
	std::size_t n_threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
	                                         : static_cast<std::size_t>(cfg.threads);
	n_threads = std::min(n_threads, n);

	// restart i always uses seed + i, whichever worker picks it up
	auto work = [&](std::size_t worker) {
		for (std::size_t i = worker; i < n; i += n_threads) {
			try {
				slots[i].emplace(fit_and_forecast(result.data, cfg, cfg.seed + i));
			} catch (...) {
				errors[i] = std::current_exception();
			}
		}
	};
	if (n_threads <= 1) {
		work(0);
	} else {
		std::vector<std::jthread> pool;
		for (std::size_t w = 0; w < n_threads; ++w) {
			pool.emplace_back(work, w);
		}
	}
	for (std::size_t i = 0; i < n; ++i) {
		if (errors[i]) {
			std::rethrow_exception(errors[i]);
		}
		result.runs.push_back(std::move(*slots[i]));
	}

	const auto test = result.data.cleaned.slice_years(cfg.test->first, cfg.test->last);
	result.primary = eval::ForecastRun::align(test, result.runs.front().predicted, to_string(cfg.model), cfg.seed);
	if (n >= 2) {
		std::vector<eval::MetricsReport> reports;
		for (const auto& r : result.runs) {
			reports.push_back(r.metrics);
		}
		result.ci = eval::confidence_interval(reports);
	}
	return result;
}

ModelFile make_model_file(const Forecaster& model, const std::optional<preprocess::Preprocessor>& pre,
                          const PipelineConfig& cfg) {
	ModelFile f;
	f.set("model", to_string(model.kind()));
	f.set("preprocess", static_cast<long long>(pre ? 1 : 0));
	if (cfg.train) {
		f.set("train_years", cfg.train->str());
	}
	if (pre) {
		f.set("latitude_rad", pre->site().latitude());
		f.set("solar_constant", pre->site().solar_constant());
		f.set("half_width", static_cast<long long>(pre->factors().half_width));
		ModelFile::Block b{"factors", {"day", "y_star", "n_years"}, {}};
		for (std::size_t s = 0; s < 365; ++s) {
			b.rows.push_back({static_cast<double>(s + 1), pre->factors().final[s],
			                  static_cast<double>(pre->factors().n_years_used[s])});
		}
		f.add_block(std::move(b));
	}
	model.save(f);
	return f;
}

std::optional<preprocess::Preprocessor> preprocessor_from(const ModelFile& file) {
	if (file.get_int("preprocess") == 0) {
		return std::nullopt;
	}
	preprocess::SeasonalFactors factors;
	factors.grand_mean = 1.0;
	factors.half_width = static_cast<int>(file.get_int("half_width"));
	const auto& rows = file.block("factors").rows;
	if (rows.size() != 365) {
		throw DataError("model file: factors block must have 365 rows");
	}
	for (std::size_t s = 0; s < 365; ++s) {
		factors.final[s] = factors.raw[s] = rows[s][1];
		factors.n_years_used[s] = static_cast<int>(rows[s][2]);
	}
	return preprocess::Preprocessor(
	    solar::SiteSpec(file.get_double("latitude_rad"), file.get_double("solar_constant")), factors);
}

namespace {

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write '" + path.string() + "'");
	}
	body(out);
}

preprocess::SeasonalFactors identity_factors() {
	preprocess::SeasonalFactors f;
	f.grand_mean = 1.0;
	f.raw.fill(1.0);
	f.final.fill(1.0);
	return f;
}

} // namespace

PipelineResult run_pipeline(PipelineConfig cfg) {
	cfg.validate();
	const auto raw = stage("load", [&] { return load_csv_file(cfg.input_csv); });
	stage("config", [&] { resolve_spans(cfg, raw); });

	const fs::path dir = resolve_output_dir(cfg.output_dir);
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) {
		throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
	}

	// artifacts are written as soon as their stage finishes so a later failure
	// leaves the earlier ones in place
	const auto site = solar::SiteSpec::from_degrees(cfg.latitude_deg, cfg.solar_constant);
	auto cleaned = stage("clean", [&] { return clean(raw, site); });
	const auto cleaned_path = (dir / "cleaned.csv").string();
	write_csv_file(cleaned_path, cleaned.series);
	auto data = prepare_cleaned(load_csv_file(cleaned_path), std::move(cleaned.report), cfg);
	write_text(dir / "factors.csv", [&](std::ostream& o) {
		preprocess::write_factors_csv(o, data.preprocessor ? data.preprocessor->factors() : identity_factors());
	});
	const CsvSchema corrected_schema{kCorrectedColumn, true, -1};
	const auto corrected_path = (dir / "corrected.csv").string();
	write_csv_file(corrected_path, data.corrected, corrected_schema);
	data.corrected = load_csv_file(corrected_path, corrected_schema);

	auto result = run_models(std::move(data), cfg);
	const auto& first = result.runs.front();
	make_model_file(*first.model, result.data.preprocessor, cfg).save((dir / "model.txt").string());
	const CsvSchema prediction_schema{kPredictionColumn, false, 3};
	const auto predictions_path = (dir / "predictions.csv").string();
	write_csv_file(predictions_path, first.predicted, prediction_schema);

	const auto id = to_string(cfg.model) + (cfg.preprocess ? "" : "_raw");
	const auto test = result.data.cleaned.slice_years(cfg.test->first, cfg.test->last);
	result.primary = eval::ForecastRun::align(test, load_csv_file(predictions_path, prediction_schema), id, cfg.seed);
	const auto report = stage("evaluate", [&] { return eval::metrics(result.primary); });
	write_text(dir / "metrics.csv", [&](std::ostream& o) { eval::write_metrics_csv(o, id, report); });
	write_text(dir / "seasonal.csv",
	           [&](std::ostream& o) { eval::write_seasonal_csv(o, eval::seasonal_breakdown(result.primary)); });
	write_text(dir / "monthly.csv",
	           [&](std::ostream& o) { eval::write_monthly_csv(o, eval::monthly_aggregate_error(result.primary)); });
	if (result.ci) {
		write_text(dir / "restarts.csv", [&](std::ostream& o) {
			o << "seed,rmse,nrmse,mbe,r_squared,n\n";
			for (std::size_t i = 0; i < result.runs.size(); ++i) {
				const auto& m = result.runs[i].metrics;
				o << cfg.seed + i << ',' << eval::format_g6(m.rmse) << ',' << eval::format_g6(m.nrmse) << ','
				  << eval::format_g6(m.mbe) << ',' << eval::format_g6(m.r_squared) << ',' << m.n << '\n';
			}
		});
		write_text(dir / "ci.csv", [&](std::ostream& o) { eval::write_ci_csv(o, *result.ci); });
	}
	return result;
}

} // namespace solarcast
