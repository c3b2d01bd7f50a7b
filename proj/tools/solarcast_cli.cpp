#include "solarcast/error.hpp"
#include "solarcast/pipeline.hpp"
#include "solarcast/spectral.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace solarcast;
namespace fs = std::filesystem;

namespace {

struct Site {
	double latitude_deg = 41.917;
	double solar_constant = solar::SiteSpec::kDefaultSolarConstant;

	solar::SiteSpec spec() const { return solar::SiteSpec::from_degrees(latitude_deg, solar_constant); }
};

void add_site(CLI::App* cmd, Site& site) {
	cmd->add_option("--latitude", site.latitude_deg, "site latitude in degrees")->capture_default_str();
	cmd->add_option("--solar-constant", site.solar_constant, "W/m2")->capture_default_str();
}

void add_model_params(CLI::App* cmd, ModelParams& p, std::size_t& lags, std::size_t& hidden) {
	cmd->add_option("--ar-order", p.ar_order)->capture_default_str();
	cmd->add_option("--arma-p", p.arma_p)->capture_default_str();
	cmd->add_option("--arma-q", p.arma_q)->capture_default_str();
	cmd->add_option("--classes", p.n_classes, "markov/bayes classes")->capture_default_str();
	cmd->add_option("--chain-order", p.chain_order, "markov/bayes order")->capture_default_str();
	cmd->add_option("--smoothing", p.smoothing)->capture_default_str();
	cmd->add_option("--knn-k", p.knn.k)->capture_default_str();
	cmd->add_option("--knn-window", p.knn.window)->capture_default_str();
	cmd->add_option("--lags", lags, "MLP inputs")->capture_default_str();
	cmd->add_option("--hidden", hidden, "MLP hidden units")->capture_default_str();
	cmd->add_option("--max-epochs", p.lm.max_epochs)->capture_default_str();
	cmd->add_option("--max-fail", p.lm.max_fail)->capture_default_str();
}

void finish_params(ModelParams& p, std::size_t lags, std::size_t hidden) {
	p.layout.sizes = {lags, hidden, 1};
	p.layout.validate();
	p.lm.validate();
	p.knn.validate();
}

std::ofstream open_out(const std::string& path) {
	if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
		fs::create_directories(parent);
	}
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write '" + path + "'");
	}
	return out;
}

/// Loads a `date,<column>` CSV whatever its value column is called.
DailySeries load_any(const std::string& path, bool allow_negative = true) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open '" + path + "'");
	}
	std::string header;
	std::getline(in, header);
	if (!header.empty() && header.back() == '\r') {
		header.pop_back();
	}
	if (!header.starts_with("date,") || header.size() <= 5) {
		throw DataError(path + ": line 1: expected header 'date,<column>'");
	}
	return load_csv_file(path, {header.substr(5), allow_negative, -1});
}

preprocess::SeasonalFactors load_factors(const std::string& path) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open '" + path + "'");
	}
	try {
		return preprocess::read_factors_csv(in);
	} catch (const DataError& e) {
		throw DataError(path + ": " + e.what());
	}
}

DailySeries span_of(const DailySeries& s, const std::string& years) {
	const auto span = YearSpan::parse(years);
	return s.slice_years(span.first, span.last);
}

std::string run_id(const std::string& path) {
	const fs::path p(path);
	if (p.stem() == "predictions" && p.has_parent_path() && !p.parent_path().filename().empty()) {
		return p.parent_path().filename().string();
	}
	return p.stem().string();
}

int exit_code(Error::Category c) {
	return static_cast<int>(c);
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Daily global irradiation forecasting toolkit"};
	app.require_subcommand(1);
	app.set_config("--config", "", "INI/TOML file with option defaults");

	// synth --------------------------------------------------------------
	SynthConfig synth;
	std::string synth_out = "synthetic.csv";
	auto* c_synth = app.add_subcommand("synth", "generate a synthetic daily GHI series");
	c_synth->add_option("--years", synth.n_years)->capture_default_str();
	c_synth->add_option("--start-year", synth.start_year)->capture_default_str();
	c_synth->add_option("--seed", synth.seed)->capture_default_str();
	c_synth->add_option("--latitude", synth.latitude_deg)->capture_default_str();
	c_synth->add_option("--clear-mean", synth.clear_sky_fraction_mean)->capture_default_str();
	c_synth->add_option("--amplitude", synth.modulation_amplitude)->capture_default_str();
	c_synth->add_option("--ar-coeff", synth.ar_coeff)->capture_default_str();
	c_synth->add_option("--noise-std", synth.noise_std)->capture_default_str();
	c_synth->add_option("-o,--output", synth_out)->capture_default_str();

	// clean --------------------------------------------------------------
	Site site;
	std::string input;
	std::string clean_out = "cleaned.csv";
	std::string report_path;
	auto* c_clean = app.add_subcommand("clean", "replace missing and out-of-range days");
	add_site(c_clean, site);
	c_clean->add_option("-i,--input", input)->required();
	c_clean->add_option("-o,--output", clean_out)->capture_default_str();
	c_clean->add_option("--report", report_path, "CSV listing every replaced day");

	// h0-table -----------------------------------------------------------
	std::string h0_out = "h0.csv";
	auto* c_h0 = app.add_subcommand("h0-table", "extraterrestrial irradiation per day of year");
	add_site(c_h0, site);
	c_h0->add_option("-o,--output", h0_out)->capture_default_str();

	// preprocess ---------------------------------------------------------
	std::string train_years;
	std::string test_years;
	std::string pre_factors = "factors.csv";
	std::string pre_out = "corrected.csv";
	int half_width = preprocess::kDefaultHalfWidth;
	auto* c_pre = app.add_subcommand("preprocess", "fit seasonal factors and write the corrected series");
	add_site(c_pre, site);
	c_pre->add_option("-i,--input", input)->required();
	c_pre->add_option("--train-years", train_years, "years used to fit the factors, e.g. 1971:1987")->required();
	c_pre->add_option("--half-width", half_width)->capture_default_str();
	c_pre->add_option("--factors", pre_factors)->capture_default_str();
	c_pre->add_option("-o,--output", pre_out)->capture_default_str();

	// spectrum -----------------------------------------------------------
	std::string spec_out = "spectrum.csv";
	auto* c_spec = app.add_subcommand("spectrum", "periodogram and Fisher g-test of a daily CSV");
	c_spec->add_option("input", input)->required();
	c_spec->add_option("-o,--output", spec_out)->capture_default_str();

	// train --------------------------------------------------------------
	ModelParams params;
	std::size_t lags = 8;
	std::size_t hidden = 3;
	std::string model_name = "mlp";
	std::string train_factors;
	std::string train_out = "model.txt";
	auto* c_train = app.add_subcommand("train", "fit a model on the train years of a series");
	add_site(c_train, site);
	c_train->add_option("-i,--input", input, "cleaned.csv, or corrected.csv with --factors")->required();
	c_train->add_option("--model", model_name, "naive|ar|arma|markov|bayes|knn|mlp")->capture_default_str();
	c_train->add_option("--train-years", train_years)->required();
	c_train->add_option("--factors", train_factors, "embed these seasonal factors (input is corrected)");
	c_train->add_option("--seed", params.seed)->capture_default_str();
	add_model_params(c_train, params, lags, hidden);
	c_train->add_option("-o,--output", train_out)->capture_default_str();

	// predict ------------------------------------------------------------
	std::string pred_model;
	std::string pred_out = "predictions.csv";
	auto* c_pred = app.add_subcommand("predict", "one-step-ahead forecasts for the test years");
	c_pred->add_option("--model", pred_model)->required();
	c_pred->add_option("-i,--input", input, "series the model was trained on")->required();
	c_pred->add_option("--test-years", test_years)->required();
	c_pred->add_option("-o,--output", pred_out)->capture_default_str();

	// invert -------------------------------------------------------------
	std::string inv_factors;
	std::string inv_model;
	std::string inv_out = "predictions.csv";
	auto* c_inv = app.add_subcommand("invert", "map corrected forecasts back to Wh/m2");
	add_site(c_inv, site);
	c_inv->add_option("-i,--input", input)->required();
	c_inv->add_option("--factors", inv_factors, "factors.csv");
	c_inv->add_option("--model", inv_model, "take factors and site from a model file instead");
	c_inv->add_option("-o,--output", inv_out)->capture_default_str();

	// evaluate -----------------------------------------------------------
	std::string measured_path;
	std::string predicted_path;
	std::string model_id;
	std::string out_dir = ".";
	auto* c_eval = app.add_subcommand("evaluate", "error metrics of one forecast");
	c_eval->add_option("--measured", measured_path)->required();
	c_eval->add_option("--predicted", predicted_path)->required();
	c_eval->add_option("--id", model_id, "model id (default: from the file name)");
	c_eval->add_option("--out-dir", out_dir)->capture_default_str();

	// compare ------------------------------------------------------------
	std::vector<std::string> runs;
	std::string cmp_out = "table1.csv";
	auto* c_cmp = app.add_subcommand("compare", "nRMSE table over several forecasts");
	c_cmp->add_option("runs", runs, "prediction CSVs")->required();
	c_cmp->add_option("--measured", measured_path)->required();
	c_cmp->add_option("-o,--output", cmp_out)->capture_default_str();

	// run ----------------------------------------------------------------
	PipelineConfig cfg;
	bool no_preprocess = false;
	auto* c_run = app.add_subcommand("run", "clean, preprocess, train, forecast, invert, evaluate");
	c_run->add_option("-i,--input", cfg.input_csv)->required();
	c_run->add_option("--latitude", cfg.latitude_deg)->capture_default_str();
	c_run->add_option("--solar-constant", cfg.solar_constant)->capture_default_str();
	c_run->add_option("--train-years", train_years, "default: all but the last two years");
	c_run->add_option("--test-years", test_years, "default: the last two years");
	c_run->add_option("--model", model_name)->capture_default_str();
	c_run->add_flag("--no-preprocess", no_preprocess, "fit on raw Wh/m2");
	c_run->add_option("--half-width", cfg.half_width)->capture_default_str();
	c_run->add_option("--restarts", cfg.restarts)->capture_default_str();
	c_run->add_option("--seed", cfg.seed)->capture_default_str();
	c_run->add_option("--threads", cfg.threads, "0 = all cores")->capture_default_str();
	c_run->add_option("--out-dir", cfg.output_dir, "overridden by SOLARCAST_OUTPUT_DIR")->capture_default_str();
	add_model_params(c_run, cfg.params, lags, hidden);

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::CallForAllHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return 1;
	}

	try {
		if (*c_synth) {
			const auto s = generate_synthetic(synth);
			write_csv_file(synth_out, s);
			std::printf("%zu days written to %s\n", s.size(), synth_out.c_str());
		} else if (*c_clean) {
			const auto result = clean(load_csv_file(input), site.spec());
			write_csv_file(clean_out, result.series);
			if (!report_path.empty()) {
				auto out = open_out(report_path);
				out << "date,old_value,new_value\n";
				for (const auto& r : result.report.replaced) {
					out << r.day.iso() << ',' << (r.old_value ? eval::format_g6(*r.old_value) : "") << ','
					    << eval::format_g6(r.new_value) << '\n';
				}
			}
			std::printf("%zu days replaced (%s)\n", result.report.replaced.size(), result.report.rule.c_str());
		} else if (*c_h0) {
			const solar::H0Table table(site.spec());
			auto out = open_out(h0_out);
			out << "day,h0_wh_m2\n";
			for (int d = 1; d <= 365; ++d) {
				out << d << ',' << eval::format_g6(table.at(d)) << '\n';
			}
		} else if (*c_pre) {
			const auto series = load_csv_file(input);
			const auto span = YearSpan::parse(train_years);
			const auto pre = preprocess::Preprocessor::fit(series.slice_years(span.first, span.last), site.spec(),
			                                               half_width);
			auto fo = open_out(pre_factors);
			preprocess::write_factors_csv(fo, pre.factors());
			write_csv_file(pre_out, pre.apply(series), {kCorrectedColumn, true, -1});
		} else if (*c_spec) {
			const auto series = load_any(input);
			const auto p = spectral::periodogram(series.values());
			auto out = open_out(spec_out);
			out << "period_days,power\n";
			for (std::size_t i = 0; i < p.ordinates.size(); ++i) {
				out << eval::format_g6(p.period_at(i)) << ',' << eval::format_g6(p.ordinates[i]) << '\n';
			}
			const auto g = spectral::fisher_g_test(p);
			std::printf("dominant period %.6g days, Fisher g %.6g, p-value %.6g\n", g.peak_period, g.g, g.p_value);
		} else if (*c_train) {
			finish_params(params, lags, hidden);
			const auto kind = parse_model_kind(model_name);
			std::optional<preprocess::Preprocessor> pre;
			DailySeries series = train_factors.empty() ? load_csv_file(input) : load_any(input);
			if (!train_factors.empty()) {
				pre.emplace(site.spec(), load_factors(train_factors));
			}
			auto model = make_forecaster(kind, params);
			model->fit(span_of(series, train_years));
			PipelineConfig meta;
			meta.train = YearSpan::parse(train_years);
			make_model_file(*model, pre, meta).save(train_out);
			if (const auto* h = training_history(*model)) {
				std::printf("stopped after %zu epochs (%s), best epoch %zu\n", h->epochs.size(),
				            mlp::to_string(h->stop_reason).c_str(), h->best_epoch);
			}
		} else if (*c_pred) {
			const auto file = ModelFile::load(pred_model);
			const auto model = load_forecaster(file);
			const bool corrected = file.get_int("preprocess") != 0;
			const auto series = load_any(input, corrected);
			const auto test = span_of(series, test_years);
			const auto first = *series.position_of(test.start());
			DailySeries pred(test.start(), model->predict_range(series, first, test.size()));
			if (corrected) {
				write_csv_file(pred_out, pred, {kCorrectedPredictionColumn, true, -1});
			} else {
				write_csv_file(pred_out, to_irradiance(std::nullopt, pred), {kPredictionColumn, false});
			}
		} else if (*c_inv) {
			std::optional<preprocess::Preprocessor> pre;
			if (!inv_model.empty()) {
				pre = preprocessor_from(ModelFile::load(inv_model));
				if (!pre) {
					throw ConfigError(inv_model + " was trained without preprocessing; nothing to invert");
				}
			} else if (!inv_factors.empty()) {
				pre.emplace(site.spec(), load_factors(inv_factors));
			} else {
				throw ConfigError("invert needs --factors or --model");
			}
			write_csv_file(inv_out, to_irradiance(pre, load_any(input)), {kPredictionColumn, false});
		} else if (*c_eval) {
			const auto id = model_id.empty() ? run_id(predicted_path) : model_id;
			const auto run = eval::ForecastRun::align(load_any(measured_path, false), load_any(predicted_path), id);
			const auto m = eval::metrics(run);
			fs::create_directories(out_dir);
			auto mo = open_out((fs::path(out_dir) / "metrics.csv").string());
			eval::write_metrics_csv(mo, id, m);
			auto so = open_out((fs::path(out_dir) / "seasonal.csv").string());
			eval::write_seasonal_csv(so, eval::seasonal_breakdown(run));
			const auto monthly = eval::monthly_aggregate_error(run);
			auto mm = open_out((fs::path(out_dir) / "monthly.csv").string());
			eval::write_monthly_csv(mm, monthly);
			const std::vector<eval::ComparisonRow> row{{id, m.nrmse}};
			auto to = open_out((fs::path(out_dir) / "table1.csv").string());
			eval::write_comparison_csv(to, row);
			for (const auto& w : monthly.warnings) {
				std::fprintf(stderr, "warning: %s\n", w.c_str());
			}
			std::printf("%s: rmse %.6g nrmse %.6g mbe %.6g r2 %.6g n %zu\n", id.c_str(), m.rmse, m.nrmse, m.mbe,
			            m.r_squared, m.n);
		} else if (*c_cmp) {
			const auto measured = load_any(measured_path, false);
			std::map<std::string, eval::ForecastRun> by_id;
			for (const auto& path : runs) {
				const auto id = run_id(path);
				if (by_id.count(id)) {
					throw ConfigError("two runs share the id '" + id + "'");
				}
				by_id.emplace(id, eval::ForecastRun::align(measured, load_any(path), id));
			}
			const auto rows = eval::compare_models(by_id);
			auto out = open_out(cmp_out);
			eval::write_comparison_csv(out, rows);
		} else if (*c_run) {
			finish_params(cfg.params, lags, hidden);
			cfg.model = parse_model_kind(model_name);
			cfg.preprocess = !no_preprocess;
			if (!train_years.empty()) {
				cfg.train = YearSpan::parse(train_years);
			}
			if (!test_years.empty()) {
				cfg.test = YearSpan::parse(test_years);
			}
			const auto result = run_pipeline(cfg);
			const auto& m = result.runs.front().metrics;
			std::printf("%s%s: rmse %.6g nrmse %.6g mbe %.6g r2 %.6g n %zu\n", to_string(cfg.model).c_str(),
			            cfg.preprocess ? "" : " (raw)", m.rmse, m.nrmse, m.mbe, m.r_squared, m.n);
			if (result.ci) {
				std::printf("nrmse over %zu restarts: %.6g +/- %.6g\n", result.ci->nrmse.n_runs, result.ci->nrmse.mean,
				            result.ci->nrmse.half_width);
			}
		}
	} catch (const Error& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return exit_code(e.category());
	} catch (const fs::filesystem_error& e) {
		std::fprintf(stderr, "error: %s\n", e.what());
		return 2;
	}
	return 0;
}
