#include "solarcast/evaluation.hpp"

#include "solarcast/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

namespace solarcast::eval {

ForecastRun ForecastRun::align(const DailySeries& measured, const DailySeries& predicted,
                               std::string model_id, std::uint64_t seed) {
	ForecastRun run;
	run.model_id = std::move(model_id);
	run.seed = seed;
	for (std::size_t i = 0; i < predicted.size(); ++i) {
		if (predicted.is_missing(i)) {
			continue;
		}
		const DayIndex day = predicted.day_at(i);
		const auto j = measured.position_of(day);
		if (!j || measured.is_missing(*j)) {
			continue;
		}
		run.pairs.push_back({day, measured[*j], predicted[i]});
	}
	if (run.pairs.empty()) {
		throw DataError("measured and predicted series share no days");
	}
	return run;
}

void ForecastRun::validate() const {
	std::set<std::int64_t> seen;
	for (const auto& p : pairs) {
		if (!seen.insert(p.day.ordinal()).second) {
			throw DataError("forecast run repeats day " + p.day.iso());
		}
		if (!(p.measured >= 0.0) || !std::isfinite(p.predicted)) {
			throw DataError("forecast run has invalid values on " + p.day.iso());
		}
	}
}

namespace {

MetricsReport metrics_of(std::span<const ForecastPair> pairs) {
	if (pairs.empty()) {
		throw DataError("metrics of an empty run");
	}
	const auto n = static_cast<double>(pairs.size());
	double sq = 0.0;
	double bias = 0.0;
	double m2 = 0.0;
	double mean_c = 0.0;
	double mean_m = 0.0;
	for (const auto& p : pairs) {
		const double e = p.predicted - p.measured;
		sq += e * e;
		bias += e;
		m2 += p.measured * p.measured;
		mean_c += p.predicted;
		mean_m += p.measured;
	}
	if (!(m2 > 0.0)) {
		throw DataError("nRMSE undefined: every measured value is zero");
	}
	mean_c /= n;
	mean_m /= n;
	double cov = 0.0;
	double var_c = 0.0;
	double var_m = 0.0;
	for (const auto& p : pairs) {
		cov += (p.predicted - mean_c) * (p.measured - mean_m);
		var_c += (p.predicted - mean_c) * (p.predicted - mean_c);
		var_m += (p.measured - mean_m) * (p.measured - mean_m);
	}

	MetricsReport r;
	r.n = pairs.size();
	r.rmse = std::sqrt(sq / n);
	r.nrmse = r.rmse / std::sqrt(m2 / n);
	r.mbe = bias / n;
	r.r_squared = (var_c > 0.0 && var_m > 0.0) ? (cov * cov) / (var_c * var_m) : std::nan("");
	return r;
}

} // namespace

MetricsReport metrics(const ForecastRun& run) {
	run.validate();
	return metrics_of(run.pairs);
}

std::string to_string(Season season) {
	switch (season) {
	case Season::Winter:
		return "winter";
	case Season::Spring:
		return "spring";
	case Season::Summer:
		return "summer";
	case Season::Autumn:
		return "autumn";
	}
	return "unknown";
}

Season season_of(const DayIndex& day) {
	const unsigned m = day.month();
	if (m == 12 || m <= 2) {
		return Season::Winter;
	}
	if (m <= 5) {
		return Season::Spring;
	}
	if (m <= 8) {
		return Season::Summer;
	}
	return Season::Autumn;
}

SeasonalReport seasonal_breakdown(const ForecastRun& run) {
	if (run.pairs.empty()) {
		throw DataError("seasonal breakdown of an empty run");
	}
	std::array<std::vector<ForecastPair>, 4> buckets;
	for (const auto& p : run.pairs) {
		buckets[static_cast<std::size_t>(season_of(p.day))].push_back(p);
	}
	SeasonalReport report;
	for (std::size_t s = 0; s < 4; ++s) {
		if (!buckets[s].empty()) {
			report.by_season[s] = metrics_of(buckets[s]);
		}
	}
	return report;
}

MonthlyReport monthly_aggregate_error(const ForecastRun& run) {
	if (run.pairs.empty()) {
		throw DataError("monthly error of an empty run");
	}
	std::map<std::pair<int, unsigned>, std::pair<double, double>> sums;
	for (const auto& p : run.pairs) {
		const auto c = p.day.civil();
		auto& s = sums[{c.year, c.month}];
		s.first += p.measured;
		s.second += p.predicted;
	}
	MonthlyReport report;
	double total = 0.0;
	for (const auto& [key, s] : sums) {
		if (!(s.first > 0.0)) {
			char buf[64];
			std::snprintf(buf, sizeof buf, "%04d-%02u skipped: zero measured total", key.first, key.second);
			report.warnings.emplace_back(buf);
			continue;
		}
		const double e = std::abs(s.second - s.first) / s.first;
		report.months.push_back({key.first, key.second, s.first, s.second, e});
		total += e;
	}
	if (report.months.empty()) {
		throw DataError("monthly error: every month has zero measured total");
	}
	report.mean_error_pct = 100.0 * total / static_cast<double>(report.months.size());
	return report;
}

double student_t_975(std::size_t degrees_of_freedom) {
	if (degrees_of_freedom < 1) {
		throw DataError("Student t needs at least one degree of freedom");
	}
	const boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
	return boost::math::quantile(dist, 0.975);
}

MeanCi mean_ci(std::span<const double> values) {
	const std::size_t n = values.size();
	if (n < 2) {
		throw DataError("confidence interval needs at least two runs");
	}
	double mean = 0.0;
	for (double v : values) {
		mean += v;
	}
	mean /= static_cast<double>(n);
	double ss = 0.0;
	for (double v : values) {
		ss += (v - mean) * (v - mean);
	}
	const double sd = std::sqrt(ss / static_cast<double>(n - 1));
	return {mean, student_t_975(n - 1) * sd / std::sqrt(static_cast<double>(n)), n};
}

CiSummary confidence_interval(std::span<const MetricsReport> runs) {
	auto field = [&](auto member) {
		std::vector<double> v;
		v.reserve(runs.size());
		for (const auto& r : runs) {
			v.push_back(r.*member);
		}
		return mean_ci(v);
	};
	return {field(&MetricsReport::rmse), field(&MetricsReport::nrmse), field(&MetricsReport::mbe),
	        field(&MetricsReport::r_squared)};
}

std::vector<ComparisonRow> compare_models(const std::map<std::string, ForecastRun>& runs) {
	if (runs.empty()) {
		throw DataError("compare_models: no runs");
	}
	auto days_of = [](const ForecastRun& r) {
		std::vector<std::int64_t> d;
		d.reserve(r.pairs.size());
		for (const auto& p : r.pairs) {
			d.push_back(p.day.ordinal());
		}
		std::sort(d.begin(), d.end());
		return d;
	};
	const auto reference = days_of(runs.begin()->second);
	std::vector<ComparisonRow> rows;
	for (const auto& [id, run] : runs) {
		if (days_of(run) != reference) {
			throw DataError("compare_models: run '" + id + "' covers different days than '" +
			                runs.begin()->first + "'");
		}
		rows.push_back({id, metrics(run).nrmse});
	}
	return rows;
}

std::string format_g6(double value) {
	if (std::isnan(value)) {
		return "nan";
	}
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.6g", value);
	return buf;
}

void write_metrics_csv(std::ostream& out, const std::string& model_id, const MetricsReport& m) {
	out << "model,n,rmse,nrmse,mbe,r_squared\n";
	out << model_id << ',' << m.n << ',' << format_g6(m.rmse) << ',' << format_g6(m.nrmse) << ','
	    << format_g6(m.mbe) << ',' << format_g6(m.r_squared) << '\n';
}

void write_seasonal_csv(std::ostream& out, const SeasonalReport& report) {
	out << "season,n,rmse,nrmse,mbe,r_squared\n";
	for (Season s : kSeasons) {
		const auto& m = report[s];
		if (!m) {
			continue;
		}
		out << to_string(s) << ',' << m->n << ',' << format_g6(m->rmse) << ',' << format_g6(m->nrmse) << ','
		    << format_g6(m->mbe) << ',' << format_g6(m->r_squared) << '\n';
	}
}

void write_monthly_csv(std::ostream& out, const MonthlyReport& report) {
	out << "month,sum_measured,sum_predicted,relative_error\n";
	char month[16];
	for (const auto& m : report.months) {
		std::snprintf(month, sizeof month, "%04d-%02u", m.year, m.month);
		out << month << ',' << format_g6(m.sum_measured) << ',' << format_g6(m.sum_predicted) << ','
		    << format_g6(m.relative_error) << '\n';
	}
	out << "mean_pct,,," << format_g6(report.mean_error_pct) << '\n';
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
	out << "model,nrmse_pct\n";
	for (const auto& r : rows) {
		out << r.model_id << ',' << format_g6(100.0 * r.nrmse) << '\n';
	}
}

void write_ci_csv(std::ostream& out, const CiSummary& ci) {
	out << "metric,mean,half_width_95,n_runs\n";
	auto row = [&](const char* name, const MeanCi& c) {
		out << name << ',' << format_g6(c.mean) << ',' << format_g6(c.half_width) << ',' << c.n_runs << '\n';
	};
	row("rmse", ci.rmse);
	row("nrmse", ci.nrmse);
	row("mbe", ci.mbe);
	row("r_squared", ci.r_squared);
}

} // namespace solarcast::eval
