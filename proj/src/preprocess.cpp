#include "solarcast/preprocess.hpp"

#include "solarcast/error.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

namespace solarcast::preprocess {

DailySeries clearness_index(const DailySeries& series, const solar::H0Table& h0) {
	const auto slots = series.slots();
	std::vector<double> out(series.size(), DailySeries::kMissing);
	for (std::size_t i = 0; i < series.size(); ++i) {
		if (series.is_missing(i)) {
			continue;
		}
		const double denom = h0.at(slots[i]);
		if (denom <= 0.0) {
			throw DataError("extraterrestrial irradiation is zero on " + series.day_at(i).iso() +
			                "; clearness index undefined");
		}
		out[i] = series[i] / denom;
	}
	return series.with_values(std::move(out));
}

DailySeries moving_average_ratio(const DailySeries& clearness, int half_width) {
	if (half_width < 0) {
		throw ConfigError("moving average half-width must be >= 0");
	}
	const auto m = static_cast<std::size_t>(half_width);
	const std::size_t window = 2 * m + 1;
	const std::size_t n = clearness.size();
	if (n < window) {
		throw DataError("moving_average_ratio needs at least " + std::to_string(window) +
		                " days, got " + std::to_string(n));
	}

	std::vector<double> out(n, DailySeries::kMissing);
	for (std::size_t t = m; t + m < n; ++t) {
		// straight sum per window keeps every denominator independent of the others
		double sum = 0.0;
		bool complete = true;
		for (std::size_t j = t - m; j <= t + m; ++j) {
			if (clearness.is_missing(j)) {
				complete = false;
				break;
			}
			sum += clearness[j];
		}
		if (!complete) {
			continue;
		}
		const double mean = sum / static_cast<double>(window);
		if (mean == 0.0) {
			throw DataError("moving average is zero around " + clearness.day_at(t).iso());
		}
		out[t] = clearness[t] / mean;
	}
	return clearness.with_values(std::move(out));
}

SeasonalFactors seasonal_factors(const DailySeries& ratios, int half_width) {
	SeasonalFactors f;
	f.half_width = half_width;
	std::array<double, 365> sums{};
	const auto slots = ratios.slots();
	for (std::size_t i = 0; i < ratios.size(); ++i) {
		if (ratios.is_missing(i)) {
			continue;
		}
		const auto s = static_cast<std::size_t>(slots[i] - 1);
		sums[s] += ratios[i];
		f.n_years_used[s] += 1;
	}

	double total = 0.0;
	for (std::size_t s = 0; s < 365; ++s) {
		if (f.n_years_used[s] == 0) {
			throw DataError("no defined moving-average ratio for day-of-year " + std::to_string(s + 1));
		}
		f.raw[s] = sums[s] / f.n_years_used[s];
		total += f.raw[s];
	}
	f.grand_mean = total / 365.0;
	for (std::size_t s = 0; s < 365; ++s) {
		f.final[s] = f.raw[s] / f.grand_mean;
	}
	return f;
}

void write_factors_csv(std::ostream& out, const SeasonalFactors& factors) {
	out << "day,y_star,n_years\n";
	char buf[64];
	for (std::size_t s = 0; s < 365; ++s) {
		auto res = std::to_chars(buf, buf + sizeof buf, factors.final[s]);
		out << (s + 1) << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << ','
		    << factors.n_years_used[s] << '\n';
	}
}

SeasonalFactors read_factors_csv(std::istream& in) {
	SeasonalFactors f;
	f.grand_mean = 1.0;
	std::string line;
	std::size_t line_no = 0;
	std::array<bool, 365> seen{};
	while (std::getline(in, line)) {
		++line_no;
		if (!line.empty() && line.back() == '\r') {
			line.pop_back();
		}
		if (line.empty()) {
			continue;
		}
		if (line_no == 1) {
			if (line != "day,y_star,n_years") {
				throw DataError("factors line 1: expected header 'day,y_star,n_years'");
			}
			continue;
		}
		const auto c1 = line.find(',');
		const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
		int day = 0;
		double y = 0.0;
		int years = 0;
		const char* b = line.data();
		bool ok = c2 != std::string::npos;
		ok = ok && std::from_chars(b, b + c1, day).ptr == b + c1;
		ok = ok && std::from_chars(b + c1 + 1, b + c2, y).ptr == b + c2;
		ok = ok && std::from_chars(b + c2 + 1, b + line.size(), years).ptr == b + line.size();
		if (!ok || day < 1 || day > 365) {
			throw DataError("factors line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
		}
		const auto s = static_cast<std::size_t>(day - 1);
		if (seen[s]) {
			throw DataError("factors line " + std::to_string(line_no) + ": duplicate day " + std::to_string(day));
		}
		seen[s] = true;
		f.final[s] = y;
		f.raw[s] = y;
		f.n_years_used[s] = years;
	}
	for (std::size_t s = 0; s < 365; ++s) {
		if (!seen[s]) {
			throw DataError("factors file has no row for day " + std::to_string(s + 1));
		}
	}
	return f;
}

DailySeries deseasonalize(const DailySeries& clearness, const SeasonalFactors& factors) {
	const auto slots = clearness.slots();
	std::vector<double> out(clearness.size());
	for (std::size_t i = 0; i < clearness.size(); ++i) {
		out[i] = clearness[i] / factors.at(slots[i]);
	}
	return clearness.with_values(std::move(out));
}

Preprocessor::Preprocessor(solar::SiteSpec site, SeasonalFactors factors)
    : site_(site), h0_(site), factors_(factors) {
	for (std::size_t s = 0; s < 365; ++s) {
		if (!(factors_.final[s] > 0.0) || !std::isfinite(factors_.final[s])) {
			throw NumericalError("seasonal factor for day-of-year " + std::to_string(s + 1) +
			                     " is not a positive finite number");
		}
	}
}

Preprocessor Preprocessor::fit(const DailySeries& series, const solar::SiteSpec& site,
                               int half_width) {
	const solar::H0Table h0(site);
	const auto s = clearness_index(series, h0);
	const auto ratios = moving_average_ratio(s, half_width);
	return Preprocessor(site, seasonal_factors(ratios, half_width));
}

double Preprocessor::scale_for(const DayIndex& day) const {
	const int slot = day.slot();
	return h0_.at(slot) * factors_.at(slot);
}

double Preprocessor::apply_one(const DayIndex& day, double value) const {
	const int slot = day.slot();
	const double h0 = h0_.at(slot);
	if (h0 <= 0.0) {
		throw DataError("extraterrestrial irradiation is zero on " + day.iso());
	}
	// same operation order as deseasonalize(clearness_index(...))
	return value / h0 / factors_.at(slot);
}

DailySeries Preprocessor::apply(const DailySeries& series) const {
	return deseasonalize(clearness_index(series, h0_), factors_);
}

double Preprocessor::invert_one(const DayIndex& day, double corrected) const {
	return corrected * factors_.at(day.slot()) * h0_.at(day.slot());
}

DailySeries Preprocessor::invert(std::span<const double> corrected,
                                 std::span<const DayIndex> days) const {
	if (corrected.size() != days.size()) {
		throw DataError("invert: " + std::to_string(corrected.size()) + " values for " +
		                std::to_string(days.size()) + " days");
	}
	if (days.empty()) {
		throw DataError("invert: no days requested");
	}
	for (std::size_t i = 1; i < days.size(); ++i) {
		if (days[i].ordinal() != days[i - 1].ordinal() + 1) {
			throw DataError("invert: days must be consecutive (gap after " + days[i - 1].iso() + ")");
		}
	}
	std::vector<double> out(days.size());
	for (std::size_t i = 0; i < days.size(); ++i) {
		out[i] = invert_one(days[i], corrected[i]);
	}
	return DailySeries(days.front(), std::move(out));
}

} // namespace solarcast::preprocess
