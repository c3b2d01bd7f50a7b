#include "solarcast/series.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <utility>

namespace solarcast {

// ---------------------------------------------------------------------------
// DailySeries
// ---------------------------------------------------------------------------

DailySeries::DailySeries(DayIndex start, std::vector<double> values, std::string label)
    : start_(start), values_(std::move(values)), label_(std::move(label)) {
	if (values_.empty()) {
		throw DataError("daily series must hold at least one day");
	}
	for (std::size_t i = 0; i < values_.size(); ++i) {
		if (std::isinf(values_[i])) {
			throw DataError("non-finite value at " + day_at(i).iso());
		}
	}
}

std::optional<std::size_t> DailySeries::position_of(const DayIndex& day) const noexcept {
	const auto offset = day.ordinal() - start_.ordinal();
	if (offset < 0 || static_cast<std::size_t>(offset) >= values_.size()) {
		return std::nullopt;
	}
	return static_cast<std::size_t>(offset);
}

std::vector<int> DailySeries::slots() const {
	std::vector<int> out;
	out.reserve(values_.size());
	DayIndex day = start_;
	for (std::size_t i = 0; i < values_.size(); ++i) {
		out.push_back(day.slot());
		if (i + 1 < values_.size()) {
			day = day.next();
		}
	}
	return out;
}

std::size_t DailySeries::missing_count() const noexcept {
	return static_cast<std::size_t>(
	    std::count_if(values_.begin(), values_.end(), [](double v) { return std::isnan(v); }));
}

DailySeries DailySeries::with_values(std::vector<double> values) const {
	if (values.size() != values_.size()) {
		throw DataError("with_values: length mismatch");
	}
	return DailySeries(start_, std::move(values), label_);
}

DailySeries DailySeries::slice(const DayIndex& first, const DayIndex& last) const {
	const auto a = position_of(first);
	const auto b = position_of(last);
	if (!a || !b || *b < *a) {
		throw DataError("slice [" + first.iso() + ", " + last.iso() + "] outside series");
	}
	return DailySeries(first,
	                   std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(*a),
	                                       values_.begin() + static_cast<std::ptrdiff_t>(*b) + 1),
	                   label_);
}

DailySeries DailySeries::slice_years(int first_year, int last_year) const {
	const DayIndex lo = std::max(start_, DayIndex(first_year, 1));
	const DayIndex hi = std::min(last_day(), DayIndex(last_year, days_in_year(last_year)));
	if (hi < lo) {
		throw DataError("no days of years " + std::to_string(first_year) + "-" +
		                std::to_string(last_year) + " in series");
	}
	return slice(lo, hi);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
	while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
		s.remove_prefix(1);
	}
	while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
		s.remove_suffix(1);
	}
	return s;
}

DataError row_error(std::size_t line, const std::string& what) {
	return DataError("line " + std::to_string(line) + ": " + what);
}

} // namespace

DailySeries load_csv(std::istream& in, const CsvSchema& schema) {
	std::string line;
	std::size_t line_no = 0;

	// header
	bool have_header = false;
	while (std::getline(in, line)) {
		++line_no;
		const auto t = trim(line);
		if (t.empty()) {
			continue;
		}
		const std::string expected = "date," + schema.value_column;
		if (t != expected) {
			throw row_error(line_no, "expected header '" + expected + "', got '" + std::string(t) + "'");
		}
		have_header = true;
		break;
	}
	if (!have_header) {
		throw DataError("empty CSV input");
	}

	struct Row {
		DayIndex day;
		double value;
		std::size_t line;
	};
	std::vector<Row> rows;
	while (std::getline(in, line)) {
		++line_no;
		const auto t = trim(line);
		if (t.empty()) {
			continue;
		}
		const auto comma = t.find(',');
		if (comma == std::string_view::npos || t.find(',', comma + 1) != std::string_view::npos) {
			throw row_error(line_no, "expected exactly two fields");
		}
		DayIndex day(1970, 1);
		try {
			day = DayIndex::parse_iso(trim(t.substr(0, comma)));
		} catch (const DataError& e) {
			throw row_error(line_no, e.what());
		}
		const auto field = trim(t.substr(comma + 1));
		double value = DailySeries::kMissing;
		if (!field.empty()) {
			auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
			if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
				throw row_error(line_no, "malformed value '" + std::string(field) + "'");
			}
			if (value < 0.0 && !schema.allow_negative) {
				throw row_error(line_no, "negative irradiation " + std::string(field));
			}
		}
		rows.push_back({day, value, line_no});
	}
	if (rows.empty()) {
		throw DataError("CSV has a header but no rows");
	}

	std::stable_sort(rows.begin(), rows.end(),
	                 [](const Row& a, const Row& b) { return a.day < b.day; });
	for (std::size_t i = 1; i < rows.size(); ++i) {
		if (rows[i].day == rows[i - 1].day) {
			throw row_error(rows[i].line, "duplicate date " + rows[i].day.iso() + " (first seen on line " +
			                                  std::to_string(rows[i - 1].line) + ")");
		}
	}

	const DayIndex start = rows.front().day;
	const auto span = rows.back().day.ordinal() - start.ordinal() + 1;
	std::vector<double> values(static_cast<std::size_t>(span), DailySeries::kMissing);
	for (const auto& r : rows) {
		values[static_cast<std::size_t>(r.day.ordinal() - start.ordinal())] = r.value;
	}
	return DailySeries(start, std::move(values));
}

DailySeries load_csv_file(const std::string& path, const CsvSchema& schema) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open '" + path + "'");
	}
	try {
		return load_csv(in, schema);
	} catch (const DataError& e) {
		throw DataError(path + ": " + e.what());
	}
}

void write_csv(std::ostream& out, const DailySeries& series, const CsvSchema& schema) {
	out << "date," << schema.value_column << '\n';
	char buf[64];
	DayIndex day = series.start();
	for (std::size_t i = 0; i < series.size(); ++i) {
		out << day.iso() << ',';
		if (!series.is_missing(i)) {
			if (schema.decimals < 0) {
				auto res = std::to_chars(buf, buf + sizeof buf, series[i]);
				out.write(buf, res.ptr - buf);
			} else {
				std::snprintf(buf, sizeof buf, "%.*f", schema.decimals, series[i]);
				out << buf;
			}
		}
		out << '\n';
		if (i + 1 < series.size()) {
			day = day.next();
		}
	}
}

void write_csv_file(const std::string& path, const DailySeries& series, const CsvSchema& schema) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write '" + path + "'");
	}
	write_csv(out, series, schema);
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

CleanResult clean(const DailySeries& series, const solar::SiteSpec& site) {
	if (series.size() < 2 * static_cast<std::size_t>(kSlotsPerYear)) {
		throw DataError("cleaning needs at least two years of daily data");
	}
	const solar::H0Table h0(site);
	const auto slots = series.slots();
	const std::size_t n = series.size();

	auto valid = [&](std::size_t i) {
		const double v = series[i];
		return !std::isnan(v) && v >= 0.0 && v <= h0.at(slots[i]) + kH0Tolerance;
	};

	// per (slot, year) sums of valid values so a year can be excluded cheaply
	struct SlotAccum {
		double sum = 0.0;
		int count = 0;
	};
	std::vector<SlotAccum> by_slot(kSlotsPerYear);
	for (std::size_t i = 0; i < n; ++i) {
		if (valid(i)) {
			by_slot[static_cast<std::size_t>(slots[i] - 1)].sum += series[i];
			by_slot[static_cast<std::size_t>(slots[i] - 1)].count += 1;
		}
	}

	std::vector<double> out(series.values().begin(), series.values().end());
	CleaningReport report;
	report.rule = "missing, negative, or above daily extraterrestrial H0 -> mean of valid values "
	              "at the same day-of-year in the other years";

	for (std::size_t i = 0; i < n; ++i) {
		if (valid(i)) {
			continue;
		}
		// the flagged value is invalid, so it never entered the slot sums; but a
		// leap year contributes two days to slot 59 and the sibling must go too
		const DayIndex day = series.day_at(i);
		const auto& acc = by_slot[static_cast<std::size_t>(slots[i] - 1)];
		double sum = acc.sum;
		int count = acc.count;
		if (slots[i] == 59 && is_leap_year(day.year())) {
			const auto sibling_doy = day.day_of_year() == 59 ? 60 : 59;
			if (auto j = series.position_of(DayIndex(day.year(), sibling_doy)); j && valid(*j)) {
				sum -= series[*j];
				count -= 1;
			}
		}
		if (count == 0) {
			throw DataError("unrecoverable gap at " + day.iso() + ": no valid value for day-of-year " +
			                std::to_string(slots[i]) + " in any other year");
		}
		const double replacement = sum / count;
		out[i] = replacement;
		report.replaced.push_back({day,
		                           series.is_missing(i) ? std::nullopt : std::optional<double>(series[i]),
		                           replacement});
	}
	return {series.with_values(std::move(out)), std::move(report)};
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
	if (n_years < 2) {
		throw ConfigError("synthetic n_years must be >= 2");
	}
	if (!(latitude_deg > -90.0 && latitude_deg < 90.0)) {
		throw ConfigError("synthetic latitude must lie in (-90, 90)");
	}
	if (!(clear_sky_fraction_mean > 0.0 && clear_sky_fraction_mean <= 1.0)) {
		throw ConfigError("clear_sky_fraction_mean must lie in (0, 1]");
	}
	if (!(modulation_amplitude >= 0.0 && modulation_amplitude <= 0.3)) {
		throw ConfigError("modulation_amplitude must lie in [0, 0.3]");
	}
	if (!(ar_coeff >= 0.0 && ar_coeff < 1.0)) {
		throw ConfigError("ar_coeff must lie in [0, 1)");
	}
	if (!(noise_std >= 0.0)) {
		throw ConfigError("noise_std must be >= 0");
	}
}

double synthetic_modulation(const SynthConfig& config, int slot) {
	return 1.0 + config.modulation_amplitude *
	                 std::cos(2.0 * std::numbers::pi * (slot - 172) / static_cast<double>(kSlotsPerYear));
}

DailySeries generate_synthetic(const SynthConfig& config) {
	config.validate();
	const solar::H0Table h0(solar::SiteSpec::from_degrees(config.latitude_deg));

	const DayIndex start(config.start_year, 1);
	const DayIndex last(config.start_year + config.n_years - 1,
	                    days_in_year(config.start_year + config.n_years - 1));
	const auto n = static_cast<std::size_t>(last.ordinal() - start.ordinal() + 1);

	std::mt19937_64 rng(config.seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	const double stationary_sd = config.noise_std / std::sqrt(1.0 - config.ar_coeff * config.ar_coeff);
	double noise = stationary_sd * normal(rng);

	std::vector<double> values(n);
	DayIndex day = start;
	for (std::size_t i = 0; i < n; ++i) {
		if (i > 0) {
			noise = config.ar_coeff * noise + config.noise_std * normal(rng);
			day = day.next();
		}
		const int slot = day.slot();
		const double k = config.clear_sky_fraction_mean * synthetic_modulation(config, slot) * (1.0 + noise);
		values[i] = h0.at(slot) * std::clamp(k, 0.03, 1.0);
	}
	return DailySeries(start, std::move(values), "synthetic");
}

} // namespace solarcast
