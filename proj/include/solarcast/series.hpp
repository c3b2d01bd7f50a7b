#pragma once

#include "solarcast/calendar.hpp"
#include "solarcast/solar_geometry.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace solarcast {

/// Contiguous daily series: exactly one slot per calendar day starting at
/// `start`. Missing slots hold a quiet NaN.
class DailySeries {
public:
	static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

	/// Throws DataError when values is empty or holds an infinity.
	DailySeries(DayIndex start, std::vector<double> values, std::string label = {});

	const DayIndex& start() const noexcept { return start_; }
	DayIndex last_day() const { return day_at(values_.size() - 1); }
	std::size_t size() const noexcept { return values_.size(); }
	const std::string& label() const noexcept { return label_; }

	DayIndex day_at(std::size_t i) const { return start_.plus(static_cast<std::int64_t>(i)); }
	std::optional<std::size_t> position_of(const DayIndex& day) const noexcept;
	/// Seasonal slot (1..365) of every position.
	std::vector<int> slots() const;

	double operator[](std::size_t i) const noexcept { return values_[i]; }
	std::span<const double> values() const noexcept { return values_; }
	bool is_missing(std::size_t i) const noexcept { return std::isnan(values_[i]); }
	std::size_t missing_count() const noexcept;

	/// Same calendar shape, new values.
	DailySeries with_values(std::vector<double> values) const;
	/// Inclusive day range; both ends must be inside the series.
	DailySeries slice(const DayIndex& first, const DayIndex& last) const;
	/// All days of calendar years [first_year, last_year] present in the series.
	DailySeries slice_years(int first_year, int last_year) const;

private:
	DayIndex start_;
	std::vector<double> values_;
	std::string label_;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Two-column CSV layout: `date,<value_column>`. An empty value field marks a
/// missing day.
struct CsvSchema {
	std::string value_column = "ghi_wh_m2";
	bool allow_negative = false;
	/// Fixed decimals on output; negative means shortest exact round-trip form.
	int decimals = 3;
};

DailySeries load_csv(std::istream& in, const CsvSchema& schema = {});
DailySeries load_csv_file(const std::string& path, const CsvSchema& schema = {});
void write_csv(std::ostream& out, const DailySeries& series, const CsvSchema& schema = {});
void write_csv_file(const std::string& path, const DailySeries& series,
                    const CsvSchema& schema = {});

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

struct Replacement {
	DayIndex day;
	std::optional<double> old_value; // nullopt when the slot was missing
	double new_value;
};

struct CleaningReport {
	std::vector<Replacement> replaced;
	std::string rule;
};

struct CleanResult {
	DailySeries series;
	CleaningReport report;
};

/// Values this far above H0 still count as valid: one unit in the last place
/// of the 3-decimal CSV, so a day at exactly H0 survives a write/read cycle.
inline constexpr double kH0Tolerance = 1e-3;

/// Replaces every atypical slot (missing, negative, or above that day's H0)
/// with the mean of the valid values sharing its seasonal slot in the other
/// years. Requires at least two years of data; throws DataError if some slot
/// has no valid value to borrow from.
CleanResult clean(const DailySeries& series, const solar::SiteSpec& site);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SynthConfig {
	int n_years = 19;
	int start_year = 1971;
	double latitude_deg = 41.917;
	double clear_sky_fraction_mean = 0.6;
	/// Amplitude of the annual clearness modulation, peaking at the June solstice.
	double modulation_amplitude = 0.15;
	/// AR(1) cloud noise: n_t = ar_coeff * n_{t-1} + noise_std * eps_t.
	double ar_coeff = 0.5;
	double noise_std = 0.2;
	std::uint64_t seed = 0;

	void validate() const;
};

/// Seasonal modulation of the mean clearness at the given slot.
double synthetic_modulation(const SynthConfig& config, int slot);

/// value = H0 * clamp(k_mean * modulation * (1 + noise), 0.03, 1.0)
/// Deterministic in the seed.
DailySeries generate_synthetic(const SynthConfig& config);

} // namespace solarcast
