#pragma once

#include "solarcast/series.hpp"
#include "solarcast/solar_geometry.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace solarcast::preprocess {

/// Half-width of the centred 365-day moving average.
inline constexpr int kDefaultHalfWidth = 182;

/// X / H0 per day. Missing days stay missing. Throws DataError naming the day
/// if a present day has H0 == 0.
DailySeries clearness_index(const DailySeries& series, const solar::H0Table& h0);

/// Ratio of each value to its centred (2m+1)-day arithmetic mean on the flat
/// time axis. The first and last m positions, and any position whose window
/// touches a missing day, are left missing.
DailySeries moving_average_ratio(const DailySeries& clearness, int half_width = kDefaultHalfWidth);

/// Per-slot seasonal coefficients normalized to unit mean.
struct SeasonalFactors {
	std::array<double, 365> raw{};   // mean ratio per slot over the defined years
	double grand_mean = 0.0;         // mean of raw over the 365 slots
	std::array<double, 365> final{}; // raw / grand_mean
	std::array<int, 365> n_years_used{};
	int half_width = kDefaultHalfWidth;

	double at(int slot) const { return final.at(static_cast<std::size_t>(slot - 1)); }
};

/// Throws DataError naming the first slot with no defined ratio.
SeasonalFactors seasonal_factors(const DailySeries& ratios, int half_width = kDefaultHalfWidth);

/// `day,y_star,n_years`, one row per slot, y_star in shortest exact form.
void write_factors_csv(std::ostream& out, const SeasonalFactors& factors);
/// Reads the layout above. Only `final` and `n_years_used` are restored; raw
/// is set equal to final and grand_mean to 1.
SeasonalFactors read_factors_csv(std::istream& in);

/// Divides each value by the seasonal factor of its slot.
DailySeries deseasonalize(const DailySeries& clearness, const SeasonalFactors& factors);

/// Fitted stationarization: X -> X / (H0 * y*), and back.
class Preprocessor {
public:
	Preprocessor(solar::SiteSpec site, SeasonalFactors factors);

	/// h0_table -> clearness_index -> moving_average_ratio -> seasonal_factors,
	/// all on the given (training) series only.
	static Preprocessor fit(const DailySeries& series, const solar::SiteSpec& site,
	                        int half_width = kDefaultHalfWidth);

	const solar::SiteSpec& site() const noexcept { return site_; }
	const solar::H0Table& h0() const noexcept { return h0_; }
	const SeasonalFactors& factors() const noexcept { return factors_; }

	/// Multiplier H0 * y* that maps a corrected value back to Wh/m² for a day.
	double scale_for(const DayIndex& day) const;

	DailySeries apply(const DailySeries& series) const;
	double apply_one(const DayIndex& day, double value) const;

	/// X = corrected * y* * H0 for each requested day.
	DailySeries invert(std::span<const double> corrected, std::span<const DayIndex> days) const;
	double invert_one(const DayIndex& day, double corrected) const;

private:
	solar::SiteSpec site_;
	solar::H0Table h0_;
	SeasonalFactors factors_;
};

} // namespace solarcast::preprocess
