#pragma once

#include "solarcast/calendar.hpp"
#include "solarcast/series.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace solarcast::eval {

struct ForecastPair {
	DayIndex day;
	double measured;  // M_i
	double predicted; // C_i
};

/// Aligned measured/predicted values for one model over a test span.
struct ForecastRun {
	std::vector<ForecastPair> pairs;
	std::string model_id;
	std::uint64_t seed = 0;

	/// Joins the two series on their common days; days where either side is
	/// missing are skipped. Throws DataError if nothing overlaps.
	static ForecastRun align(const DailySeries& measured, const DailySeries& predicted,
	                         std::string model_id, std::uint64_t seed = 0);
	/// Equal lengths, distinct days, measured >= 0.
	void validate() const;
};

struct MetricsReport {
	double rmse = 0.0;
	double nrmse = 0.0;
	double mbe = 0.0;
	double r_squared = 0.0; // squared Pearson correlation; NaN if either side is constant
	std::size_t n = 0;
};

/// RMSE = sqrt(mean((C - M)^2)), nRMSE = RMSE / sqrt(mean(M^2)),
/// MBE = mean(C - M). Throws DataError for an empty run or all-zero measured.
MetricsReport metrics(const ForecastRun& run);

enum class Season { Winter = 0, Spring = 1, Summer = 2, Autumn = 3 };
inline constexpr std::array<Season, 4> kSeasons{Season::Winter, Season::Spring, Season::Summer,
                                                Season::Autumn};
std::string to_string(Season season);
/// Meteorological seasons: DJF, MAM, JJA, SON.
Season season_of(const DayIndex& day);

struct SeasonalReport {
	std::array<std::optional<MetricsReport>, 4> by_season;

	const std::optional<MetricsReport>& operator[](Season s) const {
		return by_season[static_cast<std::size_t>(s)];
	}
};

SeasonalReport seasonal_breakdown(const ForecastRun& run);

struct MonthlyError {
	int year;
	unsigned month;
	double sum_measured;
	double sum_predicted;
	double relative_error; // |sum C - sum M| / sum M
};

struct MonthlyReport {
	std::vector<MonthlyError> months;
	std::vector<std::string> warnings; // months skipped for zero measured total
	double mean_error_pct = 0.0;
};

MonthlyReport monthly_aggregate_error(const ForecastRun& run);

struct MeanCi {
	double mean = 0.0;
	double half_width = 0.0;
	std::size_t n_runs = 0;
};

/// Student-t 95% interval: half width t_{0.975, n-1} s / sqrt(n). Needs n >= 2.
MeanCi mean_ci(std::span<const double> values);
double student_t_975(std::size_t degrees_of_freedom);

struct CiSummary {
	MeanCi rmse;
	MeanCi nrmse;
	MeanCi mbe;
	MeanCi r_squared;
};

CiSummary confidence_interval(std::span<const MetricsReport> runs);

struct ComparisonRow {
	std::string model_id;
	double nrmse;
};

/// One nRMSE row per model, in map order. Throws DataError when the runs do
/// not cover the same days.
std::vector<ComparisonRow> compare_models(const std::map<std::string, ForecastRun>& runs);

// CSV writers. Numbers use 6 significant digits.
void write_metrics_csv(std::ostream& out, const std::string& model_id, const MetricsReport& m);
void write_seasonal_csv(std::ostream& out, const SeasonalReport& report);
void write_monthly_csv(std::ostream& out, const MonthlyReport& report);
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
void write_ci_csv(std::ostream& out, const CiSummary& ci);
std::string format_g6(double value);

} // namespace solarcast::eval
