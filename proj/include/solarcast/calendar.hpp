#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace solarcast {

/// Number of seasonal slots per year. Feb 29 shares slot 59 with Feb 28.
inline constexpr int kSlotsPerYear = 365;

bool is_leap_year(int year) noexcept;
int days_in_year(int year) noexcept;

struct CivilDate {
	int year;
	unsigned month; // 1..12
	unsigned day;   // 1..31
};

/// A calendar day addressed as (year, day-of-year). Ordering follows calendar
/// time.
class DayIndex {
public:
	/// Throws DataError if day_of_year is outside [1, days_in_year(year)].
	DayIndex(int year, int day_of_year);

	static DayIndex from_civil(int year, unsigned month, unsigned day);
	/// Parses "YYYY-MM-DD".
	static DayIndex parse_iso(std::string_view text);
	/// Inverse of ordinal().
	static DayIndex from_ordinal(std::int64_t days_since_epoch);

	int year() const noexcept { return year_; }
	int day_of_year() const noexcept { return day_of_year_; }

	/// Days since 1970-01-01.
	std::int64_t ordinal() const noexcept;
	CivilDate civil() const noexcept;
	unsigned month() const noexcept { return civil().month; }
	std::string iso() const;

	/// Seasonal slot in [1, 365]; leap-year days after Feb 28 shift down by one
	/// so Feb 29 lands on 59.
	int slot() const noexcept;

	DayIndex next() const { return plus(1); }
	DayIndex plus(std::int64_t days) const { return from_ordinal(ordinal() + days); }

	friend bool operator==(const DayIndex&, const DayIndex&) = default;
	friend std::strong_ordering operator<=>(const DayIndex& a, const DayIndex& b) {
		if (auto c = a.year_ <=> b.year_; c != 0) {
			return c;
		}
		return a.day_of_year_ <=> b.day_of_year_;
	}

private:
	int year_;
	int day_of_year_;
};

} // namespace solarcast
