#include "solarcast/calendar.hpp"

#include "solarcast/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace solarcast {

namespace chr = std::chrono;

bool is_leap_year(int year) noexcept {
	return chr::year{year}.is_leap();
}

int days_in_year(int year) noexcept {
	return is_leap_year(year) ? 366 : 365;
}

DayIndex::DayIndex(int year, int day_of_year) : year_(year), day_of_year_(day_of_year) {
	if (day_of_year < 1 || day_of_year > days_in_year(year)) {
		throw DataError("day_of_year " + std::to_string(day_of_year) + " out of range for year " +
		                std::to_string(year));
	}
}

DayIndex DayIndex::from_civil(int year, unsigned month, unsigned day) {
	const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
	if (!ymd.ok()) {
		throw DataError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
		                "-" + std::to_string(day));
	}
	const chr::sys_days jan1{chr::year{year} / chr::January / 1};
	const auto doy = (chr::sys_days{ymd} - jan1).count() + 1;
	return DayIndex(year, static_cast<int>(doy));
}

DayIndex DayIndex::parse_iso(std::string_view text) {
	auto fail = [&]() -> DataError {
		return DataError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
	};
	if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
		throw fail();
	}
	auto field = [&](std::size_t pos, std::size_t len) {
		int v = 0;
		const char* first = text.data() + pos;
		const char* last = first + len;
		auto [ptr, ec] = std::from_chars(first, last, v);
		if (ec != std::errc{} || ptr != last) {
			throw fail();
		}
		return v;
	};
	const int y = field(0, 4);
	const int m = field(5, 2);
	const int d = field(8, 2);
	if (m < 1 || m > 12 || d < 1 || d > 31) {
		throw fail();
	}
	return from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

DayIndex DayIndex::from_ordinal(std::int64_t days_since_epoch) {
	const chr::sys_days sd{chr::days{days_since_epoch}};
	const chr::year_month_day ymd{sd};
	const int y = static_cast<int>(ymd.year());
	const chr::sys_days jan1{ymd.year() / chr::January / 1};
	return DayIndex(y, static_cast<int>((sd - jan1).count()) + 1);
}

std::int64_t DayIndex::ordinal() const noexcept {
	const chr::sys_days jan1{chr::year{year_} / chr::January / 1};
	return jan1.time_since_epoch().count() + day_of_year_ - 1;
}

CivilDate DayIndex::civil() const noexcept {
	const chr::year_month_day ymd{chr::sys_days{chr::days{ordinal()}}};
	return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
	        static_cast<unsigned>(ymd.day())};
}

std::string DayIndex::iso() const {
	const auto c = civil();
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
	return buf;
}

int DayIndex::slot() const noexcept {
	if (is_leap_year(year_) && day_of_year_ >= 60) {
		return day_of_year_ - 1;
	}
	return day_of_year_;
}

} // namespace solarcast
