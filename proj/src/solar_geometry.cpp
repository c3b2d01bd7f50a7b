#include "solarcast/solar_geometry.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace solarcast::solar {

namespace {

constexpr double kPi = std::numbers::pi;

void check_day(int day_of_year) {
	if (day_of_year < 1 || day_of_year > 365) {
		throw DataError("day_of_year " + std::to_string(day_of_year) + " outside [1, 365]");
	}
}

} // namespace

SiteSpec::SiteSpec(double latitude_rad, double solar_constant)
    : latitude_(latitude_rad), solar_constant_(solar_constant) {
	if (!(std::abs(latitude_rad) < kPi / 2)) {
		throw ConfigError("latitude must satisfy |lat| < 90 degrees");
	}
	if (!(solar_constant >= 1300.0 && solar_constant <= 1400.0)) {
		throw ConfigError("solar constant must lie in [1300, 1400] W/m2");
	}
}

SiteSpec SiteSpec::from_degrees(double latitude_deg, double solar_constant) {
	return SiteSpec(latitude_deg * kPi / 180.0, solar_constant);
}

double SiteSpec::latitude_deg() const noexcept {
	return latitude_ * 180.0 / kPi;
}

double declination(int day_of_year) {
	check_day(day_of_year);
	return 0.409 * std::sin(2.0 * kPi * (day_of_year + 284) / 365.0);
}

double eccentricity_correction(int day_of_year) {
	check_day(day_of_year);
	return 1.0 + 0.033 * std::cos(2.0 * kPi * day_of_year / 365.0);
}

double daily_extraterrestrial(const SiteSpec& site, int day_of_year) {
	const double delta = declination(day_of_year);
	const double e0 = eccentricity_correction(day_of_year);
	const double phi = site.latitude();

	const double cos_ws = std::clamp(-std::tan(phi) * std::tan(delta), -1.0, 1.0);
	const double ws = std::acos(cos_ws);
	const double shape =
	    std::cos(phi) * std::cos(delta) * std::sin(ws) + ws * std::sin(phi) * std::sin(delta);
	// ws == 0 makes shape exactly 0; rounding may leave a tiny negative otherwise
	return std::max(0.0, 24.0 / kPi * site.solar_constant() * e0 * shape);
}

H0Table::H0Table(const SiteSpec& site) {
	for (int d = 1; d <= 365; ++d) {
		values_[static_cast<std::size_t>(d - 1)] = daily_extraterrestrial(site, d);
	}
}

double H0Table::at(int slot) const {
	check_day(slot);
	return values_[static_cast<std::size_t>(slot - 1)];
}

} // namespace solarcast::solar
