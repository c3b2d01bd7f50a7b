#pragma once

#include <array>

namespace solarcast::solar {

/// Location and solar constant used for extraterrestrial irradiation.
class SiteSpec {
public:
	static constexpr double kDefaultSolarConstant = 1367.0; // W/m²

	/// Latitude in radians, |lat| < pi/2; solar constant in [1300, 1400] W/m².
	explicit SiteSpec(double latitude_rad, double solar_constant = kDefaultSolarConstant);
	static SiteSpec from_degrees(double latitude_deg,
	                             double solar_constant = kDefaultSolarConstant);

	double latitude() const noexcept { return latitude_; }
	double latitude_deg() const noexcept;
	double solar_constant() const noexcept { return solar_constant_; }

private:
	double latitude_;
	double solar_constant_;
};

/// Solar declination (rad) with the single-sinusoid model
/// 0.409 * sin(2*pi*(d + 284)/365). Day must be in [1, 365].
double declination(int day_of_year);

/// Eccentricity correction factor 1 + 0.033 cos(2*pi*d/365).
double eccentricity_correction(int day_of_year);

/// Daily extraterrestrial irradiation on a horizontal plane (Wh/m²):
///
///   H0 = (24/pi) Gsc E0 (cos(phi) cos(delta) sin(ws) + ws sin(phi) sin(delta))
///
/// with sunset hour angle ws = acos(clamp(-tan(phi) tan(delta), -1, 1)).
/// Polar night gives exactly 0.
double daily_extraterrestrial(const SiteSpec& site, int day_of_year);

/// H0 for each seasonal slot 1..365.
class H0Table {
public:
	explicit H0Table(const SiteSpec& site);

	/// Slot in [1, 365].
	double at(int slot) const;
	const std::array<double, 365>& values() const noexcept { return values_; }

private:
	std::array<double, 365> values_{};
};

inline H0Table h0_table(const SiteSpec& site) {
	return H0Table(site);
}

} // namespace solarcast::solar
