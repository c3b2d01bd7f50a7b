#include <catch_amalgamated.hpp>

#include "oracles.hpp"

#include "solarcast/error.hpp"
#include "solarcast/series.hpp"
#include "solarcast/spectral.hpp"

#include <sstream>

using namespace solarcast;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DailySeries parse(const std::string& text, CsvSchema schema = {}) {
	std::istringstream in(text);
	return load_csv(in, schema);
}

const auto kAjaccio = solar::SiteSpec::from_degrees(41.917);

/// `years` whole years from 1971 with value f(day index) everywhere.
DailySeries filled(int years, double value) {
	std::size_t n = 0;
	for (int y = 1971; y < 1971 + years; ++y) {
		n += static_cast<std::size_t>(days_in_year(y));
	}
	return DailySeries(DayIndex(1971, 1), std::vector<double>(n, value));
}

} // namespace

TEST_CASE("DayIndex validates and orders calendar days") {
	CHECK_THROWS_AS(DayIndex(1971, 366), DataError);
	CHECK_THROWS_AS(DayIndex(1971, 0), DataError);
	CHECK_NOTHROW(DayIndex(1972, 366));
	CHECK(DayIndex(1971, 365) < DayIndex(1972, 1));
	CHECK(DayIndex(1971, 365).next() == DayIndex(1972, 1));
	CHECK(DayIndex::parse_iso("1988-02-29") == DayIndex(1988, 60));
	CHECK(DayIndex(1988, 60).iso() == "1988-02-29");
	CHECK_THROWS_AS(DayIndex::parse_iso("1987-02-29"), DataError);
	CHECK_THROWS_AS(DayIndex::parse_iso("1987/02/01"), DataError);
	CHECK(DayIndex(1970, 1).ordinal() == 0);
	CHECK(DayIndex::from_ordinal(DayIndex(1989, 200).ordinal()) == DayIndex(1989, 200));
}

TEST_CASE("leap days share slot 59") {
	CHECK(DayIndex::parse_iso("1988-02-28").slot() == 59);
	CHECK(DayIndex::parse_iso("1988-02-29").slot() == 59);
	CHECK(DayIndex::parse_iso("1988-03-01").slot() == 60);
	CHECK(DayIndex::parse_iso("1987-03-01").slot() == 60);
	CHECK(DayIndex::parse_iso("1988-12-31").slot() == 365);
	CHECK(DayIndex::parse_iso("1987-12-31").slot() == 365);
}

TEST_CASE("load_csv parses rows and inserts gaps") {
	auto s = parse("date,ghi_wh_m2\n1971-01-01,1520\n1971-01-02,1710\n");
	REQUIRE(s.size() == 2);
	CHECK(s[0] == 1520.0);
	CHECK(s[1] == 1710.0);

	s = parse("date,ghi_wh_m2\r\n1971-01-03,3\r\n1971-01-01,1\r\n\r\n");
	REQUIRE(s.size() == 3);
	CHECK(s.start() == DayIndex(1971, 1));
	CHECK(s.is_missing(1));
	CHECK(s[2] == 3.0);

	s = parse("date,ghi_wh_m2\n1971-01-01,\n1971-01-02,2.5\n");
	CHECK(s.is_missing(0));
	CHECK(s.missing_count() == 1);
}

TEST_CASE("load_csv rejects bad input with line numbers") {
	auto message = [](const std::string& text) {
		try {
			parse(text);
		} catch (const DataError& e) {
			return std::string(e.what());
		}
		return std::string("no error");
	};
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,-5\n"), Catch::Matchers::ContainsSubstring("negative irradiation"));
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,5\n1971-01-01,6\n"),
	           Catch::Matchers::ContainsSubstring("line 3"));
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,5\n1971-13-01,6\n"), Catch::Matchers::ContainsSubstring("line 3"));
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,5,1\n"), Catch::Matchers::ContainsSubstring("line 2"));
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,1,5\n"), Catch::Matchers::ContainsSubstring("line 2"));
	CHECK_THAT(message("date,ghi_wh_m2\n1971-01-01,1e\n"), Catch::Matchers::ContainsSubstring("line 2"));
	CHECK(message("") != "no error");
	CHECK(message("date,ghi_wh_m2\n") != "no error");
	CHECK(message("when,ghi\n1971-01-01,5\n") != "no error");
	// negatives are fine when the schema allows them
	CHECK(parse("date,x\n1971-01-01,-0.5\n", {"x", true, 3})[0] == -0.5);
}

TEST_CASE("write_csv then load_csv is the identity") {
	std::vector<double> v{1520.125, DailySeries::kMissing, 0.0, 8123.5, 17.001};
	const DailySeries s(DayIndex(1971, 364), v);
	std::ostringstream out;
	write_csv(out, s);
	CHECK_THAT(out.str(), Catch::Matchers::StartsWith("date,ghi_wh_m2\n1971-12-30,1520.125\n1971-12-31,\n1972-01-01,0.000\n"));
	const auto back = parse(out.str());
	REQUIRE(back.size() == s.size());
	CHECK(back.start() == s.start());
	for (std::size_t i = 0; i < s.size(); ++i) {
		CHECK((back.is_missing(i) == s.is_missing(i)));
		if (!s.is_missing(i)) {
			CHECK(back[i] == s[i]);
		}
	}

	// shortest round-trip mode preserves arbitrary doubles
	const DailySeries r(DayIndex(1980, 1), {0.1 + 0.2, 1.0 / 3.0, 2e-17});
	std::ostringstream exact;
	write_csv(exact, r, {"corrected", true, -1});
	const auto r2 = parse(exact.str(), {"corrected", true, -1});
	for (std::size_t i = 0; i < r.size(); ++i) {
		CHECK(r2[i] == r[i]);
	}
}

TEST_CASE("slicing by days and years") {
	const auto s = filled(3, 1.0);
	const auto y = s.slice_years(1972, 1972);
	CHECK(y.size() == 366);
	CHECK(y.start() == DayIndex(1972, 1));
	const auto d = s.slice(DayIndex(1971, 360), DayIndex(1972, 5));
	CHECK(d.size() == 11);
	CHECK_THROWS_AS(s.slice_years(1980, 1981), DataError);
	CHECK(s.position_of(DayIndex(1972, 1)) == std::optional<std::size_t>(365));
	CHECK_FALSE(s.position_of(DayIndex(1970, 1)).has_value());
	CHECK_THROWS_AS(DailySeries(DayIndex(1971, 1), {}), DataError);
	CHECK_THROWS_AS(DailySeries(DayIndex(1971, 1), {std::numeric_limits<double>::infinity()}), DataError);
}

TEST_CASE("clean replaces a missing day with the cross-year mean") {
	const auto base = filled(3, 2000.0);
	std::vector<double> v(base.values().begin(), base.values().end());
	v[14] = DailySeries::kMissing;       // 1971-01-15
	v[365 + 14] = 900.0;                 // 1972-01-15
	v[365 + 366 + 14] = 1100.0;          // 1973-01-15
	const DailySeries s(DayIndex(1971, 1), v);
	const auto r = clean(s, kAjaccio);
	REQUIRE(r.report.replaced.size() == 1);
	CHECK(r.report.replaced[0].day == DayIndex(1971, 15));
	CHECK_FALSE(r.report.replaced[0].old_value.has_value());
	CHECK(r.series[14] == 1000.0);
	CHECK(r.series[365 + 14] == 900.0);
}

TEST_CASE("clean flags values above H0 as outliers") {
	// winter H0 at Ajaccio is far below 20000 Wh/m2
	const double h0_jan20 = solar::daily_extraterrestrial(kAjaccio, 20);
	REQUIRE(h0_jan20 < 20000.0);
	auto base = filled(3, 0.5 * h0_jan20);
	std::vector<double> v(base.values().begin(), base.values().end());
	v[365 + 19] = 20000.0;
	v[19] = 0.4 * h0_jan20;
	v[365 + 366 + 19] = 0.6 * h0_jan20;
	const auto r = clean(DailySeries(DayIndex(1971, 1), v), kAjaccio);
	// every day above that day's H0 is flagged, Jan 20 included
	bool found = false;
	for (const auto& rep : r.report.replaced) {
		if (rep.day == DayIndex(1972, 20)) {
			found = true;
			CHECK(rep.old_value == std::optional<double>(20000.0));
			CHECK_THAT(rep.new_value, WithinRel(0.5 * h0_jan20, 1e-12));
		}
	}
	CHECK(found);
}

TEST_CASE("clean leaves valid data untouched and is idempotent") {
	SynthConfig cfg;
	cfg.n_years = 4;
	cfg.seed = 9;
	const auto s = generate_synthetic(cfg);
	const auto r = clean(s, kAjaccio);
	CHECK(r.report.replaced.empty());
	for (std::size_t i = 0; i < s.size(); ++i) {
		CHECK(r.series[i] == s[i]);
	}

	std::vector<double> v(s.values().begin(), s.values().end());
	v[10] = DailySeries::kMissing;
	v[400] = -3.0;
	v[800] = 1e6;
	v[59] = DailySeries::kMissing; // 1971-03-01 -> slot 60
	const auto dirty = DailySeries(s.start(), v);
	const auto once = clean(dirty, kAjaccio);
	CHECK(once.report.replaced.size() == 4);
	const auto twice = clean(once.series, kAjaccio);
	CHECK(twice.report.replaced.empty());
	for (std::size_t i = 0; i < s.size(); ++i) {
		if (i != 10 && i != 400 && i != 800 && i != 59) {
			CHECK(once.series[i] == s[i]);
		}
	}
}

TEST_CASE("clean excludes the repaired year's leap sibling from slot 59") {
	// 1972 is leap: Feb 28 and Feb 29 both map to slot 59
	auto base = filled(3, 3000.0);
	std::vector<double> v(base.values().begin(), base.values().end());
	const std::size_t feb28_72 = 365 + 58;
	const std::size_t feb29_72 = 365 + 59;
	v[feb28_72] = DailySeries::kMissing;
	v[feb29_72] = 5000.0;    // same year, must not feed the repair
	v[58] = 2000.0;          // 1971-02-28
	v[365 + 366 + 58] = 4000.0; // 1973-02-28
	const auto r = clean(DailySeries(DayIndex(1971, 1), v), kAjaccio);
	REQUIRE(r.report.replaced.size() == 1);
	CHECK(r.series[feb28_72] == 3000.0);
}

TEST_CASE("clean reports unrecoverable gaps and short series") {
	auto base = filled(2, 3000.0);
	std::vector<double> v(base.values().begin(), base.values().end());
	v[100] = DailySeries::kMissing;       // 1971 day 101, slot 101
	v[365 + 101] = DailySeries::kMissing; // 1972 (leap) day 102, slot 101
	CHECK_THROWS_AS(clean(DailySeries(DayIndex(1971, 1), v), kAjaccio), DataError);
	CHECK_THROWS_AS(clean(DailySeries(DayIndex(1971, 1), std::vector<double>(400, 1.0)), kAjaccio), DataError);
}

TEST_CASE("synthetic generator: noise-free limit, bounds, determinism") {
	SynthConfig flat;
	flat.n_years = 2;
	flat.noise_std = 0.0;
	flat.modulation_amplitude = 0.0;
	const auto s = generate_synthetic(flat);
	const solar::H0Table h0(kAjaccio);
	for (std::size_t i = 0; i < s.size(); ++i) {
		CHECK_THAT(s[i], WithinRel(0.6 * h0.at(s.day_at(i).slot()), 1e-15));
	}

	SynthConfig cfg;
	cfg.seed = 4;
	const auto a = generate_synthetic(cfg);
	const auto b = generate_synthetic(cfg);
	REQUIRE(a.size() == b.size());
	bool same = true;
	bool bounded = true;
	for (std::size_t i = 0; i < a.size(); ++i) {
		same = same && a[i] == b[i];
		bounded = bounded && a[i] > 0.0 && a[i] <= h0.at(a.day_at(i).slot());
	}
	CHECK(same);
	CHECK(bounded);
	cfg.seed = 5;
	CHECK(generate_synthetic(cfg)[100] != a[100]);

	CHECK_THROWS_AS([] { SynthConfig c; c.modulation_amplitude = 0.4; c.validate(); }(), ConfigError);
	CHECK_THROWS_AS([] { SynthConfig c; c.n_years = 1; c.validate(); }(), ConfigError);
	CHECK_THROWS_AS([] { SynthConfig c; c.ar_coeff = 1.0; c.validate(); }(), ConfigError);
}

TEST_CASE("raw synthetic series peaks at the annual period") {
	SynthConfig cfg;
	cfg.seed = 1;
	const auto s = generate_synthetic(cfg);
	const auto p = spectral::periodogram(s.values());
	CHECK_THAT(spectral::dominant_period(p), WithinAbs(365.0, 1.0));
}
