#include <catch_amalgamated.hpp>

#include "oracles.hpp"

#include "solarcast/error.hpp"
#include "solarcast/spectral.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

using namespace solarcast;
using namespace solarcast::spectral;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> white(std::size_t n, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> z(0.0, 1.0);
	std::vector<double> v(n);
	for (auto& x : v) {
		x = z(rng);
	}
	return v;
}

std::vector<double> tone(std::size_t n, double period, double offset = 0.0) {
	std::vector<double> v(n);
	for (std::size_t t = 0; t < n; ++t) {
		v[t] = offset + std::sin(2 * std::numbers::pi * static_cast<double>(t) / period);
	}
	return v;
}

// the largest of q iid Exp(1) draws over their sum: the null law of g
std::vector<double> null_g(std::size_t q, int reps, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::exponential_distribution<double> e(1.0);
	std::vector<double> out(static_cast<std::size_t>(reps));
	for (auto& g : out) {
		double sum = 0.0, mx = 0.0;
		for (std::size_t k = 0; k < q; ++k) {
			const double v = e(rng);
			sum += v;
			mx = std::max(mx, v);
		}
		g = mx / sum;
	}
	return out;
}

double tail(const std::vector<double>& sample, double g) {
	const auto above = std::count_if(sample.begin(), sample.end(), [g](double x) { return x > g; });
	return static_cast<double>(above) / static_cast<double>(sample.size());
}

} // namespace

TEST_CASE("periodogram agrees with the direct DFT") {
	for (std::size_t n : {16u, 17u, 100u, 365u, 1000u}) {
		auto x = white(n, n);
		for (std::size_t t = 0; t < n; ++t) {
			x[t] += 3.0 + std::cos(0.3 * static_cast<double>(t));
		}
		const auto p = periodogram(x);
		const auto want = oracle::direct_periodogram(x);
		REQUIRE(p.ordinates.size() == n / 2);
		REQUIRE(p.frequencies.size() == n / 2);
		CHECK(p.n == n);
		for (std::size_t k = 0; k < want.size(); ++k) {
			CHECK_THAT(p.ordinates[k], WithinRel(want[k], 1e-6) || WithinAbs(want[k], 1e-9));
			CHECK_THAT(p.frequencies[k], WithinRel(static_cast<double>(k + 1) / static_cast<double>(n), 1e-15));
			CHECK(p.ordinates[k] >= 0.0);
		}
	}
	CHECK_THROWS_AS(periodogram(std::vector<double>(15, 1.0)), DataError);
}

TEST_CASE("single tone and constant series") {
	const auto p = periodogram(tone(3650, 365.0, 0.6));
	const auto peak = std::max_element(p.ordinates.begin(), p.ordinates.end()) - p.ordinates.begin();
	CHECK(peak + 1 == 10);
	CHECK(dominant_period(p) == 365.0);
	CHECK(p.period_at(9) == 365.0);
	CHECK(p.ordinate_near_period(364.0) == p.ordinates[9]);

	const auto flat = periodogram(std::vector<double>(64, 2.5));
	for (double v : flat.ordinates) {
		CHECK(v == 0.0);
	}
	CHECK_THROWS_AS(dominant_period(flat), NumericalError);
	CHECK_THROWS_AS(fisher_g_test(flat), NumericalError);

	const auto f = fisher_g_test(p);
	CHECK(f.g > 0.99);
	CHECK(f.p_value < 1e-12);
	CHECK(f.peak_period == 365.0);
}

TEST_CASE("ties go to the longer period") {
	Periodogram p;
	p.n = 20;
	p.ordinates = {0.0, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
	for (std::size_t k = 1; k <= 10; ++k) {
		p.frequencies.push_back(static_cast<double>(k) / 20.0);
	}
	CHECK(dominant_period(p) == 10.0);
}

TEST_CASE("missing values are mean-imputed") {
	auto x = white(64, 9);
	auto y = x;
	y[10] = std::numeric_limits<double>::quiet_NaN();
	double mean = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		if (i != 10) {
			mean += x[i];
		}
	}
	x[10] = mean / 63.0;
	const auto a = periodogram(x);
	const auto b = periodogram(y);
	for (std::size_t k = 0; k < a.ordinates.size(); ++k) {
		CHECK_THAT(b.ordinates[k], WithinRel(a.ordinates[k], 1e-12) || WithinAbs(a.ordinates[k], 1e-14));
	}
}

TEST_CASE("white noise has no dominant ordinate") {
	const auto x = white(4096, 2024);
	const auto p = periodogram(x);
	const auto f = fisher_g_test(p);
	CHECK(f.g < 0.02);
	// same ratio from the direct transform
	const auto d = oracle::direct_periodogram(x);
	const double g = *std::max_element(d.begin(), d.end()) / std::accumulate(d.begin(), d.end(), 0.0);
	CHECK_THAT(f.g, WithinRel(g, 1e-9));
}

TEST_CASE("Fisher p-value") {
	CHECK_THAT(fisher_p_value(0.1, 10), WithinAbs(1.0, 1e-9));
	CHECK(fisher_p_value(1.0, 10) == 0.0);
	// one term when g > 1/2: q (1 - g)^(q-1)
	CHECK_THAT(fisher_p_value(0.6, 10), WithinRel(10 * std::pow(0.4, 9), 1e-12));
	// two terms
	CHECK_THAT(fisher_p_value(0.4, 10), WithinRel(10 * std::pow(0.6, 9) - 45 * std::pow(0.2, 9), 1e-12));

	// against a Monte-Carlo null with 10k replicates
	const auto sample = null_g(512, 10000, 77);
	for (double g : {0.012, 0.014, 0.016, 0.02}) {
		const double mc = tail(sample, g);
		const double se = std::sqrt(std::max(mc * (1 - mc), 1e-4) / 10000.0);
		CHECK_THAT(fisher_p_value(g, 512), WithinAbs(mc, 4 * se + 1e-3));
	}

	const auto x = white(1024, 31337);
	const auto f = fisher_g_test(periodogram(x));
	CHECK(f.p_value > 0.05);
	CHECK_THAT(f.p_value, WithinAbs(tail(sample, f.g), 0.02));
	CHECK(f.p_value <= 1.0);
	CHECK(f.p_value >= 0.0);
}

TEST_CASE("Parseval and scale invariance") {
	for (std::size_t n : {100u, 101u, 4096u}) {
		auto x = white(n, 5 + n);
		for (std::size_t t = 0; t < n; ++t) {
			x[t] = 10.0 + 2.0 * x[t] + std::sin(static_cast<double>(t));
		}
		double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
		double ss = 0.0;
		for (double v : x) {
			ss += (v - mean) * (v - mean);
		}
		const auto p = periodogram(x);
		CHECK_THAT(p.implied_variance(), WithinRel(ss / static_cast<double>(n), 1e-9));

		auto scaled = x;
		for (auto& v : scaled) {
			v *= 1234.5;
		}
		CHECK_THAT(fisher_g_test(periodogram(scaled)).g, WithinRel(fisher_g_test(p).g, 1e-12));
	}
	Periodogram few;
	few.n = 14;
	few.ordinates.assign(7, 1.0);
	few.frequencies.assign(7, 0.1);
	CHECK_THROWS_AS(fisher_g_test(few), DataError);
}
