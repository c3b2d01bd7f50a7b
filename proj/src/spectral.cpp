#include "solarcast/spectral.hpp"

#include "solarcast/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

namespace solarcast::spectral {

namespace {

struct FftwFree {
	void operator()(void* p) const noexcept { fftw_free(p); }
};
// the FFTW planner is not re-entrant; only fftw_execute is
std::mutex& planner_mutex() {
	static std::mutex m;
	return m;
}

struct PlanDestroy {
	void operator()(fftw_plan_s* p) const noexcept {
		std::lock_guard lock(planner_mutex());
		fftw_destroy_plan(p);
	}
};

fftw_plan_s* make_plan(std::size_t n, double* in, fftw_complex* out) {
	std::lock_guard lock(planner_mutex());
	return fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
}

} // namespace

double Periodogram::ordinate_near_period(double days) const {
	if (ordinates.empty() || days <= 0.0) {
		throw DataError("ordinate_near_period: empty periodogram or non-positive period");
	}
	const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) / days));
	const std::size_t clamped = std::clamp<std::size_t>(k, 1, ordinates.size());
	return ordinates[clamped - 1];
}

double Periodogram::implied_variance() const {
	double total = 0.0;
	for (std::size_t i = 0; i < ordinates.size(); ++i) {
		const std::size_t k = i + 1;
		total += (2 * k == n) ? ordinates[i] : 2.0 * ordinates[i];
	}
	return total / static_cast<double>(n);
}

Periodogram periodogram(std::span<const double> series) {
	const std::size_t n = series.size();
	if (n < 16) {
		throw DataError("periodogram needs at least 16 samples, got " + std::to_string(n));
	}
	double sum = 0.0;
	double lo = INFINITY;
	double hi = -INFINITY;
	std::size_t present = 0;
	for (double v : series) {
		if (!std::isnan(v)) {
			sum += v;
			lo = std::min(lo, v);
			hi = std::max(hi, v);
			++present;
		}
	}
	if (present == 0) {
		throw DataError("periodogram: every sample is missing");
	}
	// a constant series gets its exact value as mean, so the spectrum is exactly zero
	const double mean = (lo == hi) ? lo : sum / static_cast<double>(present);

	std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
	const std::size_t n_out = n / 2 + 1;
	std::unique_ptr<fftw_complex, FftwFree> out(
	    static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_out)));
	// FFTW_ESTIMATE leaves the input untouched and picks the plan
	// deterministically, so repeated calls give identical bits.
	std::unique_ptr<fftw_plan_s, PlanDestroy> plan(make_plan(n, in.get(), out.get()));
	if (!plan) {
		throw NumericalError("FFTW failed to create a plan for n = " + std::to_string(n));
	}
	for (std::size_t i = 0; i < n; ++i) {
		const double v = series[i];
		in.get()[i] = (std::isnan(v) ? mean : v) - mean;
	}
	fftw_execute(plan.get());

	Periodogram p;
	p.n = n;
	const std::size_t half = n / 2;
	p.frequencies.resize(half);
	p.ordinates.resize(half);
	for (std::size_t k = 1; k <= half; ++k) {
		const double re = out.get()[k][0];
		const double im = out.get()[k][1];
		p.frequencies[k - 1] = static_cast<double>(k) / static_cast<double>(n);
		p.ordinates[k - 1] = (re * re + im * im) / static_cast<double>(n);
	}
	return p;
}

double dominant_period(const Periodogram& p) {
	if (p.ordinates.empty()) {
		throw NumericalError("dominant_period: empty periodogram");
	}
	// max_element returns the first maximum, i.e. the lowest k
	const auto it = std::max_element(p.ordinates.begin(), p.ordinates.end());
	if (!(*it > 0.0)) {
		throw NumericalError("dominant_period: periodogram has no peak (all ordinates zero)");
	}
	return p.period_at(static_cast<std::size_t>(it - p.ordinates.begin()));
}

double fisher_p_value(double g, std::size_t q) {
	if (q < 2) {
		throw DataError("fisher_p_value needs at least two ordinates");
	}
	if (!(g > 0.0)) {
		return 1.0;
	}
	if (g >= 1.0) {
		return 0.0;
	}
	const double qd = static_cast<double>(q);
	if (g <= 1.0 / qd) {
		return 1.0; // the largest ordinate is never below the mean
	}
	// Leading term ~ expected number of ordinates above g; when it is large the
	// tail probability is 1 - O(exp(-lambda)) and the alternating terms grow
	// past what even the extended precision below can cancel.
	const double lambda = qd * std::exp((qd - 1.0) * std::log1p(-g));
	if (lambda > 150.0) {
		return 1.0;
	}

	using Real = boost::multiprecision::cpp_bin_float_100;
	const auto terms = static_cast<std::size_t>(std::floor(1.0 / g));
	const Real gr(g);
	const Real log_q_fact = boost::multiprecision::lgamma(Real(qd + 1.0));
	Real total = 0;
	for (std::size_t j = 1; j <= std::min(terms, q); ++j) {
		const Real base = 1 - Real(j) * gr;
		if (base <= 0) {
			break;
		}
		const Real log_binom = log_q_fact - boost::multiprecision::lgamma(Real(j + 1)) -
		                       boost::multiprecision::lgamma(Real(q - j + 1));
		const Real term = boost::multiprecision::exp(log_binom + Real(qd - 1.0) * boost::multiprecision::log(base));
		total += (j % 2 == 1) ? term : Real(-term);
	}
	return std::clamp(total.convert_to<double>(), 0.0, 1.0);
}

FisherTestResult fisher_g_test(const Periodogram& p) {
	if (p.ordinates.size() < 8) {
		throw DataError("fisher_g_test needs at least 8 ordinates");
	}
	const double total = std::accumulate(p.ordinates.begin(), p.ordinates.end(), 0.0);
	if (!(total > 0.0)) {
		throw NumericalError("fisher_g_test: zero total power");
	}
	const auto it = std::max_element(p.ordinates.begin(), p.ordinates.end());
	FisherTestResult r;
	r.g = *it / total;
	r.p_value = fisher_p_value(r.g, p.ordinates.size());
	r.peak_period = p.period_at(static_cast<std::size_t>(it - p.ordinates.begin()));
	return r;
}

} // namespace solarcast::spectral
