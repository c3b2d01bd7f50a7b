#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace solarcast::spectral {

/// One-sided raw periodogram of a mean-removed series.
///
/// ordinates[k-1] = |DFT(x - mean)_k|^2 / n for k = 1..floor(n/2), at frequency
/// k/n cycles per day (period n/k days).
struct Periodogram {
	std::vector<double> frequencies;
	std::vector<double> ordinates;
	std::size_t n = 0;

	double period_at(std::size_t index) const {
		return static_cast<double>(n) / static_cast<double>(index + 1);
	}
	/// Ordinate of the Fourier frequency whose period is closest to `days`.
	double ordinate_near_period(double days) const;
	/// Population variance implied by the ordinates. Every k < n/2 stands for
	/// the pair (k, n-k) and counts twice; a Nyquist ordinate (even n) counts
	/// once. Equals the population variance of the input up to rounding.
	double implied_variance() const;
};

/// Missing values (NaN) are replaced by the mean of the present ones first.
/// Requires at least 16 samples.
Periodogram periodogram(std::span<const double> series);

/// n / argmax_k I_k; ties go to the lower k. Throws NumericalError when every
/// ordinate is zero.
double dominant_period(const Periodogram& p);

struct FisherTestResult {
	double g = 0.0;
	double p_value = 1.0;
	double peak_period = 0.0;
};

/// Exact null tail of Fisher's g for q ordinates:
///   P(G > g) = sum_{j=1}^{floor(1/g)} (-1)^{j-1} C(q, j) (1 - j g)^{q-1}
double fisher_p_value(double g, std::size_t q);

/// Fisher's g = max I / sum I with its exact p-value. Needs >= 8 ordinates;
/// throws NumericalError on zero total power.
FisherTestResult fisher_g_test(const Periodogram& p);

} // namespace solarcast::spectral
