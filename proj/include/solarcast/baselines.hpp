#pragma once

#include "solarcast/series.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace solarcast::baselines {

// ---------------------------------------------------------------------------
// Naive climatology
// ---------------------------------------------------------------------------

/// Mean of the training values sharing a seasonal slot.
struct NaiveModel {
	std::array<double, 365> slot_mean{};
	std::array<int, 365> slot_count{};

	/// Throws DataError if the target's slot has no training value.
	double predict(const DayIndex& target) const;
};

NaiveModel fit_naive(const DailySeries& history);

inline double naive_predict(const DailySeries& history, const DayIndex& target) {
	return fit_naive(history).predict(target);
}

// ---------------------------------------------------------------------------
// AR / ARMA
// ---------------------------------------------------------------------------

/// x_t = intercept + sum_i ar[i] x_{t-1-i} + sum_j ma[j] e_{t-1-j}
struct LinearModel {
	std::vector<double> ar;
	std::vector<double> ma;
	double intercept = 0.0;

	std::size_t p() const noexcept { return ar.size(); }
	std::size_t q() const noexcept { return ma.size(); }
};

/// Ridge added to the centred normal equations so constant inputs stay solvable.
inline constexpr double kRidge = 1e-9;

/// OLS with intercept on the lag matrix. Needs more than 10 p samples (at least
/// one for p = 0).
LinearModel fit_ar(std::span<const double> series, std::size_t p);

/// Hannan-Rissanen: a long AR of order max(20, 2(p+q)) supplies residual
/// proxies, then OLS of x_t on p lags of x and q lags of those residuals.
/// q = 0 reduces to fit_ar.
LinearModel fit_arma(std::span<const double> series, std::size_t p, std::size_t q);

/// `lags[0]` is x_{t-1}, `residuals[0]` is e_{t-1}.
double predict_linear(const LinearModel& model, std::span<const double> lags,
                      std::span<const double> residuals);

/// Runs the model over the whole series and returns the one-step prediction
/// for every position t >= p (earlier positions are NaN). Prediction t uses
/// only series[0, t); residuals before position p are taken as 0.
std::vector<double> one_step_linear(const LinearModel& model, std::span<const double> series);

// ---------------------------------------------------------------------------
// Discretized models
// ---------------------------------------------------------------------------

/// Equal-width classes over the training range; values outside the range clamp
/// to the edge classes.
struct Discretizer {
	std::vector<double> edges;   // n_classes + 1, strictly increasing
	std::vector<double> centers; // n_classes

	std::size_t n_classes() const noexcept { return centers.size(); }
	std::size_t classify(double value) const noexcept;
};

Discretizer fit_discretizer(std::span<const double> series, std::size_t n_classes = 50);

/// Order-k Markov chain on classes with additive smoothing and a fallback to
/// shorter contexts (down to the marginal) when a context was never seen.
struct MarkovModel {
	std::size_t order = 3;
	Discretizer discretizer;
	double smoothing = 1.0;
	/// counts[k] maps a length-k context key to next-class counts; counts[0]
	/// holds the marginal under key 0.
	std::vector<std::unordered_map<std::uint64_t, std::vector<double>>> counts;

	std::uint64_t context_key(std::span<const std::size_t> classes) const noexcept;
	/// Smoothed next-class distribution after the most recent values, using
	/// the longest seen context.
	std::vector<double> next_distribution(std::span<const double> recent) const;
};

MarkovModel fit_markov(std::span<const double> series, const Discretizer& d, std::size_t order = 3,
                       double smoothing = 1.0);
/// Expected class center under next_distribution.
double predict_markov(const MarkovModel& model, std::span<const double> recent);

/// Naive Bayes: P(next = c | lags) proportional to P(c) prod_j P(lag_j class | c).
struct BayesModel {
	std::size_t order = 3;
	Discretizer discretizer;
	double smoothing = 1.0;
	std::vector<double> class_counts;
	/// lag_counts[j][c * n + a]: times lag j+1 had class a when next was c.
	std::vector<std::vector<double>> lag_counts;

	std::vector<double> priors() const;
	std::vector<double> posterior(std::span<const double> recent) const;
};

BayesModel fit_bayes(std::span<const double> series, const Discretizer& d, std::size_t order = 3,
                     double smoothing = 1.0);
double predict_bayes(const BayesModel& model, std::span<const double> recent);

// ---------------------------------------------------------------------------
// k nearest neighbours
// ---------------------------------------------------------------------------

struct KnnConfig {
	std::size_t k = 10;
	std::size_t window = 10;

	void validate() const;
};

/// Mean successor of the k historical windows closest (Euclidean) to `query`.
/// Candidates are history[i, i+window) with successor history[i+window]; equal
/// distances go to the earlier window. The caller keeps candidate windows
/// clear of the query (see knn_one_step).
double knn_predict(std::span<const double> history, std::span<const double> query,
                   const KnnConfig& cfg);

/// Forecast for position t of `series` using only series[0, t): the query is
/// the last `window` values before t and candidate windows end before the
/// query starts.
double knn_one_step(std::span<const double> series, std::size_t t, const KnnConfig& cfg);

} // namespace solarcast::baselines
