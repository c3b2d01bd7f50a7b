#include "solarcast/baselines.hpp"

#include "solarcast/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace solarcast::baselines {

// ---------------------------------------------------------------------------
// Naive
// ---------------------------------------------------------------------------

double NaiveModel::predict(const DayIndex& target) const {
	const auto s = static_cast<std::size_t>(target.slot() - 1);
	if (slot_count[s] == 0) {
		throw DataError("naive predictor has no history for day-of-year " + std::to_string(s + 1) +
		                " (target " + target.iso() + ")");
	}
	return slot_mean[s];
}

NaiveModel fit_naive(const DailySeries& history) {
	NaiveModel m;
	std::array<double, 365> sums{};
	const auto slots = history.slots();
	for (std::size_t i = 0; i < history.size(); ++i) {
		if (history.is_missing(i)) {
			continue;
		}
		const auto s = static_cast<std::size_t>(slots[i] - 1);
		sums[s] += history[i];
		m.slot_count[s] += 1;
	}
	for (std::size_t s = 0; s < 365; ++s) {
		m.slot_mean[s] = m.slot_count[s] > 0 ? sums[s] / m.slot_count[s] : 0.0;
	}
	return m;
}

// ---------------------------------------------------------------------------
// Linear models
// ---------------------------------------------------------------------------

namespace {

struct OlsFit {
	double intercept;
	Eigen::VectorXd beta;
};

/// Least squares with intercept, solved on centred columns so the intercept
/// never competes with the ridge.
OlsFit ols_with_intercept(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
	const double y_mean = y.mean();
	if (x.cols() == 0) {
		return {y_mean, Eigen::VectorXd()};
	}
	const Eigen::RowVectorXd x_mean = x.colwise().mean();
	const Eigen::MatrixXd xc = x.rowwise() - x_mean;
	const Eigen::VectorXd yc = y.array() - y_mean;

	Eigen::MatrixXd normal = xc.transpose() * xc;
	normal.diagonal().array() += kRidge;
	const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
	if (ldlt.info() != Eigen::Success) {
		throw NumericalError("singular normal equations in least-squares fit");
	}
	Eigen::VectorXd beta = ldlt.solve(xc.transpose() * yc);
	if (!beta.allFinite()) {
		throw NumericalError("singular normal equations in least-squares fit");
	}
	return {y_mean - x_mean.dot(beta), std::move(beta)};
}

} // namespace

LinearModel fit_ar(std::span<const double> series, std::size_t p) {
	const std::size_t n = series.size();
	if (n <= 10 * p || n <= p) {
		throw DataError("fit_ar(p=" + std::to_string(p) + ") needs more than " +
		                std::to_string(std::max<std::size_t>(10 * p, p)) + " samples, got " +
		                std::to_string(n));
	}
	const auto rows = static_cast<Eigen::Index>(n - p);
	Eigen::VectorXd y(rows);
	Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(p));
	for (Eigen::Index r = 0; r < rows; ++r) {
		const std::size_t t = p + static_cast<std::size_t>(r);
		y(r) = series[t];
		for (std::size_t i = 0; i < p; ++i) {
			x(r, static_cast<Eigen::Index>(i)) = series[t - 1 - i];
		}
	}
	const auto fit = ols_with_intercept(y, x);
	LinearModel m;
	m.intercept = fit.intercept;
	m.ar.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
	return m;
}

LinearModel fit_arma(std::span<const double> series, std::size_t p, std::size_t q) {
	if (q == 0) {
		return fit_ar(series, p);
	}
	const std::size_t n = series.size();
	const std::size_t long_order = std::max<std::size_t>(20, 2 * (p + q));
	if (n <= 10 * (p + q) || n <= 10 * long_order) {
		throw DataError("fit_arma(" + std::to_string(p) + "," + std::to_string(q) + ") needs more than " +
		                std::to_string(10 * long_order) + " samples, got " + std::to_string(n));
	}

	// stage 1: residual proxies from a long autoregression
	const LinearModel long_ar = fit_ar(series, long_order);
	std::vector<double> resid(n, 0.0);
	for (std::size_t t = long_order; t < n; ++t) {
		double pred = long_ar.intercept;
		for (std::size_t i = 0; i < long_order; ++i) {
			pred += long_ar.ar[i] * series[t - 1 - i];
		}
		resid[t] = series[t] - pred;
	}

	// stage 2: regress on lagged values and lagged residual proxies
	const std::size_t first = long_order + std::max(p, q);
	const auto rows = static_cast<Eigen::Index>(n - first);
	Eigen::VectorXd y(rows);
	Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(p + q));
	for (Eigen::Index r = 0; r < rows; ++r) {
		const std::size_t t = first + static_cast<std::size_t>(r);
		y(r) = series[t];
		for (std::size_t i = 0; i < p; ++i) {
			x(r, static_cast<Eigen::Index>(i)) = series[t - 1 - i];
		}
		for (std::size_t j = 0; j < q; ++j) {
			x(r, static_cast<Eigen::Index>(p + j)) = resid[t - 1 - j];
		}
	}
	const auto fit = ols_with_intercept(y, x);
	LinearModel m;
	m.intercept = fit.intercept;
	m.ar.assign(fit.beta.data(), fit.beta.data() + static_cast<Eigen::Index>(p));
	m.ma.assign(fit.beta.data() + static_cast<Eigen::Index>(p), fit.beta.data() + fit.beta.size());
	for (double c : m.ar) {
		if (!std::isfinite(c)) {
			throw NumericalError("non-finite ARMA coefficient");
		}
	}
	return m;
}

double predict_linear(const LinearModel& model, std::span<const double> lags,
                      std::span<const double> residuals) {
	if (lags.size() < model.p() || residuals.size() < model.q()) {
		throw DataError("predict_linear: model needs " + std::to_string(model.p()) + " lags and " +
		                std::to_string(model.q()) + " residuals");
	}
	double y = model.intercept;
	for (std::size_t i = 0; i < model.p(); ++i) {
		y += model.ar[i] * lags[i];
	}
	for (std::size_t j = 0; j < model.q(); ++j) {
		y += model.ma[j] * residuals[j];
	}
	return y;
}

std::vector<double> one_step_linear(const LinearModel& model, std::span<const double> series) {
	const std::size_t n = series.size();
	const std::size_t p = model.p();
	const std::size_t q = model.q();
	std::vector<double> pred(n, DailySeries::kMissing);
	std::vector<double> resid(n, 0.0);
	for (std::size_t t = p; t < n; ++t) {
		double y = model.intercept;
		for (std::size_t i = 0; i < p; ++i) {
			y += model.ar[i] * series[t - 1 - i];
		}
		for (std::size_t j = 0; j < q && j < t; ++j) {
			y += model.ma[j] * resid[t - 1 - j];
		}
		pred[t] = y;
		resid[t] = series[t] - y;
	}
	return pred;
}

// ---------------------------------------------------------------------------
// Discretizer
// ---------------------------------------------------------------------------

std::size_t Discretizer::classify(double value) const noexcept {
	const std::size_t n = n_classes();
	const double lo = edges.front();
	const double width = (edges.back() - lo) / static_cast<double>(n);
	const double pos = std::floor((value - lo) / width);
	if (!(pos > 0.0)) {
		return 0;
	}
	return std::min(static_cast<std::size_t>(pos), n - 1);
}

Discretizer fit_discretizer(std::span<const double> series, std::size_t n_classes) {
	if (n_classes < 1) {
		throw ConfigError("discretizer needs at least one class");
	}
	if (series.size() < 2) {
		throw DataError("discretizer needs at least two values");
	}
	const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
	const double lo = *lo_it;
	const double hi = *hi_it;
	if (!(hi > lo)) {
		throw DataError("discretizer: training values are constant");
	}
	Discretizer d;
	const double width = (hi - lo) / static_cast<double>(n_classes);
	d.edges.resize(n_classes + 1);
	for (std::size_t i = 0; i <= n_classes; ++i) {
		d.edges[i] = lo + width * static_cast<double>(i);
	}
	d.edges.back() = hi;
	d.centers.resize(n_classes);
	for (std::size_t i = 0; i < n_classes; ++i) {
		d.centers[i] = 0.5 * (d.edges[i] + d.edges[i + 1]);
	}
	return d;
}

// ---------------------------------------------------------------------------
// Markov chain
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> classify_all(const Discretizer& d, std::span<const double> values) {
	std::vector<std::size_t> out(values.size());
	std::transform(values.begin(), values.end(), out.begin(),
	               [&](double v) { return d.classify(v); });
	return out;
}

double expected_center(const Discretizer& d, const std::vector<double>& dist) {
	double y = 0.0;
	for (std::size_t c = 0; c < dist.size(); ++c) {
		y += dist[c] * d.centers[c];
	}
	return y;
}

std::vector<double> smoothed(const std::vector<double>& counts, double alpha) {
	const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
	const double denom = total + alpha * static_cast<double>(counts.size());
	std::vector<double> p(counts.size());
	for (std::size_t c = 0; c < counts.size(); ++c) {
		p[c] = (counts[c] + alpha) / denom;
	}
	return p;
}

} // namespace

std::uint64_t MarkovModel::context_key(std::span<const std::size_t> classes) const noexcept {
	std::uint64_t key = 0;
	const auto base = static_cast<std::uint64_t>(discretizer.n_classes());
	for (std::size_t c : classes) {
		key = key * base + static_cast<std::uint64_t>(c);
	}
	return key;
}

MarkovModel fit_markov(std::span<const double> series, const Discretizer& d, std::size_t order,
                       double smoothing) {
	if (series.size() <= order) {
		throw DataError("fit_markov needs more than " + std::to_string(order) + " values");
	}
	if (!(smoothing > 0.0)) {
		throw ConfigError("markov smoothing must be > 0");
	}
	MarkovModel m;
	m.order = order;
	m.discretizer = d;
	m.smoothing = smoothing;
	m.counts.resize(order + 1);
	const std::size_t n_cls = d.n_classes();
	const auto cls = classify_all(d, series);
	for (std::size_t k = 0; k <= order; ++k) {
		for (std::size_t t = k; t < cls.size(); ++t) {
			const std::uint64_t key = m.context_key(std::span(cls).subspan(t - k, k));
			auto& row = m.counts[k][key];
			if (row.empty()) {
				row.assign(n_cls, 0.0);
			}
			row[cls[t]] += 1.0;
		}
	}
	return m;
}

std::vector<double> MarkovModel::next_distribution(std::span<const double> recent) const {
	if (recent.size() < order) {
		throw DataError("markov prediction needs " + std::to_string(order) + " recent values");
	}
	const auto cls = classify_all(discretizer, recent.subspan(recent.size() - order));
	for (std::size_t k = order; k >= 1; --k) {
		const auto key = context_key(std::span(cls).subspan(order - k, k));
		if (auto it = counts[k].find(key); it != counts[k].end()) {
			return smoothed(it->second, smoothing);
		}
	}
	return smoothed(counts[0].at(0), smoothing);
}

double predict_markov(const MarkovModel& model, std::span<const double> recent) {
	return expected_center(model.discretizer, model.next_distribution(recent));
}

// ---------------------------------------------------------------------------
// Naive Bayes
// ---------------------------------------------------------------------------

std::vector<double> BayesModel::priors() const {
	return smoothed(class_counts, smoothing);
}

std::vector<double> BayesModel::posterior(std::span<const double> recent) const {
	if (recent.size() < order) {
		throw DataError("bayes prediction needs " + std::to_string(order) + " recent values");
	}
	const std::size_t n = discretizer.n_classes();
	const auto prior = priors();
	std::vector<double> log_post(n);
	for (std::size_t c = 0; c < n; ++c) {
		double lp = std::log(prior[c]);
		const double denom = class_counts[c] + smoothing * static_cast<double>(n);
		for (std::size_t j = 0; j < order; ++j) {
			const std::size_t a = discretizer.classify(recent[recent.size() - 1 - j]);
			lp += std::log((lag_counts[j][c * n + a] + smoothing) / denom);
		}
		log_post[c] = lp;
	}
	const double top = *std::max_element(log_post.begin(), log_post.end());
	double z = 0.0;
	for (double& v : log_post) {
		v = std::exp(v - top);
		z += v;
	}
	for (double& v : log_post) {
		v /= z;
	}
	return log_post;
}

BayesModel fit_bayes(std::span<const double> series, const Discretizer& d, std::size_t order,
                     double smoothing) {
	if (series.size() <= order) {
		throw DataError("fit_bayes needs more than " + std::to_string(order) + " values");
	}
	if (!(smoothing > 0.0)) {
		throw ConfigError("bayes smoothing must be > 0");
	}
	BayesModel m;
	m.order = order;
	m.discretizer = d;
	m.smoothing = smoothing;
	const std::size_t n = d.n_classes();
	m.class_counts.assign(n, 0.0);
	m.lag_counts.assign(order, std::vector<double>(n * n, 0.0));
	const auto cls = classify_all(d, series);
	for (std::size_t t = order; t < cls.size(); ++t) {
		const std::size_t c = cls[t];
		m.class_counts[c] += 1.0;
		for (std::size_t j = 0; j < order; ++j) {
			m.lag_counts[j][c * n + cls[t - 1 - j]] += 1.0;
		}
	}
	return m;
}

double predict_bayes(const BayesModel& model, std::span<const double> recent) {
	return expected_center(model.discretizer, model.posterior(recent));
}

// ---------------------------------------------------------------------------
// k-NN
// ---------------------------------------------------------------------------

void KnnConfig::validate() const {
	if (k < 1) {
		throw ConfigError("knn k must be >= 1");
	}
	if (window < 1) {
		throw ConfigError("knn window must be >= 1");
	}
}

double knn_predict(std::span<const double> history, std::span<const double> query,
                   const KnnConfig& cfg) {
	cfg.validate();
	const std::size_t w = cfg.window;
	if (query.size() != w) {
		throw DataError("knn query must hold exactly " + std::to_string(w) + " values");
	}
	if (history.size() < w + 1) {
		throw DataError("knn history shorter than window + 1");
	}
	const std::size_t n_cand = history.size() - w;
	if (n_cand < cfg.k) {
		throw DataError("knn: only " + std::to_string(n_cand) + " candidate windows for k = " +
		                std::to_string(cfg.k));
	}

	struct Candidate {
		double dist2;
		std::size_t start;
	};
	std::vector<Candidate> cand(n_cand);
	for (std::size_t i = 0; i < n_cand; ++i) {
		double s = 0.0;
		for (std::size_t j = 0; j < w; ++j) {
			const double d = history[i + j] - query[j];
			s += d * d;
		}
		cand[i] = {s, i};
	}
	auto closer = [](const Candidate& a, const Candidate& b) {
		return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.start < b.start);
	};
	std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(cfg.k), cand.end(), closer);

	double sum = 0.0;
	for (std::size_t i = 0; i < cfg.k; ++i) {
		sum += history[cand[i].start + w];
	}
	return sum / static_cast<double>(cfg.k);
}

double knn_one_step(std::span<const double> series, std::size_t t, const KnnConfig& cfg) {
	const std::size_t w = cfg.window;
	if (t > series.size() || t < 2 * w + 1) {
		throw DataError("knn_one_step: position " + std::to_string(t) + " has too little history");
	}
	const auto query = series.subspan(t - w, w);
	// windows must end before the query begins; their successors may reach its first value
	const auto history = series.subspan(0, t - w + 1);
	return knn_predict(history, query, cfg);
}

} // namespace solarcast::baselines
