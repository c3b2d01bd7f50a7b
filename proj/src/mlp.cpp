#include "solarcast/mlp.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace solarcast::mlp {

// ---------------------------------------------------------------------------
// Layout and parameters
// ---------------------------------------------------------------------------

void MlpLayout::validate() const {
	if (sizes.size() < 3) {
		throw ConfigError("MLP layout needs input, at least one hidden layer, and output");
	}
	if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; })) {
		throw ConfigError("MLP layer sizes must be >= 1");
	}
	if (sizes.back() != 1) {
		throw ConfigError("MLP output layer must have exactly one unit");
	}
}

std::size_t MlpLayout::n_params() const {
	std::size_t total = 0;
	for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
		total += sizes[l + 1] * sizes[l] + sizes[l + 1];
	}
	return total;
}

Mlp::Mlp(MlpLayout layout) : layout_(std::move(layout)) {
	layout_.validate();
	params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.n_params()));
}

Mlp::Mlp(MlpLayout layout, Eigen::VectorXd params) : layout_(std::move(layout)), params_(std::move(params)) {
	layout_.validate();
	if (static_cast<std::size_t>(params_.size()) != layout_.n_params()) {
		throw DataError("MLP parameter count " + std::to_string(params_.size()) + " does not match layout (" +
		                std::to_string(layout_.n_params()) + ")");
	}
	if (!params_.allFinite()) {
		throw DataError("MLP parameters must be finite");
	}
}

Mlp Mlp::random(MlpLayout layout, std::uint64_t seed) {
	Mlp m(std::move(layout));
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> uniform(-0.5, 0.5);
	for (Eigen::Index i = 0; i < m.params_.size(); ++i) {
		m.params_(i) = uniform(rng);
	}
	return m;
}

std::size_t Mlp::offset(std::size_t layer) const {
	std::size_t off = 0;
	for (std::size_t l = 0; l < layer; ++l) {
		off += layout_.sizes[l + 1] * layout_.sizes[l] + layout_.sizes[l + 1];
	}
	return off;
}

Eigen::Map<const Mlp::RowMatrix> Mlp::weights(std::size_t layer) const {
	const auto rows = static_cast<Eigen::Index>(layout_.sizes[layer + 1]);
	const auto cols = static_cast<Eigen::Index>(layout_.sizes[layer]);
	return {params_.data() + offset(layer), rows, cols};
}

Eigen::Map<Mlp::RowMatrix> Mlp::weights(std::size_t layer) {
	const auto rows = static_cast<Eigen::Index>(layout_.sizes[layer + 1]);
	const auto cols = static_cast<Eigen::Index>(layout_.sizes[layer]);
	return {params_.data() + offset(layer), rows, cols};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
	const auto rows = layout_.sizes[layer + 1];
	return {params_.data() + offset(layer) + rows * layout_.sizes[layer], static_cast<Eigen::Index>(rows)};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t layer) {
	const auto rows = layout_.sizes[layer + 1];
	return {params_.data() + offset(layer) + rows * layout_.sizes[layer], static_cast<Eigen::Index>(rows)};
}

double Mlp::forward(std::span<const double> input) const {
	if (input.size() != layout_.n_inputs()) {
		throw DataError("MLP expects " + std::to_string(layout_.n_inputs()) + " inputs, got " +
		                std::to_string(input.size()));
	}
	Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
	const std::size_t last = layout_.n_layers() - 1;
	for (std::size_t l = 0; l < last; ++l) {
		const Eigen::VectorXd a = weights(l) * h + bias(l);
		h = a.unaryExpr([](double v) { return gaussian(v); });
	}
	return (weights(last) * h + bias(last))(0);
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

WindowDataset WindowDataset::slice(std::size_t first, std::size_t count) const {
	if (first + count > rows()) {
		throw DataError("window dataset slice out of range");
	}
	WindowDataset out;
	const auto f = static_cast<Eigen::Index>(first);
	const auto c = static_cast<Eigen::Index>(count);
	out.inputs = inputs.middleRows(f, c);
	out.targets = targets.segment(f, c);
	out.target_days.assign(target_days.begin() + f, target_days.begin() + f + c);
	return out;
}

WindowDataset make_windows(const DailySeries& series, std::size_t p) {
	const std::size_t n = series.size();
	if (p == 0 || n <= p) {
		throw DataError("make_windows: series of length " + std::to_string(n) + " is too short for " +
		                std::to_string(p) + " lags");
	}
	std::vector<std::size_t> targets;
	std::size_t run = 0; // present values ending just before t
	for (std::size_t t = 0; t < n; ++t) {
		if (run >= p && !series.is_missing(t)) {
			targets.push_back(t);
		}
		run = series.is_missing(t) ? 0 : run + 1;
	}
	WindowDataset d;
	const auto rows = static_cast<Eigen::Index>(targets.size());
	d.inputs.resize(rows, static_cast<Eigen::Index>(p));
	d.targets.resize(rows);
	d.target_days.reserve(targets.size());
	for (Eigen::Index r = 0; r < rows; ++r) {
		const std::size_t t = targets[static_cast<std::size_t>(r)];
		for (std::size_t j = 0; j < p; ++j) {
			d.inputs(r, static_cast<Eigen::Index>(j)) = series[t - p + j];
		}
		d.targets(r) = series[t];
		d.target_days.push_back(series.day_at(t));
	}
	return d;
}

double Scaler::scale(double value, std::size_t channel) const {
	return (value - min.at(channel)) / (max.at(channel) - min.at(channel));
}

double Scaler::unscale(double value, std::size_t channel) const {
	return min.at(channel) + value * (max.at(channel) - min.at(channel));
}

Scaler fit_scaler(const WindowDataset& data) {
	if (data.rows() == 0) {
		throw DataError("fit_scaler: empty dataset");
	}
	Scaler s;
	const auto cols = data.inputs.cols();
	for (Eigen::Index c = 0; c <= cols; ++c) {
		const auto column = c < cols ? Eigen::VectorXd(data.inputs.col(c)) : data.targets;
		const double lo = column.minCoeff();
		const double hi = column.maxCoeff();
		if (!(hi > lo)) {
			throw DataError("fit_scaler: channel " + std::to_string(c) + " is constant");
		}
		s.min.push_back(lo);
		s.max.push_back(hi);
	}
	return s;
}

WindowDataset scale(const Scaler& scaler, const WindowDataset& data) {
	if (scaler.min.size() != static_cast<std::size_t>(data.inputs.cols()) + 1) {
		throw DataError("scaler channel count does not match dataset");
	}
	WindowDataset out = data;
	for (Eigen::Index c = 0; c < out.inputs.cols(); ++c) {
		const auto ch = static_cast<std::size_t>(c);
		out.inputs.col(c) = out.inputs.col(c).unaryExpr([&](double v) { return scaler.scale(v, ch); });
	}
	out.targets = out.targets.unaryExpr([&](double v) { return scaler.scale(v, scaler.target_channel()); });
	return out;
}

// ---------------------------------------------------------------------------
// Forward pass and Jacobian over a batch
// ---------------------------------------------------------------------------

namespace {

struct BatchPass {
	std::vector<Eigen::MatrixXd> activations; // [0] = inputs, then each hidden layer output
	std::vector<Eigen::MatrixXd> pre;         // pre-activations of each hidden layer
	Eigen::VectorXd output;
};

BatchPass run_batch(const Mlp& mlp, const Eigen::MatrixXd& inputs) {
	const auto& layout = mlp.layout();
	if (static_cast<std::size_t>(inputs.cols()) != layout.n_inputs()) {
		throw DataError("batch has " + std::to_string(inputs.cols()) + " columns, MLP expects " +
		                std::to_string(layout.n_inputs()));
	}
	BatchPass pass;
	pass.activations.push_back(inputs);
	const std::size_t last = layout.n_layers() - 1;
	for (std::size_t l = 0; l < last; ++l) {
		Eigen::MatrixXd a = pass.activations.back() * mlp.weights(l).transpose();
		a.rowwise() += mlp.bias(l).transpose();
		pass.activations.push_back(a.unaryExpr([](double v) { return gaussian(v); }));
		pass.pre.push_back(std::move(a));
	}
	pass.output = pass.activations.back() * mlp.weights(last).transpose().col(0);
	pass.output.array() += mlp.bias(last)(0);
	return pass;
}

} // namespace

Eigen::VectorXd outputs(const Mlp& mlp, const Eigen::MatrixXd& inputs) {
	return run_batch(mlp, inputs).output;
}

double mse(const Mlp& mlp, const WindowDataset& data) {
	if (data.rows() == 0) {
		return std::nan("");
	}
	return (outputs(mlp, data.inputs) - data.targets).squaredNorm() / static_cast<double>(data.rows());
}

Eigen::MatrixXd jacobian(const Mlp& mlp, const Eigen::MatrixXd& inputs) {
	const auto& layout = mlp.layout();
	const BatchPass pass = run_batch(mlp, inputs);
	const Eigen::Index n = inputs.rows();
	Eigen::MatrixXd jac(n, static_cast<Eigen::Index>(layout.n_params()));

	// column offsets per layer, same layout as Mlp::params()
	std::vector<Eigen::Index> offsets(layout.n_layers());
	Eigen::Index off = 0;
	for (std::size_t l = 0; l < layout.n_layers(); ++l) {
		offsets[l] = off;
		off += static_cast<Eigen::Index>(layout.sizes[l + 1] * layout.sizes[l] + layout.sizes[l + 1]);
	}

	auto fill_layer = [&](std::size_t l, const Eigen::MatrixXd& d_pre) {
		// d_pre: n x out, derivative of the output w.r.t. this layer's pre-activation
		const Eigen::MatrixXd& h_in = pass.activations[l];
		const Eigen::Index n_out = d_pre.cols();
		const Eigen::Index n_in = h_in.cols();
		for (Eigen::Index o = 0; o < n_out; ++o) {
			for (Eigen::Index i = 0; i < n_in; ++i) {
				jac.col(offsets[l] + o * n_in + i) = d_pre.col(o).cwiseProduct(h_in.col(i));
			}
			jac.col(offsets[l] + n_out * n_in + o) = d_pre.col(o);
		}
	};

	const std::size_t last = layout.n_layers() - 1;
	Eigen::MatrixXd d_pre = Eigen::MatrixXd::Ones(n, 1);
	fill_layer(last, d_pre);
	// derivative w.r.t. the last hidden activations
	Eigen::MatrixXd d_act = d_pre * mlp.weights(last);
	for (std::size_t l = last; l-- > 0;) {
		d_pre = d_act.cwiseProduct(pass.pre[l].unaryExpr([](double a) { return gaussian_derivative(a); }));
		fill_layer(l, d_pre);
		if (l > 0) {
			d_act = d_pre * mlp.weights(l);
		}
	}
	return jac;
}

Eigen::MatrixXd jacobian(const Mlp& mlp, const WindowDataset& batch) {
	if (batch.rows() == 0) {
		throw DataError("jacobian: empty batch");
	}
	return jacobian(mlp, batch.inputs);
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt
// ---------------------------------------------------------------------------

void LmConfig::validate() const {
	if (!(lambda0 > 0.0)) {
		throw ConfigError("lambda0 must be > 0");
	}
	if (!(lambda_up > 1.0) || !(lambda_down > 1.0)) {
		throw ConfigError("lambda factors must be > 1");
	}
	if (max_fail < 1) {
		throw ConfigError("max_fail must be >= 1");
	}
	if (max_epochs < 0) {
		throw ConfigError("max_epochs must be >= 0");
	}
	if (max_inflations < 1) {
		throw ConfigError("max_inflations must be >= 1");
	}
	if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
		throw ConfigError("val_fraction must lie in [0, 1)");
	}
}

std::string to_string(StopReason reason) {
	switch (reason) {
	case StopReason::MaxFail:
		return "max_fail";
	case StopReason::MaxEpochs:
		return "max_epochs";
	case StopReason::MinGradient:
		return "min_gradient";
	case StopReason::LambdaMax:
		return "lambda_max";
	}
	return "unknown";
}

TrainResult train_lm(const Mlp& initial, const WindowDataset& data, const LmConfig& cfg) {
	cfg.validate();
	const std::size_t n = data.rows();
	const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.val_fraction));
	const std::size_t n_train = n - n_val;
	if (n_train == 0) {
		throw DataError("train_lm: no training rows");
	}
	const WindowDataset train = data.slice(0, n_train);
	const WindowDataset val = data.slice(n_train, n_val);
	const bool has_val = n_val > 0;

	Mlp current = initial;
	Mlp best = initial;
	TrainHistory history;
	double train_mse = mse(current, train);
	if (!std::isfinite(train_mse)) {
		throw NumericalError("train_lm: initial training loss is not finite");
	}
	double best_val = has_val ? mse(current, val) : std::nan("");
	history.initial_train_mse = train_mse;
	history.initial_val_mse = best_val;

	const auto n_params = static_cast<Eigen::Index>(initial.layout().n_params());
	const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n_params, n_params);
	double lambda = cfg.lambda0;
	int fails = 0;
	bool stopped = false;

	for (int epoch = 0; epoch < cfg.max_epochs && !stopped; ++epoch) {
		const Eigen::MatrixXd jac = jacobian(current, train.inputs);
		const Eigen::VectorXd resid = outputs(current, train.inputs) - train.targets;
		const Eigen::VectorXd grad = jac.transpose() * resid;
		if (grad.norm() < cfg.min_gradient) {
			history.stop_reason = StopReason::MinGradient;
			break;
		}
		const Eigen::MatrixXd jtj = jac.transpose() * jac;

		bool accepted = false;
		for (int attempt = 0; attempt < cfg.max_inflations; ++attempt) {
			const Eigen::VectorXd step = (jtj + lambda * identity).ldlt().solve(-grad);
			Mlp candidate(current.layout(), current.params());
			candidate.params() += step;
			const double cand_mse = step.allFinite() ? mse(candidate, train) : std::nan("");
			if (std::isfinite(cand_mse) && cand_mse < train_mse) {
				current = std::move(candidate);
				train_mse = cand_mse;
				lambda = std::max(lambda / cfg.lambda_down, cfg.lambda_min);
				accepted = true;
				break;
			}
			lambda *= cfg.lambda_up;
			if (lambda > cfg.lambda_max) {
				history.stop_reason = StopReason::LambdaMax;
				history.diagnostic = "damping exceeded " + std::to_string(cfg.lambda_max) + " at epoch " +
				                     std::to_string(epoch + 1);
				stopped = true;
				break;
			}
		}

		const double val_mse = has_val ? mse(current, val) : std::nan("");
		history.epochs.push_back({train_mse, val_mse, lambda, accepted});
		if (stopped) {
			break;
		}
		if (has_val) {
			if (val_mse < best_val) {
				best_val = val_mse;
				best = current;
				history.best_epoch = history.epochs.size();
				fails = 0;
			} else if (++fails >= cfg.max_fail) {
				history.stop_reason = StopReason::MaxFail;
				stopped = true;
			}
		} else {
			best = current;
			history.best_epoch = history.epochs.size();
		}
	}
	if (!stopped && history.stop_reason != StopReason::MinGradient) {
		history.stop_reason = StopReason::MaxEpochs;
	}
	return {std::move(best), std::move(history)};
}

// ---------------------------------------------------------------------------
// Forecasting
// ---------------------------------------------------------------------------

DailySeries predict_series(const Mlp& mlp, const Scaler& scaler,
                           const preprocess::Preprocessor* preprocessor,
                           const DailySeries& history, std::span<const DayIndex> test_days) {
	if (test_days.empty()) {
		throw DataError("predict_series: no test days");
	}
	const std::size_t p = mlp.layout().n_inputs();
	if (scaler.min.size() != p + 1) {
		throw DataError("predict_series: scaler does not match MLP inputs");
	}
	std::vector<double> out;
	out.reserve(test_days.size());
	std::vector<double> lags(p);
	for (std::size_t k = 0; k < test_days.size(); ++k) {
		const DayIndex& day = test_days[k];
		if (k > 0 && day.ordinal() != test_days[k - 1].ordinal() + 1) {
			throw DataError("predict_series: test days must be consecutive (gap after " +
			                test_days[k - 1].iso() + ")");
		}
		const auto pos = history.position_of(day.plus(-1));
		if (!pos || *pos + 1 < p) {
			throw DataError("predict_series: fewer than " + std::to_string(p) + " measured days before " +
			                day.iso());
		}
		const std::size_t first = *pos + 1 - p;
		for (std::size_t j = 0; j < p; ++j) {
			const double x = history[first + j];
			if (std::isnan(x)) {
				throw DataError("predict_series: missing measurement on " + history.day_at(first + j).iso() +
				                " needed for " + day.iso());
			}
			const double model_x = preprocessor ? preprocessor->apply_one(history.day_at(first + j), x) : x;
			lags[j] = scaler.scale(model_x, j);
		}
		const double y = scaler.unscale(mlp.forward(lags), scaler.target_channel());
		const double wh = preprocessor ? preprocessor->invert_one(day, y) : y;
		out.push_back(std::max(0.0, wh));
	}
	return DailySeries(test_days.front(), std::move(out), "mlp");
}

} // namespace solarcast::mlp
