#pragma once

#include "solarcast/preprocess.hpp"
#include "solarcast/series.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace solarcast::mlp {

/// Layer sizes, input first. Hidden layers use g(a) = exp(-a^2); the single
/// output unit is linear.
struct MlpLayout {
	std::vector<std::size_t> sizes{8, 3, 1};

	/// Throws ConfigError unless there is at least one hidden layer, every
	/// size is >= 1 and the output size is 1.
	void validate() const;
	std::size_t n_inputs() const { return sizes.front(); }
	std::size_t n_layers() const { return sizes.size() - 1; } // weight layers
	std::size_t n_params() const;
};

inline double gaussian(double a) {
	return std::exp(-a * a);
}
inline double gaussian_derivative(double a) {
	return -2.0 * a * std::exp(-a * a);
}

/// Perceptron parameters in one flat vector. Layer l stores its weights
/// (out x in, row-major) followed by its biases.
class Mlp {
public:
	using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

	/// All parameters zero.
	explicit Mlp(MlpLayout layout);
	Mlp(MlpLayout layout, Eigen::VectorXd params);
	/// Every parameter drawn uniformly from [-0.5, 0.5] with mt19937_64(seed).
	static Mlp random(MlpLayout layout, std::uint64_t seed);

	const MlpLayout& layout() const noexcept { return layout_; }
	const Eigen::VectorXd& params() const noexcept { return params_; }
	Eigen::VectorXd& params() noexcept { return params_; }

	Eigen::Map<const RowMatrix> weights(std::size_t layer) const;
	Eigen::Map<RowMatrix> weights(std::size_t layer);
	Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
	Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

	/// Throws DataError on an input of the wrong length.
	double forward(std::span<const double> input) const;

private:
	std::size_t offset(std::size_t layer) const;

	MlpLayout layout_;
	Eigen::VectorXd params_;
};

/// Sliding windows: row i holds the p values preceding its target, oldest first.
struct WindowDataset {
	Eigen::MatrixXd inputs; // rows x p
	Eigen::VectorXd targets;
	std::vector<DayIndex> target_days;

	std::size_t rows() const noexcept { return static_cast<std::size_t>(targets.size()); }
	/// Rows [first, first + count) as a new dataset.
	WindowDataset slice(std::size_t first, std::size_t count) const;
};

/// Every window of p consecutive present values followed by a present target.
/// Throws DataError when the series holds no more than p values.
WindowDataset make_windows(const DailySeries& series, std::size_t p = 8);

/// Min-max scaling to [0, 1] per channel; channels are the input columns
/// followed by the target. Values outside the fitted range map outside [0, 1].
struct Scaler {
	std::vector<double> min;
	std::vector<double> max;

	double scale(double value, std::size_t channel) const;
	double unscale(double value, std::size_t channel) const;
	std::size_t target_channel() const noexcept { return min.size() - 1; }
};

/// Throws DataError for a constant channel.
Scaler fit_scaler(const WindowDataset& data);
WindowDataset scale(const Scaler& scaler, const WindowDataset& data);

/// d(output_i)/d(theta) for every sample, i.e. the residual Jacobian for
/// r = output - target.
Eigen::MatrixXd jacobian(const Mlp& mlp, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd jacobian(const Mlp& mlp, const WindowDataset& batch);

Eigen::VectorXd outputs(const Mlp& mlp, const Eigen::MatrixXd& inputs);
double mse(const Mlp& mlp, const WindowDataset& data);

struct LmConfig {
	double lambda0 = 1e-3;
	double lambda_up = 10.0;
	double lambda_down = 10.0;
	double lambda_min = 1e-12;
	double lambda_max = 1e12;
	int max_inflations = 20;
	int max_epochs = 1000;
	int max_fail = 5;
	double min_gradient = 1e-10;
	double val_fraction = 0.2;

	void validate() const;
};

enum class StopReason { MaxFail, MaxEpochs, MinGradient, LambdaMax };
std::string to_string(StopReason reason);

struct EpochRecord {
	double train_mse;
	double val_mse; // NaN without a validation split
	double lambda;
	bool accepted;
};

struct TrainHistory {
	std::vector<EpochRecord> epochs;
	StopReason stop_reason = StopReason::MaxEpochs;
	/// Epoch whose weights were returned; 0 means the initial weights.
	std::size_t best_epoch = 0;
	double initial_train_mse = 0.0;
	double initial_val_mse = 0.0;
	std::string diagnostic;
};

struct TrainResult {
	Mlp mlp;
	TrainHistory history;
};

/// Levenberg-Marquardt on the first (1 - val_fraction) rows with early
/// stopping on the remaining rows (chronological split). Each epoch solves
/// (J'J + lambda I) d = -J'r; a step that lowers the training MSE is accepted
/// and lambda shrinks, otherwise lambda grows and the step is retried. The
/// weights with the best validation MSE are returned. Throws NumericalError
/// if the loss at the starting point is not finite.
TrainResult train_lm(const Mlp& initial, const WindowDataset& data, const LmConfig& cfg);

/// One-step-ahead forecasts in Wh/m² for consecutive `test_days`. Each day's
/// inputs are the p measured values before it, mapped through the
/// preprocessor (or used raw when it is null), scaled, run forward, unscaled,
/// inverted, and floored at 0.
DailySeries predict_series(const Mlp& mlp, const Scaler& scaler,
                           const preprocess::Preprocessor* preprocessor,
                           const DailySeries& history, std::span<const DayIndex> test_days);

} // namespace solarcast::mlp
