#pragma once

#include "solarcast/baselines.hpp"
#include "solarcast/mlp.hpp"
#include "solarcast/model_io.hpp"
#include "solarcast/series.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace solarcast {

enum class ModelKind { Naive, Ar, Arma, Markov, Bayes, Knn, Mlp };

std::string to_string(ModelKind kind);
/// Accepts naive, ar, arma, markov, bayes, knn, mlp. Throws ConfigError.
ModelKind parse_model_kind(const std::string& name);

/// Hyperparameters for every model; defaults are the published choices.
struct ModelParams {
	std::size_t ar_order = 8;
	std::size_t arma_p = 2;
	std::size_t arma_q = 2;
	std::size_t n_classes = 50;
	std::size_t chain_order = 3;
	double smoothing = 1.0;
	baselines::KnnConfig knn{};
	mlp::MlpLayout layout{};
	mlp::LmConfig lm{};
	std::uint64_t seed = 1;
};

/// Fit once on a training span, then forecast one step ahead. All values are
/// in model space (corrected or raw, as the caller decides).
class Forecaster {
public:
	virtual ~Forecaster() = default;

	virtual ModelKind kind() const = 0;
	virtual void fit(const DailySeries& train) = 0;
	/// Forecast for every position in [first, first + count) of `series`;
	/// position t only sees series[0, t).
	virtual std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                          std::size_t count) const = 0;
	virtual void save(ModelFile& file) const = 0;
	virtual void load(const ModelFile& file) = 0;
};

std::unique_ptr<Forecaster> make_forecaster(ModelKind kind, const ModelParams& params);
/// Reads `model=` from the file and restores the fitted state.
std::unique_ptr<Forecaster> load_forecaster(const ModelFile& file);

/// MLP access for training diagnostics.
class MlpForecaster;
const mlp::TrainHistory* training_history(const Forecaster& f);

} // namespace solarcast
