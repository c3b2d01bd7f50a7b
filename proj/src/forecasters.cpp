#include "solarcast/forecasters.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace solarcast {

std::string to_string(ModelKind kind) {
	switch (kind) {
	case ModelKind::Naive:
		return "naive";
	case ModelKind::Ar:
		return "ar";
	case ModelKind::Arma:
		return "arma";
	case ModelKind::Markov:
		return "markov";
	case ModelKind::Bayes:
		return "bayes";
	case ModelKind::Knn:
		return "knn";
	case ModelKind::Mlp:
		return "mlp";
	}
	return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
	for (ModelKind k : {ModelKind::Naive, ModelKind::Ar, ModelKind::Arma, ModelKind::Markov, ModelKind::Bayes,
	                    ModelKind::Knn, ModelKind::Mlp}) {
		if (to_string(k) == name) {
			return k;
		}
	}
	throw ConfigError("unknown model '" + name + "' (expected naive|ar|arma|markov|bayes|knn|mlp)");
}

namespace {

std::span<const double> lags_before(const DailySeries& series, std::size_t t, std::size_t n_lags) {
	if (t < n_lags || t > series.size()) {
		throw DataError("fewer than " + std::to_string(n_lags) + " values before position " + std::to_string(t));
	}
	const auto lags = series.values().subspan(t - n_lags, n_lags);
	for (std::size_t j = 0; j < n_lags; ++j) {
		if (std::isnan(lags[j])) {
			throw DataError("missing value on " + series.day_at(t - n_lags + j).iso() + " needed for " +
			                series.day_at(t).iso());
		}
	}
	return lags;
}

void check_range(const DailySeries& series, std::size_t first, std::size_t count) {
	if (first + count > series.size()) {
		throw DataError("forecast range runs past the end of the series");
	}
}

void require_complete(const DailySeries& s, const std::string& who) {
	if (s.missing_count() > 0) {
		throw DataError(who + ": training series has " + std::to_string(s.missing_count()) +
		                " missing values (clean it first)");
	}
}

void save_discretizer(ModelFile& f, const baselines::Discretizer& d) {
	ModelFile::Block edges{"edges", {"index", "edge"}, {}};
	for (std::size_t i = 0; i < d.edges.size(); ++i) {
		edges.rows.push_back({static_cast<double>(i), d.edges[i]});
	}
	ModelFile::Block centers{"centers", {"class", "center"}, {}};
	for (std::size_t i = 0; i < d.centers.size(); ++i) {
		centers.rows.push_back({static_cast<double>(i), d.centers[i]});
	}
	f.add_block(std::move(edges));
	f.add_block(std::move(centers));
}

baselines::Discretizer load_discretizer(const ModelFile& f) {
	baselines::Discretizer d;
	for (const auto& row : f.block("edges").rows) {
		d.edges.push_back(row[1]);
	}
	for (const auto& row : f.block("centers").rows) {
		d.centers.push_back(row[1]);
	}
	if (d.edges.size() != d.centers.size() + 1 || d.centers.empty()) {
		throw DataError("model file: discretizer edges/centers are inconsistent");
	}
	return d;
}

// ---------------------------------------------------------------------------

class NaiveForecaster final : public Forecaster {
public:
	ModelKind kind() const override { return ModelKind::Naive; }
	void fit(const DailySeries& train) override { model_ = baselines::fit_naive(train); }
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		std::vector<double> out(count);
		for (std::size_t i = 0; i < count; ++i) {
			out[i] = model_.predict(series.day_at(first + i));
		}
		return out;
	}
	void save(ModelFile& f) const override {
		ModelFile::Block b{"slot_means", {"slot", "mean", "count"}, {}};
		for (std::size_t s = 0; s < 365; ++s) {
			b.rows.push_back({static_cast<double>(s + 1), model_.slot_mean[s],
			                  static_cast<double>(model_.slot_count[s])});
		}
		f.add_block(std::move(b));
	}
	void load(const ModelFile& f) override {
		const auto& b = f.block("slot_means");
		if (b.rows.size() != 365) {
			throw DataError("model file: slot_means must have 365 rows");
		}
		for (std::size_t s = 0; s < 365; ++s) {
			model_.slot_mean[s] = b.rows[s][1];
			model_.slot_count[s] = static_cast<int>(b.rows[s][2]);
		}
	}

private:
	baselines::NaiveModel model_;
};

class LinearForecaster final : public Forecaster {
public:
	LinearForecaster(ModelKind kind, std::size_t p, std::size_t q) : kind_(kind), p_(p), q_(q) {}

	ModelKind kind() const override { return kind_; }
	void fit(const DailySeries& train) override {
		require_complete(train, to_string(kind_));
		model_ = kind_ == ModelKind::Ar ? baselines::fit_ar(train.values(), p_)
		                                : baselines::fit_arma(train.values(), p_, q_);
	}
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		if (first < model_.p()) {
			throw DataError("linear model needs " + std::to_string(model_.p()) + " values before the first forecast");
		}
		const auto history = series.values().subspan(0, first + count);
		for (std::size_t t = 0; t + 1 < history.size(); ++t) {
			if (std::isnan(history[t])) {
				throw DataError("missing value on " + series.day_at(t).iso() + " in forecast history");
			}
		}
		const auto all = baselines::one_step_linear(model_, history);
		return {all.begin() + static_cast<std::ptrdiff_t>(first), all.end()};
	}
	void save(ModelFile& f) const override {
		f.set("intercept", model_.intercept);
		ModelFile::Block ar{"ar", {"lag", "coef"}, {}};
		for (std::size_t i = 0; i < model_.ar.size(); ++i) {
			ar.rows.push_back({static_cast<double>(i + 1), model_.ar[i]});
		}
		ModelFile::Block ma{"ma", {"lag", "coef"}, {}};
		for (std::size_t j = 0; j < model_.ma.size(); ++j) {
			ma.rows.push_back({static_cast<double>(j + 1), model_.ma[j]});
		}
		f.add_block(std::move(ar));
		f.add_block(std::move(ma));
	}
	void load(const ModelFile& f) override {
		model_ = {};
		model_.intercept = f.get_double("intercept");
		for (const auto& row : f.block("ar").rows) {
			model_.ar.push_back(row[1]);
		}
		for (const auto& row : f.block("ma").rows) {
			model_.ma.push_back(row[1]);
		}
	}

private:
	ModelKind kind_;
	std::size_t p_;
	std::size_t q_;
	baselines::LinearModel model_;
};

class MarkovForecaster final : public Forecaster {
public:
	explicit MarkovForecaster(const ModelParams& p) : params_(p) {}

	ModelKind kind() const override { return ModelKind::Markov; }
	void fit(const DailySeries& train) override {
		require_complete(train, "markov");
		const auto d = baselines::fit_discretizer(train.values(), params_.n_classes);
		model_ = baselines::fit_markov(train.values(), d, params_.chain_order, params_.smoothing);
	}
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		std::vector<double> out(count);
		for (std::size_t i = 0; i < count; ++i) {
			out[i] = baselines::predict_markov(model_, lags_before(series, first + i, model_.order));
		}
		return out;
	}
	void save(ModelFile& f) const override {
		f.set("order", static_cast<long long>(model_.order));
		f.set("smoothing", model_.smoothing);
		save_discretizer(f, model_.discretizer);
		// sparse: one row per nonzero (context length, context key, next class)
		ModelFile::Block b{"counts", {"context_len", "context_key", "next_class", "count"}, {}};
		for (std::size_t k = 0; k < model_.counts.size(); ++k) {
			std::vector<std::uint64_t> keys;
			for (const auto& [key, row] : model_.counts[k]) {
				keys.push_back(key);
			}
			std::sort(keys.begin(), keys.end());
			for (auto key : keys) {
				const auto& row = model_.counts[k].at(key);
				for (std::size_t c = 0; c < row.size(); ++c) {
					if (row[c] != 0.0) {
						b.rows.push_back({static_cast<double>(k), static_cast<double>(key), static_cast<double>(c), row[c]});
					}
				}
			}
		}
		f.add_block(std::move(b));
	}
	void load(const ModelFile& f) override {
		model_ = {};
		model_.order = static_cast<std::size_t>(f.get_int("order"));
		model_.smoothing = f.get_double("smoothing");
		model_.discretizer = load_discretizer(f);
		model_.counts.resize(model_.order + 1);
		const std::size_t n = model_.discretizer.n_classes();
		for (const auto& row : f.block("counts").rows) {
			const auto k = static_cast<std::size_t>(row[0]);
			const auto key = static_cast<std::uint64_t>(row[1]);
			const auto c = static_cast<std::size_t>(row[2]);
			if (k > model_.order || c >= n) {
				throw DataError("model file: markov count row out of range");
			}
			auto& counts = model_.counts[k][key];
			if (counts.empty()) {
				counts.assign(n, 0.0);
			}
			counts[c] = row[3];
		}
		if (model_.counts[0].empty()) {
			throw DataError("model file: markov marginal counts missing");
		}
	}

private:
	ModelParams params_;
	baselines::MarkovModel model_;
};

class BayesForecaster final : public Forecaster {
public:
	explicit BayesForecaster(const ModelParams& p) : params_(p) {}

	ModelKind kind() const override { return ModelKind::Bayes; }
	void fit(const DailySeries& train) override {
		require_complete(train, "bayes");
		const auto d = baselines::fit_discretizer(train.values(), params_.n_classes);
		model_ = baselines::fit_bayes(train.values(), d, params_.chain_order, params_.smoothing);
	}
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		std::vector<double> out(count);
		for (std::size_t i = 0; i < count; ++i) {
			out[i] = baselines::predict_bayes(model_, lags_before(series, first + i, model_.order));
		}
		return out;
	}
	void save(ModelFile& f) const override {
		f.set("order", static_cast<long long>(model_.order));
		f.set("smoothing", model_.smoothing);
		save_discretizer(f, model_.discretizer);
		ModelFile::Block classes{"class_counts", {"class", "count"}, {}};
		for (std::size_t c = 0; c < model_.class_counts.size(); ++c) {
			classes.rows.push_back({static_cast<double>(c), model_.class_counts[c]});
		}
		const std::size_t n = model_.discretizer.n_classes();
		ModelFile::Block lags{"lag_counts", {"lag", "next_class", "lag_class", "count"}, {}};
		for (std::size_t j = 0; j < model_.lag_counts.size(); ++j) {
			for (std::size_t idx = 0; idx < model_.lag_counts[j].size(); ++idx) {
				if (model_.lag_counts[j][idx] != 0.0) {
					lags.rows.push_back({static_cast<double>(j + 1), static_cast<double>(idx / n),
					                     static_cast<double>(idx % n), model_.lag_counts[j][idx]});
				}
			}
		}
		f.add_block(std::move(classes));
		f.add_block(std::move(lags));
	}
	void load(const ModelFile& f) override {
		model_ = {};
		model_.order = static_cast<std::size_t>(f.get_int("order"));
		model_.smoothing = f.get_double("smoothing");
		model_.discretizer = load_discretizer(f);
		const std::size_t n = model_.discretizer.n_classes();
		model_.class_counts.assign(n, 0.0);
		for (const auto& row : f.block("class_counts").rows) {
			model_.class_counts.at(static_cast<std::size_t>(row[0])) = row[1];
		}
		model_.lag_counts.assign(model_.order, std::vector<double>(n * n, 0.0));
		for (const auto& row : f.block("lag_counts").rows) {
			const auto j = static_cast<std::size_t>(row[0]);
			if (j < 1 || j > model_.order) {
				throw DataError("model file: bayes lag out of range");
			}
			model_.lag_counts[j - 1].at(static_cast<std::size_t>(row[1]) * n + static_cast<std::size_t>(row[2])) = row[3];
		}
	}

private:
	ModelParams params_;
	baselines::BayesModel model_;
};

class KnnForecaster final : public Forecaster {
public:
	explicit KnnForecaster(baselines::KnnConfig cfg) : cfg_(cfg) { cfg_.validate(); }

	ModelKind kind() const override { return ModelKind::Knn; }
	void fit(const DailySeries& train) override { require_complete(train, "knn"); }
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		std::vector<double> out(count);
		for (std::size_t i = 0; i < count; ++i) {
			const std::size_t t = first + i;
			lags_before(series, t, t); // whole history must be present
			out[i] = baselines::knn_one_step(series.values(), t, cfg_);
		}
		return out;
	}
	void save(ModelFile& f) const override {
		f.set("k", static_cast<long long>(cfg_.k));
		f.set("window", static_cast<long long>(cfg_.window));
	}
	void load(const ModelFile& f) override {
		cfg_.k = static_cast<std::size_t>(f.get_int("k"));
		cfg_.window = static_cast<std::size_t>(f.get_int("window"));
		cfg_.validate();
	}

private:
	baselines::KnnConfig cfg_;
};

} // namespace

class MlpForecaster final : public Forecaster {
public:
	explicit MlpForecaster(const ModelParams& p) : params_(p), net_(p.layout) {}

	ModelKind kind() const override { return ModelKind::Mlp; }
	void fit(const DailySeries& train) override {
		const auto windows = mlp::make_windows(train, params_.layout.n_inputs());
		scaler_ = mlp::fit_scaler(windows);
		auto result = mlp::train_lm(mlp::Mlp::random(params_.layout, params_.seed), mlp::scale(scaler_, windows),
		                            params_.lm);
		net_ = std::move(result.mlp);
		history_ = std::move(result.history);
	}
	std::vector<double> predict_range(const DailySeries& series, std::size_t first,
	                                  std::size_t count) const override {
		check_range(series, first, count);
		const std::size_t p = net_.layout().n_inputs();
		std::vector<double> out(count);
		std::vector<double> x(p);
		for (std::size_t i = 0; i < count; ++i) {
			const auto lags = lags_before(series, first + i, p);
			for (std::size_t j = 0; j < p; ++j) {
				x[j] = scaler_.scale(lags[j], j);
			}
			out[i] = scaler_.unscale(net_.forward(x), scaler_.target_channel());
		}
		return out;
	}
	void save(ModelFile& f) const override {
		std::ostringstream sizes;
		for (std::size_t i = 0; i < net_.layout().sizes.size(); ++i) {
			sizes << (i ? "," : "") << net_.layout().sizes[i];
		}
		f.set("layout", sizes.str());
		f.set("hidden_activation", std::string("gaussian"));
		f.set("output_activation", std::string("linear"));
		f.set("seed", static_cast<long long>(params_.seed));
		if (history_) {
			f.set("stop_reason", mlp::to_string(history_->stop_reason));
			f.set("best_epoch", static_cast<long long>(history_->best_epoch));
			f.set("epochs_run", static_cast<long long>(history_->epochs.size()));
		}
		ModelFile::Block sc{"scaler", {"channel", "min", "max"}, {}};
		for (std::size_t c = 0; c < scaler_.min.size(); ++c) {
			sc.rows.push_back({static_cast<double>(c), scaler_.min[c], scaler_.max[c]});
		}
		f.add_block(std::move(sc));
		// one block per weight layer: row-major weights, then the bias column
		for (std::size_t l = 0; l < net_.layout().n_layers(); ++l) {
			const auto w = net_.weights(l);
			const auto b = net_.bias(l);
			ModelFile::Block blk{"layer." + std::to_string(l), {}, {}};
			for (Eigen::Index c = 0; c < w.cols(); ++c) {
				blk.header.push_back("w" + std::to_string(c));
			}
			blk.header.emplace_back("bias");
			for (Eigen::Index r = 0; r < w.rows(); ++r) {
				std::vector<double> row(w.row(r).data(), w.row(r).data() + w.cols());
				row.push_back(b(r));
				blk.rows.push_back(std::move(row));
			}
			f.add_block(std::move(blk));
		}
	}
	void load(const ModelFile& f) override {
		mlp::MlpLayout layout;
		layout.sizes.clear();
		std::istringstream in(f.get("layout"));
		std::string tok;
		while (std::getline(in, tok, ',')) {
			layout.sizes.push_back(static_cast<std::size_t>(std::stoul(tok)));
		}
		layout.validate();
		mlp::Mlp net(layout);
		for (std::size_t l = 0; l < layout.n_layers(); ++l) {
			const auto& blk = f.block("layer." + std::to_string(l));
			auto w = net.weights(l);
			auto b = net.bias(l);
			if (blk.rows.size() != static_cast<std::size_t>(w.rows()) ||
			    blk.header.size() != static_cast<std::size_t>(w.cols()) + 1) {
				throw DataError("model file: layer " + std::to_string(l) + " does not match layout");
			}
			for (Eigen::Index r = 0; r < w.rows(); ++r) {
				for (Eigen::Index c = 0; c < w.cols(); ++c) {
					w(r, c) = blk.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
				}
				b(r) = blk.rows[static_cast<std::size_t>(r)].back();
			}
		}
		net_ = mlp::Mlp(layout, net.params());
		scaler_ = {};
		for (const auto& row : f.block("scaler").rows) {
			scaler_.min.push_back(row[1]);
			scaler_.max.push_back(row[2]);
		}
		if (scaler_.min.size() != layout.n_inputs() + 1) {
			throw DataError("model file: scaler does not match layout");
		}
		params_.layout = layout;
		params_.seed = static_cast<std::uint64_t>(f.get_int("seed"));
		history_.reset();
	}

	const mlp::Mlp& net() const noexcept { return net_; }
	const mlp::Scaler& scaler() const noexcept { return scaler_; }
	const std::optional<mlp::TrainHistory>& history() const noexcept { return history_; }

private:
	ModelParams params_;
	mlp::Mlp net_;
	mlp::Scaler scaler_;
	std::optional<mlp::TrainHistory> history_;
};

std::unique_ptr<Forecaster> make_forecaster(ModelKind kind, const ModelParams& params) {
	switch (kind) {
	case ModelKind::Naive:
		return std::make_unique<NaiveForecaster>();
	case ModelKind::Ar:
		return std::make_unique<LinearForecaster>(kind, params.ar_order, 0);
	case ModelKind::Arma:
		return std::make_unique<LinearForecaster>(kind, params.arma_p, params.arma_q);
	case ModelKind::Markov:
		return std::make_unique<MarkovForecaster>(params);
	case ModelKind::Bayes:
		return std::make_unique<BayesForecaster>(params);
	case ModelKind::Knn:
		return std::make_unique<KnnForecaster>(params.knn);
	case ModelKind::Mlp:
		return std::make_unique<MlpForecaster>(params);
	}
	throw ConfigError("unknown model kind");
}

std::unique_ptr<Forecaster> load_forecaster(const ModelFile& file) {
	auto f = make_forecaster(parse_model_kind(file.get("model")), ModelParams{});
	f->load(file);
	return f;
}

const mlp::TrainHistory* training_history(const Forecaster& f) {
	if (const auto* m = dynamic_cast<const MlpForecaster*>(&f); m && m->history()) {
		return &*m->history();
	}
	return nullptr;
}

} // namespace solarcast
