#include <catch_amalgamated.hpp>

#include "solarcast/error.hpp"
#include "solarcast/mlp.hpp"

#include <numbers>
#include <random>

using namespace solarcast;
using namespace solarcast::mlp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// h_j = exp(-(w_j . x + b_j)^2), y = v . h + c, written out with scalars
double straight_line(const Eigen::VectorXd& theta, std::size_t in, std::size_t hidden,
                     std::span<const double> x) {
	std::size_t at = 0;
	std::vector<double> w(theta.data(), theta.data() + in * hidden);
	at += in * hidden;
	std::vector<double> b(theta.data() + at, theta.data() + at + hidden);
	at += hidden;
	std::vector<double> v(theta.data() + at, theta.data() + at + hidden);
	at += hidden;
	const double c = theta[static_cast<Eigen::Index>(at)];
	double y = c;
	for (std::size_t j = 0; j < hidden; ++j) {
		double a = b[j];
		for (std::size_t i = 0; i < in; ++i) {
			a += w[j * in + i] * x[i];
		}
		y += v[j] * std::exp(-a * a);
	}
	return y;
}

WindowDataset linear_data(std::size_t rows, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	WindowDataset d;
	d.inputs.resize(static_cast<Eigen::Index>(rows), 8);
	d.targets.resize(static_cast<Eigen::Index>(rows));
	DayIndex day(1971, 1);
	for (Eigen::Index r = 0; r < d.inputs.rows(); ++r) {
		for (Eigen::Index c = 0; c < 8; ++c) {
			d.inputs(r, c) = u(rng);
		}
		d.targets[r] = 0.3 * d.inputs(r, 7) + 0.1;
		d.target_days.push_back(day);
		day = day.next();
	}
	return d;
}

} // namespace

TEST_CASE("layout validation and parameter count") {
	CHECK(MlpLayout{}.n_params() == 8 * 3 + 3 + 3 + 1);
	CHECK_THROWS_AS((MlpLayout{{8, 1}}.validate()), ConfigError);
	CHECK_THROWS_AS((MlpLayout{{8, 0, 1}}.validate()), ConfigError);
	CHECK_THROWS_AS((MlpLayout{{8, 3, 2}}.validate()), ConfigError);
	CHECK((MlpLayout{{4, 5, 2, 1}}.n_params()) == 4 * 5 + 5 + 5 * 2 + 2 + 2 + 1);
	CHECK_THROWS_AS(Mlp(MlpLayout{}, Eigen::VectorXd::Zero(3)), DataError);
}

TEST_CASE("forward pass") {
	Mlp zero(MlpLayout{});
	zero.bias(1)[0] = 0.25;
	zero.weights(1) << 1.0, 2.0, -0.5;
	const std::vector<double> x(8, 0.3);
	CHECK(zero.forward(x) == 0.25 + 1.0 + 2.0 - 0.5);

	CHECK(gaussian(0.0) == 1.0);
	CHECK(gaussian(1.0) == std::exp(-1.0));
	CHECK_THAT(gaussian_derivative(0.5), WithinRel(-1.0 * std::exp(-0.25), 1e-15));

	for (std::uint64_t seed : {1u, 2u, 99u}) {
		const auto m = Mlp::random(MlpLayout{}, seed);
		for (Eigen::Index i = 0; i < m.params().size(); ++i) {
			CHECK(std::abs(m.params()[i]) <= 0.5);
		}
		std::mt19937_64 rng(seed + 100);
		std::uniform_real_distribution<double> u(-1.0, 2.0);
		for (int rep = 0; rep < 20; ++rep) {
			std::vector<double> in(8);
			for (auto& v : in) {
				v = u(rng);
			}
			CHECK_THAT(m.forward(in), WithinAbs(straight_line(m.params(), 8, 3, in), 1e-12));
		}
	}
	CHECK_THROWS_AS(zero.forward(std::vector<double>(7, 0.0)), DataError);
}

TEST_CASE("Jacobian matches central differences") {
	for (std::uint64_t seed : {3u, 4u, 5u}) {
		for (const auto& layout : {MlpLayout{}, MlpLayout{{4, 5, 2, 1}}}) {
			const auto m = Mlp::random(layout, seed);
			std::mt19937_64 rng(seed);
			std::uniform_real_distribution<double> u(0.0, 1.0);
			Eigen::MatrixXd x(10, static_cast<Eigen::Index>(layout.n_inputs()));
			for (Eigen::Index r = 0; r < x.rows(); ++r) {
				for (Eigen::Index c = 0; c < x.cols(); ++c) {
					x(r, c) = u(rng);
				}
			}
			const auto j = jacobian(m, x);
			REQUIRE(j.rows() == 10);
			REQUIRE(static_cast<std::size_t>(j.cols()) == layout.n_params());
			const double h = 1e-6;
			double worst = 0.0;
			for (Eigen::Index p = 0; p < j.cols(); ++p) {
				Mlp up = m;
				Mlp down = m;
				up.params()[p] += h;
				down.params()[p] -= h;
				const Eigen::VectorXd fd = (outputs(up, x) - outputs(down, x)) / (2 * h);
				worst = std::max(worst, (fd - j.col(p)).cwiseAbs().maxCoeff());
			}
			CHECK(worst < 1e-5);
		}
	}

	// zero network: the output bias column is 1
	Mlp zero(MlpLayout{});
	Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 8, 0.7);
	const auto j = jacobian(zero, x);
	for (Eigen::Index r = 0; r < 4; ++r) {
		CHECK(j(r, j.cols() - 1) == 1.0);
	}
	// duplicated rows
	const auto m = Mlp::random(MlpLayout{}, 8);
	Eigen::MatrixXd dup(2, 8);
	dup.row(0).setLinSpaced(0.0, 1.0);
	dup.row(1) = dup.row(0);
	const auto jd = jacobian(m, dup);
	CHECK(jd.row(0) == jd.row(1));
}

TEST_CASE("sliding windows") {
	std::vector<double> v(10);
	for (std::size_t i = 0; i < 10; ++i) {
		v[i] = static_cast<double>(i + 1);
	}
	const DailySeries s(DayIndex(1971, 1), v);
	const auto w = make_windows(s, 8);
	REQUIRE(w.rows() == 2);
	for (Eigen::Index c = 0; c < 8; ++c) {
		CHECK(w.inputs(0, c) == static_cast<double>(c + 1));
	}
	CHECK(w.targets[0] == 9.0);
	CHECK(w.targets[1] == 10.0);
	CHECK(w.target_days[0] == DayIndex(1971, 9));

	const auto p1 = make_windows(DailySeries(DayIndex(1971, 1), {1.0, 2.0, 3.0}), 1);
	REQUIRE(p1.rows() == 2);
	CHECK(p1.inputs(0, 0) == 1.0);
	CHECK(p1.targets[0] == 2.0);
	CHECK(p1.inputs(1, 0) == 2.0);
	CHECK(p1.targets[1] == 3.0);

	for (std::size_t n : {9u, 30u, 365u}) {
		CHECK(make_windows(DailySeries(DayIndex(1971, 1), std::vector<double>(n, 1.0)), 8).rows() == n - 8);
	}
	CHECK_THROWS_AS(make_windows(DailySeries(DayIndex(1971, 1), std::vector<double>(8, 1.0)), 8), DataError);

	// no row spans a missing value
	std::vector<double> g(30, 1.0);
	g[12] = DailySeries::kMissing;
	const auto gw = make_windows(DailySeries(DayIndex(1971, 1), g), 8);
	CHECK(gw.rows() == (12 - 8) + (30 - 13 - 8));
	for (Eigen::Index r = 0; r < gw.inputs.rows(); ++r) {
		CHECK(gw.inputs.row(r).allFinite());
		CHECK(std::isfinite(gw.targets[r]));
	}

	const auto sl = w.slice(1, 1);
	CHECK(sl.rows() == 1);
	CHECK(sl.targets[0] == 10.0);
}

TEST_CASE("min-max scaler") {
	Scaler s{{0.0}, {2.0}};
	CHECK(s.scale(1.0, 0) == 0.5);
	CHECK(s.scale(0.0, 0) == 0.0);
	CHECK(s.scale(2.0, 0) == 1.0);
	CHECK(s.scale(3.0, 0) == 1.5);
	CHECK(s.scale(-1.0, 0) == -0.5);

	SynthConfig cfg;
	cfg.n_years = 2;
	const auto w = make_windows(generate_synthetic(cfg), 8);
	const auto fitted = fit_scaler(w);
	REQUIRE(fitted.min.size() == 9);
	const auto scaled = scale(fitted, w);
	CHECK(scaled.inputs.minCoeff() == 0.0);
	CHECK(scaled.inputs.maxCoeff() == 1.0);
	CHECK(scaled.targets.minCoeff() == 0.0);
	CHECK(scaled.targets.maxCoeff() == 1.0);
	std::mt19937_64 rng(1);
	std::uniform_real_distribution<double> u(-5000.0, 15000.0);
	for (int i = 0; i < 200; ++i) {
		const double x = u(rng);
		const auto c = static_cast<std::size_t>(i % 9);
		CHECK_THAT(fitted.unscale(fitted.scale(x, c), c), WithinAbs(x, 1e-12 * std::max(1.0, std::abs(x))));
	}
	CHECK_THROWS_AS(fit_scaler(make_windows(DailySeries(DayIndex(1971, 1), std::vector<double>(20, 1.0)), 8)),
	                DataError);
}

TEST_CASE("Levenberg-Marquardt training") {
	const auto data = linear_data(500, 21);
	const auto init = Mlp::random(MlpLayout{}, 1);
	LmConfig cfg;
	const auto res = train_lm(init, data, cfg);
	CHECK(mse(res.mlp, data.slice(0, 400)) < 1e-6);

	// accepted steps never raise the training MSE; lambda stays in range
	double last = res.history.initial_train_mse;
	for (const auto& e : res.history.epochs) {
		CHECK(e.lambda >= cfg.lambda_min);
		CHECK(e.lambda <= cfg.lambda_max);
		if (e.accepted) {
			CHECK(e.train_mse <= last);
			last = e.train_mse;
		}
	}
	// the returned weights are the best validation epoch
	const auto& h = res.history;
	double best = h.initial_val_mse;
	for (const auto& e : h.epochs) {
		best = std::min(best, e.val_mse);
	}
	CHECK_THAT(mse(res.mlp, data.slice(400, 100)), WithinRel(best, 1e-9));
	if (h.best_epoch > 0) {
		CHECK(h.epochs[h.best_epoch - 1].val_mse == best);
	}
	if (h.stop_reason == StopReason::MaxFail) {
		REQUIRE(h.epochs.size() >= 5);
		for (std::size_t i = h.epochs.size() - 5; i < h.epochs.size(); ++i) {
			CHECK(h.epochs[i].val_mse >= best);
		}
	}

	// bitwise determinism
	const auto again = train_lm(init, data, cfg);
	CHECK(again.mlp.params() == res.mlp.params());
	CHECK(Mlp::random(MlpLayout{}, 1).params() == init.params());

	LmConfig none;
	none.max_epochs = 0;
	const auto idle = train_lm(init, data, none);
	CHECK(idle.history.epochs.empty());
	CHECK(idle.mlp.params() == init.params());

	// noisy validation rows force early stopping
	auto noisy = linear_data(500, 22);
	std::mt19937_64 rng(4);
	std::normal_distribution<double> z(0.0, 0.5);
	for (Eigen::Index r = 400; r < 500; ++r) {
		noisy.targets[r] += z(rng);
	}
	const auto es = train_lm(init, noisy, cfg);
	CHECK(es.history.stop_reason != StopReason::MaxEpochs);
	CHECK(es.history.epochs.size() < 1000);

	LmConfig bad;
	bad.max_fail = 0;
	CHECK_THROWS_AS(train_lm(init, data, bad), ConfigError);
	bad = LmConfig{};
	bad.lambda_up = 1.0;
	CHECK_THROWS_AS(train_lm(init, data, bad), ConfigError);

	auto broken = data;
	broken.targets[3] = std::numeric_limits<double>::infinity();
	CHECK_THROWS_AS(train_lm(init, broken, cfg), NumericalError);
	CHECK(to_string(StopReason::MaxFail) == "max_fail");
}

TEST_CASE("one-step predictions") {
	// noise-free synthetic data, factors taken from the generator's modulation
	SynthConfig cfg;
	cfg.noise_std = 0.0;
	cfg.n_years = 4;
	const auto x = generate_synthetic(cfg);
	const auto site = solar::SiteSpec::from_degrees(cfg.latitude_deg);
	preprocess::SeasonalFactors f;
	double mean_mod = 0.0;
	for (int s = 1; s <= 365; ++s) {
		mean_mod += 1.0 + cfg.modulation_amplitude * std::cos(2.0 * std::numbers::pi * (s - 172) / 365.0);
	}
	mean_mod /= 365.0;
	for (int s = 1; s <= 365; ++s) {
		f.final[static_cast<std::size_t>(s - 1)] =
		    (1.0 + cfg.modulation_amplitude * std::cos(2.0 * std::numbers::pi * (s - 172) / 365.0)) / mean_mod;
	}
	const preprocess::Preprocessor pre(site, f);
	// corrected values are all 0.6 * mean_mod; a zero network with that output bias is exact
	Mlp perfect(MlpLayout{});
	perfect.bias(1)[0] = 0.6 * mean_mod;
	Scaler unit{std::vector<double>(9, 0.0), std::vector<double>(9, 1.0)};

	const auto history = x.slice_years(1971, 1973);
	std::vector<DayIndex> days;
	for (std::size_t i = history.size(); i < x.size(); ++i) {
		days.push_back(x.day_at(i));
	}
	const auto pred = predict_series(perfect, unit, &pre, x, days);
	REQUIRE(pred.size() == days.size());
	CHECK(pred.start() == DayIndex(1974, 1));
	for (std::size_t i = 0; i < pred.size(); ++i) {
		CHECK_THAT(pred[i], WithinRel(x[history.size() + i], 1e-6));
	}

	// a network that reads only its newest lag: first test day sees the last
	// training value
	Mlp newest(MlpLayout{{8, 1, 1}});
	newest.weights(0)(0, 7) = 1.0;
	newest.weights(1)(0, 0) = 1.0;
	const auto first = predict_series(newest, unit, nullptr, history.with_values(std::vector<double>(history.size(), 0.0)),
	                                  std::vector<DayIndex>{DayIndex(1974, 1)});
	CHECK_THAT(first[0], WithinAbs(1.0, 1e-15));

	// no lookahead and floor at 0
	const auto m = Mlp::random(MlpLayout{}, 6);
	SynthConfig noisy;
	noisy.n_years = 4;
	noisy.seed = 6;
	const auto y = generate_synthetic(noisy);
	const auto fitted = preprocess::Preprocessor::fit(y.slice_years(1971, 1973), site);
	auto w = make_windows(fitted.apply(y.slice_years(1971, 1973)));
	const auto sc = fit_scaler(w);
	const auto base = predict_series(m, sc, &fitted, y, days);
	for (std::size_t i = 0; i < base.size(); ++i) {
		CHECK(base[i] >= 0.0);
	}
	auto perturbed = std::vector<double>(y.values().begin(), y.values().end());
	const std::size_t cut = history.size() + 100;
	for (std::size_t i = cut; i < perturbed.size(); ++i) {
		perturbed[i] *= 0.5;
	}
	const auto after = predict_series(m, sc, &fitted, y.with_values(perturbed), days);
	for (std::size_t i = 0; i <= 100; ++i) {
		CHECK(after[i] == base[i]);
	}
	CHECK(after[101] != base[101]);

	Mlp negative(MlpLayout{});
	negative.bias(1)[0] = -5.0;
	const auto floored = predict_series(negative, unit, &pre, x, days);
	for (std::size_t i = 0; i < floored.size(); ++i) {
		CHECK(floored[i] == 0.0);
	}

	CHECK_THROWS_AS(predict_series(perfect, unit, &pre, x, std::vector<DayIndex>{DayIndex(1971, 5)}), DataError);
	CHECK_THROWS_AS(predict_series(perfect, unit, &pre, x, std::vector<DayIndex>{}), DataError);
	CHECK_THROWS_AS(predict_series(perfect, unit, &pre, x,
	                               std::vector<DayIndex>{DayIndex(1974, 1), DayIndex(1974, 3)}),
	                DataError);
}
