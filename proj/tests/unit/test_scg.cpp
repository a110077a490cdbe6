#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "aec/autoencoder.hpp"
#include "aec/error.hpp"
#include "aec/scg.hpp"
#include "doctest.h"

using namespace aec;

namespace {

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) return false;
  }
  return true;
}

Objective quadratic(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Objective o;
  o.value = [A, b](const Eigen::VectorXd& w) { return 0.5 * w.dot(A * w) - b.dot(w); };
  o.value_and_gradient = [A, b](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    g = A * w - b;
    return 0.5 * w.dot(A * w) - b.dot(w);
  };
  return o;
}

// Rows 0.5 + 0.4 sin(2 pi i / 12 + phase_n): a smooth low-rank data set.
Eigen::MatrixXd sinusoid_rows(std::size_t n, std::size_t dx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dx));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double ph = phase(rng);
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      X(r, i) = 0.5 + 0.4 * std::sin(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(dx) + ph);
    }
  }
  return X;
}

AEConfig small_ae(std::uint64_t seed) {
  AEConfig c;
  c.input_dim = 12;
  c.hidden_dim = 4;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("distance-squared surrogate converges to its minimizer") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index P = 5 + trial * 3;
    Eigen::VectorXd target(P), w0(P);
    for (Eigen::Index i = 0; i < P; ++i) {
      target(i) = 3.0 * g(rng);
      w0(i) = 3.0 * g(rng);
    }
    Objective o;
    o.value = [target](const Eigen::VectorXd& w) { return (w - target).squaredNorm(); };
    o.value_and_gradient = [target](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
      grad = 2.0 * (w - target);
      return (w - target).squaredNorm();
    };
    TrainConfig cfg;
    cfg.max_epochs = static_cast<std::size_t>(P);
    cfg.grad_tol = 1e-13;
    cfg.cost_tol = 0.0;
    const ScgResult r = scg_minimize(o, w0, cfg);
    CHECK((r.w - target).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(r.report.epochs_run <= static_cast<std::size_t>(P));
    CHECK(non_increasing(r.report.cost_history));
  }
}

TEST_CASE("SPD quadratic matches a direct solve") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index P = 4 + trial * 2;
    Eigen::MatrixXd M(P, P);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
    const Eigen::MatrixXd A = M * M.transpose() + Eigen::MatrixXd::Identity(P, P);
    Eigen::VectorXd b(P);
    for (Eigen::Index i = 0; i < P; ++i) b(i) = g(rng);
    const Eigen::VectorXd direct = A.ldlt().solve(b);

    // Here f* is O(1), and once |f - f*| drops to rounding level the step
    // comparison is noise. With lambda_min(A) >= 1, |w - w*| <= |grad|, so a
    // 1e-7 gradient target is the tightest one reachable for every draw.
    TrainConfig cfg;
    cfg.max_epochs = static_cast<std::size_t>(20 * P);
    cfg.grad_tol = 1e-7;
    cfg.cost_tol = 0.0;
    const ScgResult r = scg_minimize(quadratic(A, b), Eigen::VectorXd::Zero(P), cfg);
    CHECK((r.w - direct).lpNorm<Eigen::Infinity>() <= 1e-7);
    CHECK(r.report.stop_reason == StopReason::grad_tol);
    CHECK(r.report.epochs_run <= static_cast<std::size_t>(3 * P));
    CHECK(non_increasing(r.report.cost_history));
  }
}

TEST_CASE("autoencoder training reduces reconstruction error") {
  // Satlin units that start inactive on every sample never recover, so an
  // occasional seed stalls early. Require the fixed instance and 4 of 5 seeds.
  std::size_t below = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AEConfig ae = small_ae(seed);
    const Eigen::MatrixXd X = sinusoid_rows(32, 12, 17 + seed);
    const AEParams p0 = init_params(ae);
    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.grad_tol = 0.0;
    cfg.cost_tol = 0.0;
    std::size_t calls = 0;
    const auto [p, report] = train(p0, X, ae, cfg, [&](std::size_t, double, double) { ++calls; });
    const double ratio = cost(p, X, ae).mse / cost(p0, X, ae).mse;
    MESSAGE("seed " << seed << ": final/initial mse " << ratio);
    if (seed == 0) CHECK(ratio < 0.2);
    if (ratio < 0.2) ++below;
    CHECK(non_increasing(report.cost_history));
    CHECK(report.final_cost() == cost(p, X, ae).total);
    CHECK(calls == report.epochs_run);
    if (report.stop_reason != StopReason::numerical_failure) CHECK(report.epochs_run == 200);
  }
  CHECK(below >= 4);
}

TEST_CASE("epoch bounds") {
  const AEConfig ae = small_ae(1);
  const Eigen::MatrixXd X = sinusoid_rows(8, 12, 1);
  TrainConfig zero;
  zero.max_epochs = 0;
  CHECK_THROWS_AS(train(init_params(ae), X, ae, zero), ConfigError);

  TrainConfig one;
  one.max_epochs = 1;
  const auto [p, report] = train(init_params(ae), X, ae, one);
  CHECK(report.epochs_run == 1);
  CHECK(report.cost_history.size() <= 1);
}

TEST_CASE("zero tolerances run exactly max_epochs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AEConfig ae = small_ae(seed);
    const Eigen::MatrixXd X = sinusoid_rows(16, 12, seed + 40);
    TrainConfig cfg;
    cfg.max_epochs = 37;
    cfg.grad_tol = 0.0;
    cfg.cost_tol = 0.0;
    const auto [p, report] = train(init_params(ae), X, ae, cfg);
    if (report.stop_reason == StopReason::numerical_failure) {
      CHECK(report.epochs_run <= 37);
    } else {
      CHECK(report.stop_reason == StopReason::max_epochs);
      CHECK(report.epochs_run == 37);
    }
    CHECK(non_increasing(report.cost_history));
  }
}

TEST_CASE("training is deterministic") {
  const AEConfig ae = small_ae(9);
  const Eigen::MatrixXd X = sinusoid_rows(32, 12, 9);
  TrainConfig cfg;
  cfg.max_epochs = 60;
  const auto [a, ra] = train(init_params(ae), X, ae, cfg);
  const auto [b, rb] = train(init_params(ae), X, ae, cfg);
  CHECK(flatten(a) == flatten(b));
  CHECK(ra.cost_history == rb.cost_history);
  CHECK(ra.epochs_run == rb.epochs_run);
}

TEST_CASE("non-finite objective stops with the last accepted point") {
  // Finite inside the unit ball, NaN outside; the minimizer sits outside.
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(4, 2.0);
  Objective o;
  auto f = [target](const Eigen::VectorXd& w) {
    return w.norm() > 1.5 ? std::nan("") : (w - target).squaredNorm();
  };
  o.value = f;
  o.value_and_gradient = [f, target](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    g = 2.0 * (w - target);
    return f(w);
  };
  TrainConfig cfg;
  cfg.max_epochs = 50;
  const ScgResult r = scg_minimize(o, Eigen::VectorXd::Zero(4), cfg);
  CHECK(r.report.stop_reason == StopReason::numerical_failure);
  CHECK_FALSE(r.report.failure_message.empty());
  CHECK(r.w.allFinite());
  CHECK(r.w.norm() <= 1.5);
  CHECK(non_increasing(r.report.cost_history));
}

TEST_CASE("report and config serialize") {
  TrainConfig cfg;
  cfg.max_epochs = 12;
  cfg.sigma_scg = 1e-4;
  const TrainConfig back = train_config_from_json(to_json(cfg));
  CHECK(back.max_epochs == 12);
  CHECK(back.sigma_scg == 1e-4);

  TrainReport r;
  r.epochs_run = 3;
  r.initial_cost = 2.0;
  r.cost_history = {1.5, 1.0};
  r.stop_reason = StopReason::cost_tol;
  const nlohmann::json j = to_json(r);
  CHECK(j.at("stop_reason") == "cost_tol");
  CHECK(j.at("final_cost") == 1.0);
  CHECK(j.at("cost_history").size() == 2);
}
