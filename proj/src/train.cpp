#include <cmath>
#include <random>

#include "aec/error.hpp"
#include "aec/scg.hpp"

namespace aec {

AEParams init_params(const AEConfig& config) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(config.hidden_dim);
  const auto dx = static_cast<Eigen::Index>(config.input_dim);
  const double r = std::sqrt(6.0 / static_cast<double>(config.hidden_dim + config.input_dim));
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(-r, r);
  AEParams p;
  p.W.resize(d, dx);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < dx; ++j) p.W(i, j) = uniform(rng);
  p.b1 = Eigen::VectorXd::Zero(d);
  p.b2 = Eigen::VectorXd::Zero(dx);
  return p;
}

std::pair<AEParams, TrainReport> train(const AEParams& params0, const Eigen::MatrixXd& X,
                                       const AEConfig& ae_config, const TrainConfig& train_config,
                                       const ProgressFn& progress) {
  ae_config.validate();
  train_config.validate();
  params0.check_against(ae_config);
  if (static_cast<std::size_t>(X.cols()) != ae_config.input_dim || X.rows() < 1) {
    throw DimensionError("training batch shape does not match the autoencoder");
  }
  const std::size_t d = ae_config.hidden_dim;
  const std::size_t dx = ae_config.input_dim;

  Objective objective;
  objective.value = [&](const Eigen::VectorXd& w) {
    return cost(unflatten(w, d, dx), X, ae_config).total;
  };
  objective.value_and_gradient = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    AEGradient grad;
    const double c = cost_and_gradient(unflatten(w, d, dx), X, ae_config, grad).total;
    g = flatten(grad);
    return c;
  };

  ScgResult result = scg_minimize(objective, flatten(params0), train_config, progress);
  return {unflatten(result.w, d, dx), std::move(result.report)};
}

}  // namespace aec
