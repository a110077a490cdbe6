#pragma once

// Full-batch scaled conjugate gradient (Moller, 1993) and the autoencoder
// training entry points built on it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "aec/autoencoder.hpp"
#include "json.hpp"

namespace aec {

struct TrainConfig {
  std::size_t max_epochs = 400;
  double grad_tol = 1e-6;
  double cost_tol = 1e-9;
  double sigma_scg = 5e-5;
  double lambda_init = 5e-7;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class StopReason { max_epochs, grad_tol, cost_tol, numerical_failure };

std::string to_string(StopReason reason);

struct TrainReport {
  std::size_t epochs_run = 0;
  std::size_t accepted_steps = 0;
  double initial_cost = 0.0;
  std::vector<double> cost_history;  // cost after each accepted step
  double final_grad_norm = 0.0;
  StopReason stop_reason = StopReason::max_epochs;
  std::string failure_message;

  double final_cost() const { return cost_history.empty() ? initial_cost : cost_history.back(); }
};

nlohmann::json to_json(const TrainReport& report);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// A differentiable objective over a flat parameter vector. Either callable
/// may throw NumericalError; the optimizer then stops with numerical_failure.
struct Objective {
  std::function<double(const Eigen::VectorXd& w)> value;
  std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd& grad)> value_and_gradient;
};

/// Called once per epoch with (epoch, current cost, gradient norm).
using ProgressFn = std::function<void(std::size_t, double, double)>;

struct ScgResult {
  Eigen::VectorXd w;
  TrainReport report;
};

/// One epoch is one SCG iteration, accepted or rejected. The returned point
/// is the last accepted one, which is also the lowest-cost point visited
/// since accepted steps never increase the cost.
ScgResult scg_minimize(const Objective& objective, Eigen::VectorXd w0, const TrainConfig& config,
                       const ProgressFn& progress = {});

/// W uniform on [-r, r] with r = sqrt(6 / (D + Dx)); zero biases.
AEParams init_params(const AEConfig& config);

std::pair<AEParams, TrainReport> train(const AEParams& params0, const Eigen::MatrixXd& X,
                                       const AEConfig& ae_config, const TrainConfig& train_config,
                                       const ProgressFn& progress = {});

}  // namespace aec
