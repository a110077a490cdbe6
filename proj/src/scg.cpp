#include "aec/scg.hpp"

#include <cmath>

#include "aec/error.hpp"

namespace aec {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(grad_tol >= 0.0) || !(cost_tol >= 0.0)) throw ConfigError("tolerances must be nonnegative");
  if (!(sigma_scg > 0.0)) throw ConfigError("sigma_scg must be positive");
  if (!(lambda_init > 0.0)) throw ConfigError("lambda_init must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::cost_tol: return "cost_tol";
    case StopReason::numerical_failure: return "numerical_failure";
  }
  return "max_epochs";
}

nlohmann::json to_json(const TrainReport& r) {
  return {{"epochs_run", r.epochs_run},
          {"accepted_steps", r.accepted_steps},
          {"initial_cost", r.initial_cost},
          {"final_cost", r.final_cost()},
          {"final_grad_norm", r.final_grad_norm},
          {"stop_reason", to_string(r.stop_reason)},
          {"failure_message", r.failure_message},
          {"cost_history", r.cost_history}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"max_epochs", c.max_epochs}, {"grad_tol", c.grad_tol},
          {"cost_tol", c.cost_tol},     {"sigma_scg", c.sigma_scg},
          {"lambda_init", c.lambda_init}, {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  c.cost_tol = j.value("cost_tol", c.cost_tol);
  c.sigma_scg = j.value("sigma_scg", c.sigma_scg);
  c.lambda_init = j.value("lambda_init", c.lambda_init);
  c.seed = j.value("seed", c.seed);
  return c;
}

ScgResult scg_minimize(const Objective& objective, Eigen::VectorXd w0, const TrainConfig& config,
                       const ProgressFn& progress) {
  config.validate();
  ScgResult out;
  out.w = std::move(w0);
  TrainReport& report = out.report;
  const auto restart_period = static_cast<std::size_t>(std::max<Eigen::Index>(out.w.size(), 1));

  auto fail = [&](const std::string& why) {
    report.stop_reason = StopReason::numerical_failure;
    report.failure_message = why;
    return out;
  };

  Eigen::VectorXd grad(out.w.size());
  double cost = 0.0;
  try {
    cost = objective.value_and_gradient(out.w, grad);
  } catch (const NumericalError& e) {
    return fail(e.what());
  }
  if (!std::isfinite(cost) || !grad.allFinite()) return fail("initial cost or gradient non-finite");
  report.initial_cost = cost;

  Eigen::VectorXd r = -grad;  // residual = negative gradient
  Eigen::VectorXd p = r;
  Eigen::VectorXd s(out.w.size());
  Eigen::VectorXd trial(out.w.size());
  double lambda = config.lambda_init;
  double lambda_bar = 0.0;
  double delta = 0.0;
  bool success = true;
  report.final_grad_norm = r.norm();
  if (report.final_grad_norm < config.grad_tol || report.final_grad_norm == 0.0) {
    report.stop_reason = StopReason::grad_tol;
    return out;
  }

  report.stop_reason = StopReason::max_epochs;
  while (report.epochs_run < config.max_epochs) {
    ++report.epochs_run;
    const std::size_t k = report.epochs_run;
    const double p2 = p.squaredNorm();
    if (p2 == 0.0) {
      report.stop_reason = StopReason::grad_tol;
      break;
    }

    try {
      if (success) {
        // Curvature along p from a finite gradient difference.
        const double sigma_k = config.sigma_scg / std::sqrt(p2);
        trial = out.w + sigma_k * p;
        Eigen::VectorXd grad_shift(out.w.size());
        objective.value_and_gradient(trial, grad_shift);
        s = (grad_shift + r) / sigma_k;
        delta = p.dot(s);
      }
      delta += (lambda - lambda_bar) * p2;
      if (delta <= 0.0) {
        // Make the local Hessian estimate positive definite.
        lambda_bar = 2.0 * (lambda - delta / p2);
        delta = -delta + lambda * p2;
        lambda = lambda_bar;
      }

      const double mu = p.dot(r);
      if (!(mu > 0.0)) {
        // Not a descent direction; fall back to steepest descent.
        p = r;
        success = true;
        lambda_bar = 0.0;
        if (progress) progress(k, cost, r.norm());
        continue;
      }
      const double alpha = mu / delta;
      trial = out.w + alpha * p;
      const double trial_cost = objective.value(trial);
      if (!std::isfinite(trial_cost)) return fail("trial cost non-finite");
      const double comparison = 2.0 * delta * (cost - trial_cost) / (mu * mu);

      if (comparison >= 0.0) {
        Eigen::VectorXd grad_new(out.w.size());
        objective.value_and_gradient(trial, grad_new);
        if (!grad_new.allFinite()) return fail("gradient non-finite");
        const double improvement = cost - trial_cost;
        out.w.swap(trial);
        cost = trial_cost;
        report.cost_history.push_back(cost);
        ++report.accepted_steps;
        const Eigen::VectorXd r_new = -grad_new;
        lambda_bar = 0.0;
        success = true;
        if (k % restart_period == 0) {
          p = r_new;
        } else {
          const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
          p = r_new + beta * p;
        }
        r = r_new;
        if (comparison >= 0.75) lambda *= 0.25;
        report.final_grad_norm = r.norm();
        if (progress) progress(k, cost, report.final_grad_norm);
        if (report.final_grad_norm < config.grad_tol || report.final_grad_norm == 0.0) {
          report.stop_reason = StopReason::grad_tol;
          break;
        }
        if (improvement < config.cost_tol) {
          report.stop_reason = StopReason::cost_tol;
          break;
        }
      } else {
        lambda_bar = lambda;
        success = false;
        if (progress) progress(k, cost, report.final_grad_norm);
      }
      if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p2;
      if (!std::isfinite(lambda)) return fail("scale parameter overflowed");
    } catch (const NumericalError& e) {
      return fail(e.what());
    }
  }
  return out;
}

}  // namespace aec
