#pragma once

// Sparse tied-weight autoencoder with saturating-linear units.
//
//   z     = satlin(W x + b1)        W: D x Dx, b1: D
//   x_hat = satlin(W^T z + b2)      b2: Dx
//
// Cost over a batch X (N x Dx, one sample per row):
//
//   C = (1/N) sum_n |x_n - x_hat_n|^2 + lambda * (1/2) sum W^2
//       + sigma * sum_i KL(rho || rho_hat_i),   rho_hat_i = mean_n z_ni
//
// The KL term is evaluated on rho_hat clamped to [eps, 1 - eps].

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "json.hpp"

namespace aec {

struct AEConfig {
  std::size_t input_dim = 0;   // Dx
  std::size_t hidden_dim = 0;  // D, must be < Dx
  double l2_coeff = 0.001;
  double sparsity_coeff = 1.0;
  double sparsity_target = 0.05;
  double kl_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AEParams {
  Eigen::MatrixXd W;   // D x Dx
  Eigen::VectorXd b1;  // D
  Eigen::VectorXd b2;  // Dx

  std::size_t hidden_dim() const { return static_cast<std::size_t>(W.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(W.cols()); }
  std::size_t param_count() const { return W.size() + b1.size() + b2.size(); }

  /// Throws DimensionError unless shapes agree with `config`.
  void check_against(const AEConfig& config) const;
};

struct CostBreakdown {
  double total = 0.0;
  double mse = 0.0;
  double l2 = 0.0;
  double sparsity = 0.0;
  Eigen::VectorXd rho_hat;
};

struct AEGradient {
  Eigen::MatrixXd dW;
  Eigen::VectorXd db1;
  Eigen::VectorXd db2;
};

inline double satlin(double z) { return z <= 0.0 ? 0.0 : (z >= 1.0 ? 1.0 : z); }

/// 1 on the open interval (0,1), 0 elsewhere (including both kinks).
inline double satlin_slope(double z) { return (z > 0.0 && z < 1.0) ? 1.0 : 0.0; }

Eigen::VectorXd encode(const AEParams& params, const Eigen::VectorXd& x);
/// Encodes every row of X; result is N x D.
Eigen::MatrixXd encode_rows(const AEParams& params, const Eigen::MatrixXd& X);
Eigen::VectorXd decode(const AEParams& params, const Eigen::VectorXd& z);

/// KL(rho || rho_hat) with natural logarithms, rho_hat clamped to [eps, 1-eps].
double kl_divergence(double rho, double rho_hat, double eps);

CostBreakdown cost(const AEParams& params, const Eigen::MatrixXd& X, const AEConfig& config);
AEGradient gradient(const AEParams& params, const Eigen::MatrixXd& X, const AEConfig& config);
/// Shares the forward pass between cost and gradient.
CostBreakdown cost_and_gradient(const AEParams& params, const Eigen::MatrixXd& X,
                                const AEConfig& config, AEGradient& grad);

// Flat layout: W row-major, then b1, then b2.
Eigen::VectorXd flatten(const AEParams& params);
Eigen::VectorXd flatten(const AEGradient& grad);
AEParams unflatten(const Eigen::VectorXd& flat, std::size_t hidden_dim, std::size_t input_dim);

// --- serialization ---------------------------------------------------------

/// Versioned little-endian binary; round trip is bit-exact.
void save_params_binary(const std::filesystem::path& path, const AEParams& params,
                        const AEConfig& config);
AEParams load_params_binary(const std::filesystem::path& path, AEConfig* config = nullptr);

nlohmann::json params_to_json(const AEParams& params, const AEConfig& config);
AEParams params_from_json(const nlohmann::json& j, AEConfig* config = nullptr);

nlohmann::json to_json(const AEConfig& config);
AEConfig ae_config_from_json(const nlohmann::json& j, AEConfig base = {});

}  // namespace aec
