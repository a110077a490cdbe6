#include "aec/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "aec/error.hpp"

namespace aec {

namespace {

struct Forward {
  Eigen::MatrixXd a1;  // N x D pre-activations
  Eigen::MatrixXd z;   // N x D codes
  Eigen::MatrixXd a2;  // N x Dx pre-activations
  Eigen::MatrixXd residual;  // x_hat - x
};

void check_batch(const AEParams& params, const Eigen::MatrixXd& X, const AEConfig& config) {
  config.validate();
  params.check_against(config);
  if (X.rows() < 1) throw DimensionError("cost needs at least one sample");
  if (static_cast<std::size_t>(X.cols()) != config.input_dim) {
    throw DimensionError("batch has " + std::to_string(X.cols()) + " columns, expected " +
                         std::to_string(config.input_dim));
  }
}

Forward forward(const AEParams& p, const Eigen::MatrixXd& X) {
  Forward f;
  f.a1.noalias() = X * p.W.transpose();
  f.a1.rowwise() += p.b1.transpose();
  f.z = f.a1.unaryExpr([](double v) { return satlin(v); });
  f.a2.noalias() = f.z * p.W;
  f.a2.rowwise() += p.b2.transpose();
  f.residual = f.a2.unaryExpr([](double v) { return satlin(v); }) - X;
  return f;
}

double clamp_rho(double rho_hat, double eps) { return std::clamp(rho_hat, eps, 1.0 - eps); }

CostBreakdown evaluate(const AEParams& p, const Forward& f, const AEConfig& cfg) {
  const auto n = static_cast<double>(f.z.rows());
  CostBreakdown c;
  c.mse = f.residual.squaredNorm() / n;
  c.l2 = 0.5 * p.W.squaredNorm();
  c.rho_hat = f.z.colwise().sum().transpose() / n;
  c.sparsity = 0.0;
  for (Eigen::Index i = 0; i < c.rho_hat.size(); ++i) {
    c.sparsity += kl_divergence(cfg.sparsity_target, c.rho_hat(i), cfg.kl_epsilon);
  }
  c.total = c.mse + cfg.l2_coeff * c.l2 + cfg.sparsity_coeff * c.sparsity;
  if (!std::isfinite(c.total)) {
    throw NumericalError("autoencoder cost is non-finite (mse=" + std::to_string(c.mse) +
                         ", l2=" + std::to_string(c.l2) + ")");
  }
  return c;
}

}  // namespace

void AEConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0) throw ConfigError("autoencoder dims must be positive");
  if (hidden_dim >= input_dim) {
    throw ConfigError("hidden_dim (" + std::to_string(hidden_dim) +
                      ") must be smaller than input_dim (" + std::to_string(input_dim) + ")");
  }
  if (!(l2_coeff >= 0.0) || !(sparsity_coeff >= 0.0)) {
    throw ConfigError("regularization coefficients must be nonnegative");
  }
  if (!(sparsity_target > 0.0 && sparsity_target < 1.0)) {
    throw ConfigError("sparsity_target must lie in (0, 1)");
  }
  if (!(kl_epsilon > 0.0 && kl_epsilon < 0.5)) throw ConfigError("kl_epsilon must lie in (0, 0.5)");
}

void AEParams::check_against(const AEConfig& config) const {
  if (hidden_dim() != config.hidden_dim || input_dim() != config.input_dim ||
      static_cast<std::size_t>(b1.size()) != config.hidden_dim ||
      static_cast<std::size_t>(b2.size()) != config.input_dim) {
    throw DimensionError("parameter shapes W " + std::to_string(W.rows()) + "x" +
                         std::to_string(W.cols()) + ", b1 " + std::to_string(b1.size()) +
                         ", b2 " + std::to_string(b2.size()) + " do not match config " +
                         std::to_string(config.hidden_dim) + "x" +
                         std::to_string(config.input_dim));
  }
}

Eigen::VectorXd encode(const AEParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.W.cols()) {
    throw DimensionError("encode: input length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(params.W.cols()));
  }
  if (params.b1.size() != params.W.rows()) throw DimensionError("encode: b1 length mismatch");
  Eigen::VectorXd a = params.W * x + params.b1;
  return a.unaryExpr([](double v) { return satlin(v); });
}

Eigen::MatrixXd encode_rows(const AEParams& params, const Eigen::MatrixXd& X) {
  if (X.cols() != params.W.cols()) {
    throw DimensionError("encode: input length " + std::to_string(X.cols()) + ", expected " +
                         std::to_string(params.W.cols()));
  }
  if (params.b1.size() != params.W.rows()) throw DimensionError("encode: b1 length mismatch");
  Eigen::MatrixXd a;
  a.noalias() = X * params.W.transpose();
  a.rowwise() += params.b1.transpose();
  return a.unaryExpr([](double v) { return satlin(v); });
}

Eigen::VectorXd decode(const AEParams& params, const Eigen::VectorXd& z) {
  if (z.size() != params.W.rows()) {
    throw DimensionError("decode: code length " + std::to_string(z.size()) + ", expected " +
                         std::to_string(params.W.rows()));
  }
  if (params.b2.size() != params.W.cols()) throw DimensionError("decode: b2 length mismatch");
  Eigen::VectorXd a = params.W.transpose() * z + params.b2;
  return a.unaryExpr([](double v) { return satlin(v); });
}

double kl_divergence(double rho, double rho_hat, double eps) {
  const double q = clamp_rho(rho_hat, eps);
  return rho * std::log(rho / q) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - q));
}

CostBreakdown cost(const AEParams& params, const Eigen::MatrixXd& X, const AEConfig& config) {
  check_batch(params, X, config);
  return evaluate(params, forward(params, X), config);
}

CostBreakdown cost_and_gradient(const AEParams& params, const Eigen::MatrixXd& X,
                                const AEConfig& config, AEGradient& grad) {
  check_batch(params, X, config);
  const Forward f = forward(params, X);
  CostBreakdown c = evaluate(params, f, config);
  const auto n = static_cast<double>(X.rows());

  // Output layer.
  const Eigen::MatrixXd d_a2 =
      (2.0 / n) * f.residual.cwiseProduct(f.a2.unaryExpr([](double v) { return satlin_slope(v); }));
  grad.db2 = d_a2.colwise().sum().transpose();
  grad.dW.noalias() = f.z.transpose() * d_a2;  // decoder use of W

  // Hidden layer: reconstruction path plus the sparsity term through rho_hat.
  Eigen::MatrixXd d_z;
  d_z.noalias() = d_a2 * params.W.transpose();
  if (config.sparsity_coeff != 0.0) {
    const double rho = config.sparsity_target;
    const double eps = config.kl_epsilon;
    Eigen::RowVectorXd d_rho(c.rho_hat.size());
    for (Eigen::Index i = 0; i < c.rho_hat.size(); ++i) {
      const double r = c.rho_hat(i);
      // The clamp is flat outside [eps, 1-eps].
      d_rho(i) = (r < eps || r > 1.0 - eps) ? 0.0 : (-rho / r + (1.0 - rho) / (1.0 - r));
    }
    d_z.rowwise() += (config.sparsity_coeff / n) * d_rho;
  }
  const Eigen::MatrixXd d_a1 =
      d_z.cwiseProduct(f.a1.unaryExpr([](double v) { return satlin_slope(v); }));
  grad.db1 = d_a1.colwise().sum().transpose();
  grad.dW.noalias() += d_a1.transpose() * X;  // encoder use of W
  grad.dW += config.l2_coeff * params.W;

  if (!grad.dW.allFinite() || !grad.db1.allFinite() || !grad.db2.allFinite()) {
    throw NumericalError("autoencoder gradient is non-finite");
  }
  return c;
}

AEGradient gradient(const AEParams& params, const Eigen::MatrixXd& X, const AEConfig& config) {
  AEGradient g;
  cost_and_gradient(params, X, config, g);
  return g;
}

namespace {

template <typename Mat, typename Vec>
Eigen::VectorXd pack(const Mat& w, const Vec& a, const Vec& b) {
  Eigen::VectorXd flat(w.size() + a.size() + b.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) flat(k++) = w(r, c);
  flat.segment(k, a.size()) = a;
  k += a.size();
  flat.segment(k, b.size()) = b;
  return flat;
}

}  // namespace

Eigen::VectorXd flatten(const AEParams& params) { return pack(params.W, params.b1, params.b2); }

Eigen::VectorXd flatten(const AEGradient& grad) { return pack(grad.dW, grad.db1, grad.db2); }

AEParams unflatten(const Eigen::VectorXd& flat, std::size_t hidden_dim, std::size_t input_dim) {
  const auto d = static_cast<Eigen::Index>(hidden_dim);
  const auto dx = static_cast<Eigen::Index>(input_dim);
  if (flat.size() != d * dx + d + dx) {
    throw DimensionError("flat parameter vector has " + std::to_string(flat.size()) +
                         " entries, expected " + std::to_string(d * dx + d + dx));
  }
  AEParams p;
  p.W.resize(d, dx);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < dx; ++c) p.W(r, c) = flat(k++);
  p.b1 = flat.segment(k, d);
  k += d;
  p.b2 = flat.segment(k, dx);
  return p;
}

}  // namespace aec
