#pragma once

// Health rate from encoded features: correlation of every sample's code with
// a healthy reference code, min-max normalized to [0,1], then smoothed with a
// trailing moving average.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "json.hpp"

namespace aec {

/// Sample Pearson correlation. Throws DimensionError for length < 2 or
/// mismatched lengths and NumericalError when either argument is constant.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// N x N correlation matrix of the rows of F. Exactly symmetric, unit diagonal.
/// Throws NumericalError naming the first constant row.
Eigen::MatrixXd cc_matrix(const Eigen::MatrixXd& F);

/// Column `ref_index` of a correlation matrix.
Eigen::VectorXd reference_series(const Eigen::MatrixXd& cc, std::size_t ref_index);

/// Correlation of every row of F with the reference code: row `ref_index`,
/// or the mean of rows [ref_index, ref_index + ref_count) when ref_count > 1.
/// Each entry depends only on its own row and the reference.
Eigen::VectorXd reference_correlations(const Eigen::MatrixXd& F, std::size_t ref_index,
                                       std::size_t ref_count = 1);

struct NormBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Bounds of v. When hi - lo < min_span the lower bound is lowered to
/// hi - min_span, so spreads narrower than min_span are not stretched to the
/// full [0,1] range.
NormBounds minmax_bounds(const Eigen::VectorXd& v, double min_span = 0.0);

/// (v - lo) / (hi - lo) clipped to [0,1]; all ones when hi == lo.
Eigen::VectorXd normalize_with_bounds(const Eigen::VectorXd& v, NormBounds bounds);

/// Plain min-max normalization; a constant series maps to all ones.
Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& v);

/// Trailing moving average; the first w_size - 1 outputs average the samples
/// available so far. Throws ConfigError for w_size == 0.
Eigen::VectorXd ma_filter(const Eigen::VectorXd& y, std::size_t w_size);

enum class StageOrder { normalize_then_filter, filter_then_normalize };

std::string to_string(StageOrder order);
StageOrder stage_order_from_string(const std::string& text);

/// Default normalization span floor. Correlations of a healthy, stationary
/// run sit in a narrow band just below 1; with plain min-max scaling that
/// band is stretched over [0,1] and noise alone trips the detector. Set
/// min_span to 0 for plain min-max.
inline constexpr double kDefaultMinSpan = 0.3;

struct AecOptions {
  std::size_t ref_index = 0;
  std::size_t ref_count = 1;
  std::size_t w_size = 10;
  StageOrder order = StageOrder::normalize_then_filter;
  double min_span = kDefaultMinSpan;
  // When set, normalization bounds come from the first fit_count raw values
  // only and later values are clipped (causal operation).
  std::optional<std::size_t> fit_count;
};

nlohmann::json to_json(const AecOptions& options);
AecOptions aec_options_from_json(const nlohmann::json& j, AecOptions base = {});

struct AecSeries {
  Eigen::VectorXd raw_corr;
  Eigen::VectorXd normalized;  // normalize(raw_corr)
  Eigen::VectorXd filtered;    // the health rate
  AecOptions options;
  NormBounds bounds;

  std::size_t size() const { return static_cast<std::size_t>(raw_corr.size()); }
};

AecSeries aec_rate(const Eigen::MatrixXd& F, const AecOptions& options);
AecSeries aec_rate(const Eigen::MatrixXd& F, std::size_t ref_index, std::size_t w_size);

/// Health rate from an already computed indicator series (used for the
/// RMS / kurtosis baselines).
AecSeries rate_from_series(const Eigen::VectorXd& raw, const AecOptions& options);

/// CSV with header "ordinal,raw_corr,normalized,filtered".
std::string series_csv(const AecSeries& series);
nlohmann::json series_sidecar(const AecSeries& series);

}  // namespace aec
