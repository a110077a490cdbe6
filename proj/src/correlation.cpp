#include <algorithm>
#include <charconv>
#include <cmath>

#include "aec/aec_rate.hpp"
#include "aec/error.hpp"

namespace aec {

namespace {

// Rows centred and scaled to unit norm; the dot product of two rows is their
// Pearson correlation.
Eigen::MatrixXd standardized_rows(const Eigen::MatrixXd& F) {
  if (F.cols() < 2) throw DimensionError("correlation needs feature vectors of length >= 2");
  Eigen::MatrixXd U = F.colwise() - F.rowwise().mean();
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const double norm = U.row(i).norm();
    if (!(norm > 0.0)) {
      throw NumericalError("feature row " + std::to_string(i) +
                           " has zero variance (dead encoding)");
    }
    U.row(i) /= norm;
  }
  return U;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw DimensionError("pearson: arguments differ in length");
  if (a.size() < 2) throw DimensionError("pearson: need at least two entries");
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double sa = ca.squaredNorm();
  const double sb = cb.squaredNorm();
  if (!(sa > 0.0)) throw NumericalError("pearson: first argument has zero variance");
  if (!(sb > 0.0)) throw NumericalError("pearson: second argument has zero variance");
  return clamp_unit(ca.dot(cb) / std::sqrt(sa * sb));
}

Eigen::MatrixXd cc_matrix(const Eigen::MatrixXd& F) {
  const Eigen::MatrixXd U = standardized_rows(F);
  const Eigen::Index n = U.rows();
  Eigen::MatrixXd cc(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cc(j, j) = 1.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      const double r = clamp_unit(U.row(i).dot(U.row(j)));
      cc(i, j) = r;
      cc(j, i) = r;
    }
  }
  return cc;
}

Eigen::VectorXd reference_series(const Eigen::MatrixXd& cc, std::size_t ref_index) {
  if (ref_index >= static_cast<std::size_t>(cc.cols())) {
    throw ConfigError("reference index " + std::to_string(ref_index) + " out of range for " +
                      std::to_string(cc.cols()) + " samples");
  }
  return cc.col(static_cast<Eigen::Index>(ref_index));
}

Eigen::VectorXd reference_correlations(const Eigen::MatrixXd& F, std::size_t ref_index,
                                       std::size_t ref_count) {
  if (ref_count == 0) throw ConfigError("reference count must be >= 1");
  if (ref_index + ref_count > static_cast<std::size_t>(F.rows())) {
    throw ConfigError("reference rows [" + std::to_string(ref_index) + ", " +
                      std::to_string(ref_index + ref_count) + ") out of range for " +
                      std::to_string(F.rows()) + " samples");
  }
  const Eigen::MatrixXd U = standardized_rows(F);
  const auto ref = static_cast<Eigen::Index>(ref_index);
  Eigen::RowVectorXd u_ref;
  if (ref_count == 1) {
    u_ref = U.row(ref);
  } else {
    Eigen::MatrixXd mean_row =
        F.middleRows(ref, static_cast<Eigen::Index>(ref_count)).colwise().mean();
    u_ref = standardized_rows(mean_row).row(0);
  }
  Eigen::VectorXd r(U.rows());
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    r(i) = (ref_count == 1 && i == ref) ? 1.0 : clamp_unit(U.row(i).dot(u_ref));
  }
  return r;
}

NormBounds minmax_bounds(const Eigen::VectorXd& v, double min_span) {
  if (v.size() == 0) throw DimensionError("cannot normalize an empty series");
  if (!(min_span >= 0.0)) throw ConfigError("min_span must be nonnegative");
  NormBounds b{v.minCoeff(), v.maxCoeff()};
  if (b.hi - b.lo < min_span) b.lo = b.hi - min_span;
  return b;
}

Eigen::VectorXd normalize_with_bounds(const Eigen::VectorXd& v, NormBounds bounds) {
  if (!(bounds.hi > bounds.lo)) return Eigen::VectorXd::Ones(v.size());
  const double span = bounds.hi - bounds.lo;
  return ((v.array() - bounds.lo) / span).cwiseMax(0.0).cwiseMin(1.0);
}

Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& v) {
  return normalize_with_bounds(v, minmax_bounds(v));
}

Eigen::VectorXd ma_filter(const Eigen::VectorXd& y, std::size_t w_size) {
  if (w_size == 0) throw ConfigError("moving-average window must be >= 1");
  const auto w = static_cast<Eigen::Index>(w_size);
  Eigen::VectorXd out(y.size());
  for (Eigen::Index n = 0; n < y.size(); ++n) {
    const Eigen::Index first = std::max<Eigen::Index>(0, n - w + 1);
    double sum = 0.0;
    for (Eigen::Index k = first; k <= n; ++k) sum += y(k);
    out(n) = sum / static_cast<double>(n - first + 1);
  }
  return out;
}

std::string to_string(StageOrder order) {
  return order == StageOrder::normalize_then_filter ? "normalize-then-filter"
                                                    : "filter-then-normalize";
}

StageOrder stage_order_from_string(const std::string& text) {
  if (text == "normalize-then-filter") return StageOrder::normalize_then_filter;
  if (text == "filter-then-normalize") return StageOrder::filter_then_normalize;
  throw ConfigError("unknown stage order '" + text + "'");
}

nlohmann::json to_json(const AecOptions& o) {
  nlohmann::json j{{"ref_index", o.ref_index}, {"ref_count", o.ref_count},
                   {"w_size", o.w_size},       {"order", to_string(o.order)},
                   {"min_span", o.min_span}};
  j["fit_count"] = o.fit_count ? nlohmann::json(*o.fit_count) : nullptr;
  return j;
}

AecOptions aec_options_from_json(const nlohmann::json& j, AecOptions o) {
  o.ref_index = j.value("ref_index", o.ref_index);
  o.ref_count = j.value("ref_count", o.ref_count);
  o.w_size = j.value("w_size", o.w_size);
  if (j.contains("order")) o.order = stage_order_from_string(j.at("order").get<std::string>());
  o.min_span = j.value("min_span", o.min_span);
  if (j.contains("fit_count")) {
    const auto& f = j.at("fit_count");
    o.fit_count = f.is_null() ? std::nullopt : std::optional<std::size_t>(f.get<std::size_t>());
  }
  return o;
}

AecSeries rate_from_series(const Eigen::VectorXd& raw, const AecOptions& options) {
  const auto n = static_cast<std::size_t>(raw.size());
  if (n == 0) throw DimensionError("empty indicator series");
  if (options.fit_count && (*options.fit_count == 0 || *options.fit_count > n)) {
    throw ConfigError("normalization fit count out of range");
  }
  const auto fit = static_cast<Eigen::Index>(options.fit_count.value_or(n));

  AecSeries s;
  s.raw_corr = raw;
  s.options = options;
  if (options.order == StageOrder::normalize_then_filter) {
    s.bounds = minmax_bounds(raw.head(fit), options.min_span);
    s.normalized = normalize_with_bounds(raw, s.bounds);
    s.filtered = ma_filter(s.normalized, options.w_size);
  } else {
    const Eigen::VectorXd smooth = ma_filter(raw, options.w_size);
    s.bounds = minmax_bounds(smooth.head(fit), options.min_span);
    s.normalized = normalize_with_bounds(raw, s.bounds);
    s.filtered = normalize_with_bounds(smooth, s.bounds);
  }
  return s;
}

AecSeries aec_rate(const Eigen::MatrixXd& F, const AecOptions& options) {
  return rate_from_series(reference_correlations(F, options.ref_index, options.ref_count), options);
}

AecSeries aec_rate(const Eigen::MatrixXd& F, std::size_t ref_index, std::size_t w_size) {
  AecOptions o;
  o.ref_index = ref_index;
  o.w_size = w_size;
  return aec_rate(F, o);
}

std::string series_csv(const AecSeries& s) {
  std::string out = "ordinal,raw_corr,normalized,filtered\n";
  for (Eigen::Index i = 0; i < s.raw_corr.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    append_number(out, s.raw_corr(i));
    out.push_back(',');
    append_number(out, s.normalized(i));
    out.push_back(',');
    append_number(out, s.filtered(i));
    out.push_back('\n');
  }
  return out;
}

nlohmann::json series_sidecar(const AecSeries& s) {
  nlohmann::json j = to_json(s.options);
  j["N"] = s.size();
  j["normalization_min"] = s.bounds.lo;
  j["normalization_max"] = s.bounds.hi;
  return j;
}

}  // namespace aec
