#pragma once

// Reference-noise cleaning on top of canoncorr: select the variates whose
// squared canonical correlation reaches a threshold, regress them out of the
// mean-centered data by least squares, and subtract the fit from the raw data.
// Available as a whole-record batch, as independent sliding windows, and as a
// fixed spatial filter that can be applied to new samples.

#include "icanclean/cca.hpp"
#include "icanclean/recording.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace icanclean {

enum class ComponentSource : std::uint8_t {
  DataVariates,   // U, mixtures of the data channels
  NoiseVariates,  // V, mixtures of the reference channels
};

struct CleanConfig {
  double thresh = 0.5;  // compared against R², inclusive
  ComponentSource source = ComponentSource::DataVariates;
  Eigen::Index window_len = 0;  // 0 means the whole record
  Eigen::Index window_hop = 0;  // 0 means window_len

  Eigen::Index effective_hop() const { return window_hop > 0 ? window_hop : window_len; }

  void validate() const {
    if (!(thresh >= 0.0 && thresh <= 1.0)) {
      throw ConfigError("threshold must lie in [0, 1], got " + std::to_string(thresh));
    }
    if (window_len < 0 || window_hop < 0) throw ConfigError("window geometry must be non-negative");
    if (window_len == 0 && window_hop != 0) throw ConfigError("hop given without a window length");
    if (window_len > 0 && effective_hop() > window_len) {
      throw ConfigError("hop (" + std::to_string(effective_hop()) + ") exceeds window length (" +
                        std::to_string(window_len) + ")");
    }
  }
};

/// Components chosen for removal. Indices are zero-based and strictly increasing.
template <typename Scalar>
struct Selection {
  std::vector<Eigen::Index> bad_indices;
  Matrix<Scalar> bad_activity;  // T x n_bad

  Eigen::Index n_bad() const { return static_cast<Eigen::Index>(bad_indices.size()); }
};

template <typename Scalar>
Selection<Scalar> select_bad_components(const CcaResult<Scalar>& cca, const CleanConfig& config) {
  config.validate();
  const Matrix<Scalar>& variates =
      config.source == ComponentSource::DataVariates ? cca.u_variates : cca.v_variates;
  Selection<Scalar> sel;
  for (Eigen::Index i = 0; i < cca.correlations.size(); ++i) {
    const double r = static_cast<double>(cca.correlations(i));
    if (r * r >= config.thresh) sel.bad_indices.push_back(i);
  }
  sel.bad_activity.resize(variates.rows(), sel.n_bad());
  for (Eigen::Index k = 0; k < sel.n_bad(); ++k) {
    sel.bad_activity.col(k) = variates.col(sel.bad_indices[static_cast<std::size_t>(k)]);
  }
  return sel;
}

template <typename Scalar>
struct NoiseProjection {
  Matrix<Scalar> projection;       // n_bad x N_data
  Matrix<Scalar> projected_noise;  // T x N_data
};

/// Least-squares fit of the selected activity onto the centered data channels.
template <typename Scalar, typename Derived>
NoiseProjection<Scalar> project_noise(const Selection<Scalar>& selection,
                                      const Eigen::MatrixBase<Derived>& x_centered) {
  if (selection.bad_activity.rows() != x_centered.rows()) {
    throw ShapeError("project_noise: selection has " + std::to_string(selection.bad_activity.rows()) +
                     " samples but data has " + std::to_string(x_centered.rows()));
  }
  NoiseProjection<Scalar> out;
  if (selection.n_bad() == 0) {
    out.projection = Matrix<Scalar>::Zero(0, x_centered.cols());
    out.projected_noise = Matrix<Scalar>::Zero(x_centered.rows(), x_centered.cols());
    return out;
  }
  out.projection = least_squares_solve(selection.bad_activity, x_centered);
  out.projected_noise = selection.bad_activity * out.projection;
  return out;
}

/// One pass of the pipeline with every intermediate kept.
template <typename Scalar>
struct PipelineTrace {
  CcaResult<Scalar> cca;
  Matrix<Scalar> x_centered;
  Selection<Scalar> selection;
  NoiseProjection<Scalar> noise;
  Matrix<Scalar> x_clean;
};

template <typename DerivedX, typename DerivedY>
PipelineTrace<typename DerivedX::Scalar> run_pipeline(const Eigen::MatrixBase<DerivedX>& x,
                                                      const Eigen::MatrixBase<DerivedY>& y,
                                                      const CleanConfig& config) {
  using Scalar = typename DerivedX::Scalar;
  config.validate();
  PipelineTrace<Scalar> trace;
  trace.cca = canoncorr(x, y);
  trace.selection = select_bad_components(trace.cca, config);
  trace.x_centered = x.rowwise() - trace.cca.x_mean.transpose();
  trace.noise = project_noise(trace.selection, trace.x_centered);
  if (trace.selection.n_bad() == 0) {
    trace.x_clean = x;
  } else {
    trace.x_clean = x - trace.noise.projected_noise;
  }
  return trace;
}

struct WindowSummary {
  Eigen::Index start = 0;
  Eigen::Index length = 0;
  bool refit = true;  // false when the segment reused the previous window's model
  VectorXd correlations;
  std::vector<Eigen::Index> bad_indices;
};

struct CleanReport {
  VectorXd correlations;
  std::vector<Eigen::Index> bad_indices;
  Eigen::Index n_comp = 0;
  VectorXd variance_removed_per_channel;
  Eigen::Index windows_processed = 0;
  std::vector<WindowSummary> windows;
};

namespace detail {

// var(removed) / var(original) per channel, clamped to [0, 1].
template <typename Scalar>
VectorXd variance_fraction(const Matrix<Scalar>& removed, const Matrix<Scalar>& original) {
  VectorXd out(original.cols());
  for (Eigen::Index j = 0; j < original.cols(); ++j) {
    const auto oc = original.col(j).array() - original.col(j).mean();
    const auto rc = removed.col(j).array() - removed.col(j).mean();
    const double denom = static_cast<double>(oc.square().sum());
    const double num = static_cast<double>(rc.square().sum());
    out(j) = denom > 0.0 ? std::clamp(num / denom, 0.0, 1.0) : 0.0;
  }
  return out;
}

template <typename Scalar>
WindowSummary summarize(const PipelineTrace<Scalar>& trace, Eigen::Index start) {
  WindowSummary w;
  w.start = start;
  w.length = trace.x_clean.rows();
  w.correlations = trace.cca.correlations.template cast<double>();
  w.bad_indices = trace.selection.bad_indices;
  return w;
}

}  // namespace detail

template <typename Scalar>
struct CleanResult {
  Matrix<Scalar> x_clean;
  CleanReport report;
};

/// Whole-record cleaning.
template <typename DerivedX, typename DerivedY>
CleanResult<typename DerivedX::Scalar> clean_batch(const Eigen::MatrixBase<DerivedX>& x,
                                                   const Eigen::MatrixBase<DerivedY>& y,
                                                   const CleanConfig& config) {
  using Scalar = typename DerivedX::Scalar;
  config.validate();
  if (config.window_len != 0 && config.window_len < x.rows()) {
    throw ConfigError("clean_batch: window length " + std::to_string(config.window_len) +
                      " is shorter than the record; use clean_sliding");
  }
  auto trace = run_pipeline(x, y, config);
  CleanResult<Scalar> out;
  out.report.correlations = trace.cca.correlations.template cast<double>();
  out.report.bad_indices = trace.selection.bad_indices;
  out.report.n_comp = trace.cca.n_comp;
  out.report.variance_removed_per_channel =
      detail::variance_fraction<Scalar>(trace.noise.projected_noise, trace.x_centered);
  out.report.windows_processed = 1;
  out.report.windows.push_back(detail::summarize(trace, 0));
  out.x_clean = std::move(trace.x_clean);
  return out;
}

/// Fixed linear map: cleaned = (x - train_mean) * matrix + train_mean.
template <typename Scalar>
struct SpatialFilter {
  Matrix<Scalar> matrix;  // N_data x N_data
  Vector<Scalar> train_mean;
  double thresh = 0.0;
  Eigen::Index n_bad = 0;
  VectorXd correlations;

  Eigen::Index n_channels() const { return matrix.rows(); }
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> bad_unmixing_columns(const Matrix<Scalar>& unmix, const std::vector<Eigen::Index>& idx) {
  Matrix<Scalar> out(unmix.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = unmix.col(idx[k]);
  return out;
}

template <typename Scalar>
SpatialFilter<Scalar> filter_from_trace(const PipelineTrace<Scalar>& trace, double thresh) {
  const Eigen::Index n = trace.x_centered.cols();
  SpatialFilter<Scalar> f;
  f.train_mean = trace.cca.x_mean;
  f.thresh = thresh;
  f.n_bad = trace.selection.n_bad();
  f.correlations = trace.cca.correlations.template cast<double>();
  f.matrix = Matrix<Scalar>::Identity(n, n);
  if (f.n_bad > 0) {
    f.matrix -= bad_unmixing_columns(trace.cca.a_unmix, trace.selection.bad_indices) *
                trace.noise.projection;
  }
  return f;
}

}  // namespace detail

/// Fits the channel-space filter equivalent to clean_batch on (x, y).
/// Only U-based selections can be expressed without the noise channels.
template <typename DerivedX, typename DerivedY>
SpatialFilter<typename DerivedX::Scalar> fit_spatial_filter(const Eigen::MatrixBase<DerivedX>& x,
                                                            const Eigen::MatrixBase<DerivedY>& y,
                                                            const CleanConfig& config) {
  config.validate();
  if (config.source != ComponentSource::DataVariates) {
    throw UnsupportedConfigError(
        "fit_spatial_filter: noise-variate selections need the reference channels at "
        "application time; use source = data variates");
  }
  return detail::filter_from_trace(run_pipeline(x, y, config), config.thresh);
}

template <typename Scalar, typename Derived>
Matrix<Scalar> apply_spatial_filter(const Eigen::MatrixBase<Derived>& x_new,
                                    const SpatialFilter<Scalar>& f) {
  if (x_new.cols() != f.n_channels()) {
    throw ShapeError("apply_spatial_filter: filter expects " + std::to_string(f.n_channels()) +
                     " channels, got " + std::to_string(x_new.cols()));
  }
  validate_finite(x_new);
  const RowVector<Scalar> mean = f.train_mean.transpose();
  return ((x_new.rowwise() - mean) * f.matrix).rowwise() + mean;
}

namespace detail {

// Everything needed to reapply one window's fit to later samples.
template <typename Scalar>
struct WindowModel {
  ComponentSource source = ComponentSource::DataVariates;
  Vector<Scalar> x_mean;
  Vector<Scalar> y_mean;
  Matrix<Scalar> unmix_bad;   // columns of A or B
  Matrix<Scalar> projection;  // n_bad x N_data

  template <typename DX, typename DY>
  Matrix<Scalar> apply(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) const {
    if (projection.rows() == 0) return x;
    Matrix<Scalar> activity;
    if (source == ComponentSource::DataVariates) {
      activity = (x.rowwise() - x_mean.transpose()) * unmix_bad;
    } else {
      activity = (y.rowwise() - y_mean.transpose()) * unmix_bad;
    }
    return x - activity * projection;
  }
};

template <typename Scalar>
WindowModel<Scalar> model_from_trace(const PipelineTrace<Scalar>& trace, ComponentSource source) {
  WindowModel<Scalar> m;
  m.source = source;
  m.x_mean = trace.cca.x_mean;
  m.y_mean = trace.cca.y_mean;
  const auto& unmix = source == ComponentSource::DataVariates ? trace.cca.a_unmix : trace.cca.b_unmix;
  m.unmix_bad = bad_unmixing_columns(unmix, trace.selection.bad_indices);
  m.projection = trace.noise.projection;
  return m;
}

// Linear crossfade weight for sample n of a window of length len; positive everywhere.
inline double crossfade_weight(Eigen::Index n, Eigen::Index len) {
  return static_cast<double>(std::min(n + 1, len - n));
}

}  // namespace detail

/// Cleans windows [k*hop, k*hop + window_len) independently with per-window means.
///
/// With hop == window_len the cleaned windows are concatenated. With overlap,
/// each sample is the crossfade-weighted average of the windows covering it.
/// Trailing samples after the last full window form a partial window: it is
/// fitted on its own when long enough for canoncorr, otherwise the last full
/// window's model is reapplied to it.
template <typename DerivedX, typename DerivedY>
CleanResult<typename DerivedX::Scalar> clean_sliding(const Eigen::MatrixBase<DerivedX>& x,
                                                     const Eigen::MatrixBase<DerivedY>& y,
                                                     const CleanConfig& config) {
  using Scalar = typename DerivedX::Scalar;
  config.validate();
  if (config.window_len <= 0) throw ConfigError("clean_sliding: window length must be positive");
  if (x.rows() != y.rows()) {
    throw ShapeError("clean_sliding: data has " + std::to_string(x.rows()) +
                     " samples but noise has " + std::to_string(y.rows()));
  }
  const Eigen::Index min_len = min_cca_samples(x.cols(), y.cols());
  if (config.window_len < min_len) {
    throw ConfigError("clean_sliding: window length " + std::to_string(config.window_len) +
                      " is below the " + std::to_string(min_len) +
                      " samples needed for these channel counts");
  }
  validate_finite(x, "data");
  validate_finite(y, "noise");

  const Eigen::Index t = x.rows();
  const Eigen::Index len = config.window_len;
  const Eigen::Index hop = config.effective_hop();
  const bool overlap = hop < len;

  CleanResult<Scalar> out;
  Matrix<Scalar> accum = Matrix<Scalar>::Zero(t, x.cols());
  Vector<Scalar> weight_sum = Vector<Scalar>::Zero(t);

  auto place = [&](const Matrix<Scalar>& cleaned, Eigen::Index start) {
    const Eigen::Index n = cleaned.rows();
    if (!overlap) {
      accum.middleRows(start, n) = cleaned;
      weight_sum.segment(start, n).setOnes();
      return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto w = static_cast<Scalar>(detail::crossfade_weight(i, n));
      accum.row(start + i) += w * cleaned.row(i);
      weight_sum(start + i) += w;
    }
  };

  std::optional<detail::WindowModel<Scalar>> last_model;
  Eigen::Index next_start = 0;
  for (; next_start + len <= t; next_start += hop) {
    auto trace = run_pipeline(x.middleRows(next_start, len), y.middleRows(next_start, len), config);
    place(trace.x_clean, next_start);
    out.report.windows.push_back(detail::summarize(trace, next_start));
    last_model = detail::model_from_trace(trace, config.source);
  }

  const Eigen::Index covered_end = out.report.windows.empty() ? 0 : out.report.windows.back().start + len;
  if (covered_end < t) {
    const Eigen::Index tail_start = std::min(next_start, covered_end);
    const Eigen::Index tail_len = t - tail_start;
    if (tail_len >= min_len) {
      auto trace = run_pipeline(x.middleRows(tail_start, tail_len), y.middleRows(tail_start, tail_len), config);
      place(trace.x_clean, tail_start);
      out.report.windows.push_back(detail::summarize(trace, tail_start));
    } else if (last_model) {
      const Eigen::Index n = t - covered_end;
      auto cleaned = last_model->apply(x.middleRows(covered_end, n), y.middleRows(covered_end, n));
      accum.middleRows(covered_end, n) = cleaned;
      weight_sum.segment(covered_end, n).setOnes();
      WindowSummary w;
      w.start = covered_end;
      w.length = n;
      w.refit = false;
      w.correlations = out.report.windows.back().correlations;
      w.bad_indices = out.report.windows.back().bad_indices;
      out.report.windows.push_back(std::move(w));
    } else {
      throw InsufficientSamplesError("clean_sliding: record of " + std::to_string(t) +
                                     " samples is shorter than the " + std::to_string(min_len) +
                                     " samples needed for one window");
    }
  }

  if (overlap) {
    out.x_clean = accum.array().colwise() / weight_sum.array();
  } else {
    out.x_clean = std::move(accum);
  }

  // Aggregate: per-component maximum correlation, union of selected indices.
  Eigen::Index max_comp = 0;
  for (const auto& w : out.report.windows) max_comp = std::max(max_comp, w.correlations.size());
  out.report.correlations = VectorXd::Zero(max_comp);
  std::vector<bool> any_bad(static_cast<std::size_t>(max_comp), false);
  for (const auto& w : out.report.windows) {
    for (Eigen::Index i = 0; i < w.correlations.size(); ++i) {
      out.report.correlations(i) = std::max(out.report.correlations(i), w.correlations(i));
    }
    for (auto i : w.bad_indices) any_bad[static_cast<std::size_t>(i)] = true;
  }
  for (Eigen::Index i = 0; i < max_comp; ++i) {
    if (any_bad[static_cast<std::size_t>(i)]) out.report.bad_indices.push_back(i);
  }
  out.report.n_comp = max_comp;
  out.report.windows_processed = static_cast<Eigen::Index>(out.report.windows.size());
  const Matrix<Scalar> xe = x;
  out.report.variance_removed_per_channel = detail::variance_fraction<Scalar>(xe - out.x_clean, xe);
  return out;
}

// Recording-level entry points. Labels and sampling rate pass through unchanged.

struct RecordingCleanResult {
  Recording x_clean;
  CleanReport report;
};

namespace detail {
inline void check_aligned(const Recording& x, const Recording& y) {
  x.validate("data");
  y.validate("noise");
  if (x.n_samples() != y.n_samples()) {
    throw ShapeError("data has " + std::to_string(x.n_samples()) + " samples but noise has " +
                     std::to_string(y.n_samples()));
  }
}
}  // namespace detail

inline RecordingCleanResult clean_batch(const Recording& x, const Recording& y, const CleanConfig& config) {
  detail::check_aligned(x, y);
  auto r = clean_batch(x.samples, y.samples, config);
  return {x.with_samples(std::move(r.x_clean)), std::move(r.report)};
}

inline RecordingCleanResult clean_sliding(const Recording& x, const Recording& y, const CleanConfig& config) {
  detail::check_aligned(x, y);
  auto r = clean_sliding(x.samples, y.samples, config);
  return {x.with_samples(std::move(r.x_clean)), std::move(r.report)};
}

/// Batch when window_len is 0 or covers the record, sliding otherwise.
inline RecordingCleanResult clean(const Recording& x, const Recording& y, const CleanConfig& config) {
  if (config.window_len == 0) return clean_batch(x, y, config);
  return clean_sliding(x, y, config);
}

inline SpatialFilter<double> fit_spatial_filter(const Recording& x, const Recording& y,
                                                const CleanConfig& config) {
  detail::check_aligned(x, y);
  return fit_spatial_filter(x.samples, y.samples, config);
}

inline Recording apply_spatial_filter(const Recording& x_new, const SpatialFilter<double>& f) {
  return x_new.with_samples(apply_spatial_filter(x_new.samples, f));
}

}  // namespace icanclean
