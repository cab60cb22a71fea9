#pragma once

#include "icanclean/core.hpp"

#include <string>
#include <unordered_set>
#include <vector>

namespace icanclean {

/// A time-by-channel block of samples with channel labels and a sampling rate.
struct Recording {
  MatrixXd samples;  // T x N
  std::vector<std::string> channel_labels;
  double sampling_rate_hz = 1.0;

  Eigen::Index n_samples() const { return samples.rows(); }
  Eigen::Index n_channels() const { return samples.cols(); }

  /// Checks shape, finiteness, label count and uniqueness, and the sampling rate.
  void validate(const std::string& what = "recording") const {
    validate_finite(samples, what);
    if (static_cast<Eigen::Index>(channel_labels.size()) != samples.cols()) {
      throw ShapeError(what + ": " + std::to_string(channel_labels.size()) + " labels for " +
                       std::to_string(samples.cols()) + " channels");
    }
    std::unordered_set<std::string> seen;
    for (const auto& label : channel_labels) {
      if (label.empty()) throw ValidationError(what + ": empty channel label");
      if (!seen.insert(label).second) {
        throw ValidationError(what + ": duplicate channel label '" + label + "'");
      }
    }
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
      throw ValidationError(what + ": sampling rate must be positive and finite");
    }
  }

  /// Same labels and rate, different samples.
  Recording with_samples(MatrixXd new_samples) const {
    Recording out{std::move(new_samples), channel_labels, sampling_rate_hz};
    return out;
  }
};

/// Labels "<prefix>1" ... "<prefix>n".
inline std::vector<std::string> numbered_labels(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 1; i <= n; ++i) labels.push_back(prefix + std::to_string(i));
  return labels;
}

}  // namespace icanclean
