#pragma once

#include <Eigen/Core>
#include <deque>

#include "mrnav/types.hpp"

namespace mrnav {

/// Moving horizon of (planned, observed) state pairs used to estimate the
/// trajectory-tracking error as a weighted RMS. The weight matrix is a
/// non-negative diagonal over the 9 state components (position, velocity,
/// acceleration per axis).
class TrackingHistory {
 public:
  using Weights = Eigen::Matrix<double, 9, 1>;

  static Weights default_weights() {
    Weights q;
    q << 4.0, 4.0, 4.0, 0.1, 0.1, 0.1, 0.01, 0.01, 0.01;
    return q;
  }

  explicit TrackingHistory(int capacity = 20,
                           const Weights& q = default_weights(),
                           double empty_prior = 0.0)
      : capacity_(capacity), q_(q), empty_prior_(empty_prior) {}

  void update(const StateVec& planned, const StateVec& observed) {
    residuals_.push_back(residual(planned, observed));
    if (static_cast<int>(residuals_.size()) > capacity_)
      residuals_.pop_front();
  }

  /// Weighted RMS over the stored samples; divides by the actual sample
  /// count while the buffer fills. Returns the configured prior when empty.
  double tracking_error() const {
    if (residuals_.empty()) return empty_prior_;
    double acc = 0.0;
    for (const auto& r : residuals_) acc += r.dot(q_.cwiseProduct(r));
    return std::sqrt(acc / static_cast<double>(residuals_.size()));
  }

  int size() const { return static_cast<int>(residuals_.size()); }
  int capacity() const { return capacity_; }
  void clear() { residuals_.clear(); }

 private:
  static Eigen::Matrix<double, 9, 1> residual(const StateVec& planned,
                                              const StateVec& observed) {
    Eigen::Matrix<double, 9, 1> r;
    r.segment<3>(0) = observed.pos - planned.pos;
    r.segment<3>(3) = observed.vel - planned.vel;
    r.segment<3>(6) = observed.acc - planned.acc;
    return r;
  }

  int capacity_;
  Weights q_;
  double empty_prior_;
  std::deque<Eigen::Matrix<double, 9, 1>> residuals_;
};

}  // namespace mrnav
