#pragma once

#include "mtmct/types.hpp"

#include <Eigen/Core>

namespace mtmct {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

/// Constant-velocity state over (cx, cy, aspect, height) and their rates.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateCovariance covariance = StateCovariance::Zero();
};

/// Noise standard deviations scale with the box height, as in the
/// DeepSORT/JDE trackers.
struct KalmanNoise {
    double position_weight = 1.0 / 20.0;
    double velocity_weight = 1.0 / 160.0;
    /// Aspect-ratio measurement std (absolute).
    double aspect_measurement_std = 1e-1;
    double aspect_process_std = 1e-2;
    double aspect_velocity_std = 1e-5;

    static KalmanNoise none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

/// Chi-square 0.95 quantile, 4 degrees of freedom.
inline constexpr double kGate4Dof = 9.4877;

MeasurementVector to_measurement(const BBox& box);
BBox to_bbox(const StateVector& mean);

class KalmanFilter {
public:
    explicit KalmanFilter(KalmanNoise noise = {}) : noise_(noise) {}

    KalmanState initiate(const BBox& box) const;
    KalmanState predict(const KalmanState& state) const;
    KalmanState update(const KalmanState& state, const BBox& measurement) const;
    /// Squared Mahalanobis distance of a box under the projected state.
    double gating_distance(const KalmanState& state, const BBox& measurement) const;

    const KalmanNoise& noise() const { return noise_; }

private:
    struct Projection {
        MeasurementVector mean;
        Eigen::Matrix4d covariance;
    };
    Projection project(const KalmanState& state) const;

    KalmanNoise noise_;
};

}  // namespace mtmct
