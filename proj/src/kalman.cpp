#include "mtmct/kalman.hpp"

#include <Eigen/Cholesky>

namespace mtmct {

namespace {

constexpr double kInnovationJitter = 1e-9;

Eigen::Matrix<double, 8, 8> transition() {
    Eigen::Matrix<double, 8, 8> f = Eigen::Matrix<double, 8, 8>::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

}  // namespace

MeasurementVector to_measurement(const BBox& box) {
    MeasurementVector z;
    z << box.x + box.w / 2.0, box.y + box.h / 2.0, box.w / box.h, box.h;
    return z;
}

BBox to_bbox(const StateVector& mean) {
    const double h = mean[3];
    const double w = mean[2] * h;
    return {mean[0] - w / 2.0, mean[1] - h / 2.0, w, h};
}

KalmanState KalmanFilter::initiate(const BBox& box) const {
    KalmanState s;
    s.mean.head<4>() = to_measurement(box);
    const double h = box.h;
    const double p = 2.0 * noise_.position_weight * h;
    const double v = 10.0 * noise_.velocity_weight * h;
    StateVector std;
    std << p, p, 1e-2, p, v, v, 1e-5, v;
    s.covariance = std.array().square().matrix().asDiagonal();
    return s;
}

KalmanState KalmanFilter::predict(const KalmanState& state) const {
    static const auto f = transition();
    const double h = state.mean[3];
    const double p = noise_.position_weight * h;
    const double v = noise_.velocity_weight * h;
    StateVector std;
    std << p, p, noise_.aspect_process_std, p, v, v, noise_.aspect_velocity_std, v;
    KalmanState out;
    out.mean = f * state.mean;
    out.covariance = f * state.covariance * f.transpose();
    out.covariance.diagonal() += std.array().square().matrix();
    return out;
}

KalmanFilter::Projection KalmanFilter::project(const KalmanState& state) const {
    const double p = noise_.position_weight * state.mean[3];
    MeasurementVector std;
    std << p, p, noise_.aspect_measurement_std, p;
    Projection proj;
    proj.mean = state.mean.head<4>();
    proj.covariance = state.covariance.topLeftCorner<4, 4>();
    proj.covariance.diagonal() += std.array().square().matrix();
    proj.covariance.diagonal().array() += kInnovationJitter;
    return proj;
}

KalmanState KalmanFilter::update(const KalmanState& state, const BBox& measurement) const {
    const auto proj = project(state);
    const Eigen::LDLT<Eigen::Matrix4d> solver(proj.covariance);
    // K = P H^T S^-1 with H selecting the first four state components.
    const Eigen::Matrix<double, 8, 4> pht = state.covariance.leftCols<4>();
    const Eigen::Matrix<double, 8, 4> gain = solver.solve(pht.transpose()).transpose();
    const MeasurementVector innovation = to_measurement(measurement) - proj.mean;

    KalmanState out;
    out.mean = state.mean + gain * innovation;
    out.covariance = state.covariance - gain * proj.covariance * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

double KalmanFilter::gating_distance(const KalmanState& state, const BBox& measurement) const {
    const auto proj = project(state);
    const MeasurementVector d = to_measurement(measurement) - proj.mean;
    const Eigen::LDLT<Eigen::Matrix4d> solver(proj.covariance);
    return d.dot(solver.solve(d));
}

}  // namespace mtmct
