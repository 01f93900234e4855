#include "pedtrack/trajectory.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

void symmetrize(Eigen::Matrix4d& m) { m = 0.5 * (m + m.transpose()).eval(); }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

void NoiseConfig::validate() const {
    for (const double v : {q_x, q_y, q_vx, q_vy, r_x, r_y}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("noise variances must be strictly positive");
        }
    }
}

void SmoothingParams::validate() const {
    if (k < 2) throw ConfigError("smoothing.k must be >= 2");
    if (dt < 1) throw ConfigError("smoothing.dt must be >= 1");
    if (heading_coast_limit < 0) throw ConfigError("smoothing.heading_coast_limit must be >= 0");
}

KalmanState KalmanState::initiate(const Vec2& center) {
    KalmanState s;
    s.x << center.x(), center.y(), 0.0, 0.0;
    s.P = Eigen::Vector4d(10.0, 10.0, 100.0, 100.0).asDiagonal();
    return s;
}

KalmanState predict(const KalmanState& state, const NoiseConfig& noise) {
    Eigen::Matrix4d transition = Eigen::Matrix4d::Identity();
    transition(0, 2) = 1.0;
    transition(1, 3) = 1.0;
    const Eigen::Vector4d q(noise.q_x, noise.q_y, noise.q_vx, noise.q_vy);

    KalmanState out;
    out.x = transition * state.x;
    out.P = transition * state.P * transition.transpose();
    out.P.diagonal() += q;
    symmetrize(out.P);
    return out;
}

KalmanState update(const KalmanState& state, const Vec2& z, const NoiseConfig& noise) {
    // H selects the position components, so P H^T is the first two columns of P.
    Eigen::Matrix2d innovation_cov = state.P.topLeftCorner<2, 2>();
    innovation_cov(0, 0) += noise.r_x;
    innovation_cov(1, 1) += noise.r_y;

    const double det = innovation_cov.determinant();
    const double scale = innovation_cov.cwiseAbs().maxCoeff();
    if (!std::isfinite(det) || !(std::abs(det) > 1e-12 * scale * scale)) {
        throw Error("degenerate covariance");
    }

    const Eigen::Matrix<double, 4, 2> gain = state.P.leftCols<2>() * innovation_cov.inverse();
    const Vec2 innovation = z - state.x.head<2>();

    KalmanState out;
    out.x = state.x + gain * innovation;
    out.P = state.P - gain * state.P.topRows<2>();
    symmetrize(out.P);
    return out;
}

std::optional<LineFit> fit_line(std::span<const Vec2> points) {
    if (points.empty()) return std::nullopt;
    Vec2 mean = Vec2::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const Vec2 d = p - mean;
        sxx += d.x() * d.x();
        syy += d.y() * d.y();
        sxy += d.x() * d.y();
    }
    const double tol = 1e-24 * (1.0 + mean.squaredNorm());
    if (sxx + syy <= tol) return std::nullopt;

    LineFit fit;
    if (sxx >= syy) {
        fit.a = sxy / sxx;
        fit.b = mean.y() - fit.a * mean.x();
    } else {
        fit.swapped = true;
        fit.a = sxy / syy;
        fit.b = mean.x() - fit.a * mean.y();
    }
    return fit;
}

Vec2 project_onto_fit(const Vec2& point, const LineFit& fit) {
    const double a = fit.a;
    const double b = fit.b;
    const double denom = a * a + 1.0;
    // Regressor u and response w of the fitted parametrization w = a*u + b.
    const double u = fit.swapped ? point.y() : point.x();
    const double w = fit.swapped ? point.x() : point.y();
    const double pu = (a * w + u - a * b) / denom;
    const double pw = (a * a * w + a * u + b) / denom;
    return fit.swapped ? Vec2(pw, pu) : Vec2(pu, pw);
}

void fit_initial_segment(TrajectoryMemory& memory, const SmoothingParams& params) {
    const auto count = static_cast<std::size_t>(params.k) + 1;
    if (memory.optimal_centers.size() < count || memory.smoothed.size() < count) {
        throw Error("fit_initial_segment needs " + std::to_string(count) + " base points");
    }
    const std::span<const Vec2> base(memory.optimal_centers.data(), count);
    const auto fit = fit_line(base);
    if (!fit) {
        memory.fit_degenerate = true;
        return;
    }
    memory.fit = fit;
    for (std::size_t i = 0; i < count; ++i) {
        memory.smoothed[i] = project_onto_fit(memory.optimal_centers[i], *fit);
    }
}

Vec2 correct_measurement(const TrajectoryMemory& memory, const Vec2& detection, const SmoothingParams& params) {
    if (!params.enabled || memory.hits < params.k) return detection;
    const std::size_t n = memory.smoothed.size();
    const auto lag = static_cast<std::size_t>(params.dt);
    if (n < lag + 1) return detection;

    const Vec2& origin = memory.smoothed[n - 1 - lag];
    const Vec2& anchor = memory.smoothed[n - 1];
    const Vec2 oa = anchor - origin;
    const Vec2 ob = detection - origin;
    const double la = oa.norm();
    const double lb = ob.norm();
    if (la <= 1e-12 || lb <= 1e-12) return detection;

    const double heading = std::atan2(oa.y(), oa.x());
    const double turn = std::atan2(cross(oa, ob), oa.dot(ob));
    const double radius = 0.5 * (la + lb);
    const double angle = heading + 0.5 * turn;
    return origin + radius * Vec2(std::cos(angle), std::sin(angle));
}

std::optional<std::pair<Vec2, Vec2>> heading_anchors(const TrajectoryMemory& memory, const SmoothingParams& params) {
    std::vector<std::size_t> usable;
    usable.reserve(memory.smoothed.size());
    for (std::size_t i = 0; i < memory.smoothed.size(); ++i) {
        const int run = i < memory.coast_run.size() ? memory.coast_run[i] : 0;
        if (run <= params.heading_coast_limit) usable.push_back(i);
    }
    const auto lag = static_cast<std::size_t>(params.dt);
    if (usable.size() < lag + 1) return std::nullopt;
    const std::size_t m = usable.size();
    return std::make_pair(memory.smoothed[usable[m - 1 - lag]], memory.smoothed[usable[m - 1]]);
}

TrajectoryFilter::TrajectoryFilter(const Vec2& first_center, const NoiseConfig& noise, const SmoothingParams& params)
    : noise_(noise), params_(params), state_(KalmanState::initiate(first_center)) {
    memory_.raw_centers.push_back(first_center);
    append(first_center, 0);
}

void TrajectoryFilter::predict() { state_ = pedtrack::predict(state_, noise_); }

Vec2 TrajectoryFilter::observe(const Vec2& detection_center) {
    const Vec2 z = correct_measurement(memory_, detection_center, params_);
    state_ = update(state_, z, noise_);
    memory_.raw_centers.push_back(detection_center);
    ++memory_.hits;
    append(state_.position(), 0);
    if (params_.enabled && memory_.hits == params_.k && !memory_.fit && !memory_.fit_degenerate) {
        fit_initial_segment(memory_, params_);
    }
    return z;
}

void TrajectoryFilter::coast() {
    const int run = memory_.coast_run.empty() ? 1 : memory_.coast_run.back() + 1;
    append(state_.position(), run);
}

void TrajectoryFilter::append(const Vec2& center, int coast_run) {
    memory_.optimal_centers.push_back(center);
    memory_.smoothed.push_back(center);
    memory_.coast_run.push_back(coast_run);
}

}  // namespace pedtrack
