#include "mctrack/filters.hpp"

#include "mctrack/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace mctrack::filters {

namespace {

template <int N>
using StateVec = Eigen::Matrix<double, N, 1>;
template <int N>
using StateMat = Eigen::Matrix<double, N, N>;

template <int N>
void symmetrize(StateMat<N>& p) {
  p = 0.5 * (p + p.transpose()).eval();
}

// Joseph-form update. `innovation` is supplied by the caller so angular
// filters can wrap it first.
template <int N>
void kalman_update(StateVec<N>& x, StateMat<N>& p, const Eigen::MatrixXd& h,
                   const Eigen::VectorXd& innovation, const Eigen::MatrixXd& r) {
  const Eigen::MatrixXd s = h * p * h.transpose() + r;
  const Eigen::MatrixXd k = s.ldlt().solve(h * p).transpose();
  x += k * innovation;
  const StateMat<N> ikh = StateMat<N>::Identity() - k * h;
  p = ikh * p * ikh.transpose() + k * r * k.transpose();
  symmetrize<N>(p);
}

void check_dt(double dt) {
  if (!(dt > 0.0)) throw NonPositiveDt("predict requires dt > 0, got " + std::to_string(dt));
}

// Constant-velocity transition for a state laid out as {q_0..q_{k-1}, rate_0..rate_{k-1}}.
template <int N>
void predict_cv(StateVec<N>& x, StateMat<N>& p, double dt, double process) {
  constexpr int k = N / 2;
  StateMat<N> f = StateMat<N>::Identity();
  f.template topRightCorner<k, k>() = Eigen::Matrix<double, k, k>::Identity() * dt;
  const Eigen::MatrixXd q1 = discrete_white_noise(2, dt, process);
  StateMat<N> q = StateMat<N>::Zero();
  for (int i = 0; i < k; ++i) {
    q(i, i) = q1(0, 0);
    q(i, i + k) = q1(0, 1);
    q(i + k, i) = q1(1, 0);
    q(i + k, i + k) = q1(1, 1);
  }
  x = f * x;
  p = f * p * f.transpose() + q;
  symmetrize<N>(p);
}

}  // namespace

void FilterNoise::validate() const {
  const double vals[] = {position_process,    position_meas_var,    velocity_meas_var,
                         position_init_var,   velocity_init_var,    velocity_unobserved_init_var,
                         acceleration_init_var, size_process,       size_meas_var,
                         size_init_var,       size_rate_init_var,   heading_process,
                         heading_meas_var,    heading_velocity_meas_var, heading_init_var,
                         heading_rate_init_var};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("noise variances must be > 0");
  }
}

NoiseConfig NoiseConfig::defaults() {
  NoiseConfig cfg;
  FilterNoise ped;
  ped.position_process = 0.5;
  ped.position_meas_var = 0.05;
  ped.velocity_meas_var = 0.3;
  ped.size_meas_var = 0.25;
  ped.heading_process = 0.5;
  ped.heading_meas_var = 0.2;
  ped.heading_velocity_meas_var = 0.5;
  for (const char* c : {"pedestrian", "bicycle", "motorcycle", "cyclist"}) cfg.noise.set(c, ped);
  return cfg;
}

Eigen::MatrixXd discrete_white_noise(int dim, double dt, double variance) {
  Eigen::MatrixXd q(dim, dim);
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
  if (dim == 2) {
    q << 0.25 * dt4, 0.5 * dt3,  //
        0.5 * dt3, dt2;
  } else if (dim == 3) {
    q << 0.25 * dt4, 0.5 * dt3, 0.5 * dt2,  //
        0.5 * dt3, dt2, dt,                  //
        0.5 * dt2, dt, 1.0;
  } else {
    throw std::invalid_argument("discrete_white_noise supports dim 2 or 3");
  }
  return q * variance;
}

std::optional<double> velocity_heading(const DetectionBox& det, double v_min) {
  if (!det.has_velocity || det.global_velocity.norm() < v_min) return std::nullopt;
  return std::atan2(det.global_velocity.y(), det.global_velocity.x());
}

double heading_innovation(double predicted, double measured) {
  return wrap_angle(measured - predicted);
}

FilterBank init_from_detection(const DetectionBox& det, const FilterNoise& noise, double v_min) {
  FilterBank bank;

  auto& pos = bank.position;
  const Vec2 v = det.has_velocity ? det.global_velocity : Vec2::Zero();
  pos.state << det.global_xyz.x(), det.global_xyz.y(), v.x(), v.y(), 0.0, 0.0;
  const double vel_var =
      det.has_velocity ? noise.velocity_init_var : noise.velocity_unobserved_init_var;
  pos.covariance = Vec6(noise.position_init_var, noise.position_init_var, vel_var, vel_var,
                        noise.acceleration_init_var, noise.acceleration_init_var)
                       .asDiagonal();

  auto& size = bank.size;
  size.state << std::max(det.lwh.x(), kMinSize), std::max(det.lwh.y(), kMinSize), 0.0, 0.0;
  size.covariance =
      Vec4(noise.size_init_var, noise.size_init_var, noise.size_rate_init_var,
           noise.size_rate_init_var)
          .asDiagonal();

  auto& head = bank.heading;
  const double theta_p = wrap_angle(det.global_yaw);
  const double theta_v = velocity_heading(det, v_min).value_or(theta_p);
  head.state << theta_p, theta_v, 0.0, 0.0;
  head.covariance = Vec4(noise.heading_init_var, noise.heading_init_var,
                         noise.heading_rate_init_var, noise.heading_rate_init_var)
                        .asDiagonal();
  return bank;
}

PositionFilterState predict(const PositionFilterState& s, double dt, const FilterNoise& noise) {
  check_dt(dt);
  PositionFilterState out = s;
  Mat6x6 f = Mat6x6::Identity();
  const double half_dt2 = 0.5 * dt * dt;
  for (int axis = 0; axis < 2; ++axis) {
    f(axis, 2 + axis) = dt;
    f(axis, 4 + axis) = half_dt2;
    f(2 + axis, 4 + axis) = dt;
  }
  const Eigen::MatrixXd q1 = discrete_white_noise(3, dt, noise.position_process);
  Mat6x6 q = Mat6x6::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) q(axis + 2 * i, axis + 2 * j) = q1(i, j);
    }
  }
  out.state = f * s.state;
  out.covariance = f * s.covariance * f.transpose() + q;
  symmetrize<6>(out.covariance);
  return out;
}

SizeFilterState predict(const SizeFilterState& s, double dt, const FilterNoise& noise) {
  check_dt(dt);
  SizeFilterState out = s;
  predict_cv<4>(out.state, out.covariance, dt, noise.size_process);
  out.state(0) = std::max(out.state(0), kMinSize);
  out.state(1) = std::max(out.state(1), kMinSize);
  return out;
}

HeadingFilterState predict(const HeadingFilterState& s, double dt, const FilterNoise& noise) {
  check_dt(dt);
  HeadingFilterState out = s;
  predict_cv<4>(out.state, out.covariance, dt, noise.heading_process);
  out.state(0) = wrap_angle(out.state(0));
  out.state(1) = wrap_angle(out.state(1));
  return out;
}

FilterBank predict(const FilterBank& bank, double dt, const FilterNoise& noise) {
  return {predict(bank.position, dt, noise), predict(bank.size, dt, noise),
          predict(bank.heading, dt, noise)};
}

PositionFilterState update(const PositionFilterState& s, const DetectionBox& det,
                           const FilterNoise& noise) {
  PositionFilterState out = s;
  const int m = det.has_velocity ? 4 : 2;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, 6);
  Eigen::VectorXd z(m);
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) h(i, i) = 1.0;
  z(0) = det.global_xyz.x();
  z(1) = det.global_xyz.y();
  r(0) = r(1) = noise.position_meas_var;
  if (det.has_velocity) {
    z(2) = det.global_velocity.x();
    z(3) = det.global_velocity.y();
    r(2) = r(3) = noise.velocity_meas_var;
  }
  const Eigen::VectorXd innovation = z - h * s.state;
  kalman_update<6>(out.state, out.covariance, h, innovation, r.asDiagonal());
  return out;
}

SizeFilterState update(const SizeFilterState& s, const DetectionBox& det,
                       const FilterNoise& noise) {
  SizeFilterState out = s;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 4);
  h(0, 0) = h(1, 1) = 1.0;
  const Eigen::Vector2d z(det.lwh.x(), det.lwh.y());
  const Eigen::VectorXd innovation = z - h * s.state;
  const Eigen::MatrixXd r = Eigen::Vector2d::Constant(noise.size_meas_var).asDiagonal();
  kalman_update<4>(out.state, out.covariance, h, innovation, r);
  out.state(0) = std::max(out.state(0), kMinSize);
  out.state(1) = std::max(out.state(1), kMinSize);
  return out;
}

HeadingFilterState update(const HeadingFilterState& s, const DetectionBox& det,
                          const FilterNoise& noise, double v_min) {
  HeadingFilterState out = s;
  const auto theta_v = velocity_heading(det, v_min);
  const int m = theta_v ? 2 : 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, 4);
  Eigen::VectorXd innovation(m);
  Eigen::VectorXd r(m);
  h(0, 0) = 1.0;
  innovation(0) = heading_innovation(s.state(0), det.global_yaw);
  r(0) = noise.heading_meas_var;
  if (theta_v) {
    h(1, 1) = 1.0;
    innovation(1) = heading_innovation(s.state(1), *theta_v);
    r(1) = noise.heading_velocity_meas_var;
  }
  kalman_update<4>(out.state, out.covariance, h, innovation, r.asDiagonal());
  out.state(0) = wrap_angle(out.state(0));
  out.state(1) = wrap_angle(out.state(1));
  return out;
}

FilterBank update(const FilterBank& bank, const DetectionBox& det, const FilterNoise& noise,
                  double v_min) {
  return {update(bank.position, det, noise), update(bank.size, det, noise),
          update(bank.heading, det, noise, v_min)};
}

}  // namespace mctrack::filters
