#pragma once

#include "mctrack/category_table.hpp"
#include "mctrack/types.hpp"

#include <Eigen/Core>

namespace mctrack::filters {

using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat4x4 = Eigen::Matrix4d;
using Mat6x6 = Eigen::Matrix<double, 6, 6>;

/// {x, y, v_x, v_y, a_x, a_y} under a constant-acceleration model.
struct PositionFilterState {
  Vec6 state = Vec6::Zero();
  Mat6x6 covariance = Mat6x6::Identity();
};

/// {l, w, v_l, v_w} under a constant-velocity model.
struct SizeFilterState {
  Vec4 state = Vec4::Zero();
  Mat4x4 covariance = Mat4x4::Identity();
};

/// {theta_p, theta_v, omega_p, omega_v}. theta_p is the perceived heading,
/// theta_v the heading of the velocity vector.
struct HeadingFilterState {
  Vec4 state = Vec4::Zero();
  Mat4x4 covariance = Mat4x4::Identity();
};

struct FilterBank {
  PositionFilterState position;
  SizeFilterState size;
  HeadingFilterState heading;
};

/// Noise settings for one object category. Process terms are the variance of
/// the highest modelled derivative per unit step (discrete Wiener model).
struct FilterNoise {
  double position_process = 1.0;
  double position_meas_var = 0.1;
  double velocity_meas_var = 0.5;
  double position_init_var = 1.0;
  double velocity_init_var = 1.0;
  double velocity_unobserved_init_var = 100.0;
  double acceleration_init_var = 10.0;

  double size_process = 1e-4;
  double size_meas_var = 1.0;
  double size_init_var = 1.0;
  double size_rate_init_var = 0.01;

  double heading_process = 0.1;
  double heading_meas_var = 0.05;
  double heading_velocity_meas_var = 0.2;
  double heading_init_var = 0.1;
  double heading_rate_init_var = 1.0;

  void validate() const;
};

struct NoiseConfig {
  CategoryTable<FilterNoise> noise;
  // Below this speed the velocity heading observation is dropped.
  double v_min = 0.5;

  static NoiseConfig defaults();
  const FilterNoise& for_category(const std::string& c) const { return noise.at(c); }
};

/// Lower bound applied to filtered length and width.
inline constexpr double kMinSize = 1e-2;

FilterBank init_from_detection(const DetectionBox& det, const FilterNoise& noise, double v_min);

PositionFilterState predict(const PositionFilterState& s, double dt, const FilterNoise& noise);
SizeFilterState predict(const SizeFilterState& s, double dt, const FilterNoise& noise);
HeadingFilterState predict(const HeadingFilterState& s, double dt, const FilterNoise& noise);
/// Throws NonPositiveDt when dt <= 0.
FilterBank predict(const FilterBank& bank, double dt, const FilterNoise& noise);

PositionFilterState update(const PositionFilterState& s, const DetectionBox& det,
                           const FilterNoise& noise);
SizeFilterState update(const SizeFilterState& s, const DetectionBox& det,
                       const FilterNoise& noise);
HeadingFilterState update(const HeadingFilterState& s, const DetectionBox& det,
                          const FilterNoise& noise, double v_min);
FilterBank update(const FilterBank& bank, const DetectionBox& det, const FilterNoise& noise,
                  double v_min);

/// Velocity heading observation of a detection, if its speed passes the gate.
std::optional<double> velocity_heading(const DetectionBox& det, double v_min);

/// Shortest signed angular difference measured - predicted, in (-pi, pi].
double heading_innovation(double predicted, double measured);

/// Discrete white-noise process covariance for one axis of an order-`dim`
/// kinematic chain (dim 2: CV, dim 3: CA).
Eigen::MatrixXd discrete_white_noise(int dim, double dt, double variance);

}  // namespace mctrack::filters
