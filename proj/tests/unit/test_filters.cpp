#include <doctest.h>

#include "mctrack/errors.hpp"
#include "mctrack/filters.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <random>

using namespace mctrack;
using namespace mctrack::filters;

namespace {

DetectionBox det_at(double x, double y, double vx, double vy) {
  DetectionBox d;
  d.global_xyz = Vec3(x, y, 0.8);
  d.lwh = Vec3(4.5, 1.9, 1.6);
  d.global_velocity = Vec2(vx, vy);
  d.global_yaw = std::atan2(vy, vx);
  d.global_orientation = yaw_to_quaternion(d.global_yaw);
  return d;
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (!m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

TEST_CASE("discrete white noise closed forms") {
  const double dt = 0.3, q = 2.0;
  Eigen::Matrix2d cv;
  cv << std::pow(dt, 4) / 4, std::pow(dt, 3) / 2, std::pow(dt, 3) / 2, dt * dt;
  CHECK(discrete_white_noise(2, dt, q).isApprox(q * cv, 1e-14));

  const Eigen::Vector3d g(dt * dt / 2, dt, 1.0);
  CHECK(discrete_white_noise(3, dt, q).isApprox(q * g * g.transpose(), 1e-14));
}

TEST_CASE("position predict follows constant-acceleration kinematics") {
  PositionFilterState s;
  s.state << 1.0, 2.0, 3.0, -1.0, 0.5, 0.25;
  const double dt = 0.4;
  const auto p = predict(s, dt, FilterNoise{});
  CHECK(p.state(0) == doctest::Approx(1.0 + 3.0 * dt + 0.5 * 0.5 * dt * dt));
  CHECK(p.state(1) == doctest::Approx(2.0 - 1.0 * dt + 0.5 * 0.25 * dt * dt));
  CHECK(p.state(2) == doctest::Approx(3.0 + 0.5 * dt));
  CHECK(p.state(5) == doctest::Approx(0.25));
  CHECK(is_spd(p.covariance));
}

TEST_CASE("non-positive dt is rejected") {
  const FilterBank bank = init_from_detection(det_at(0, 0, 1, 0), FilterNoise{}, 0.5);
  CHECK_THROWS_AS(predict(bank, 0.0, FilterNoise{}), NonPositiveDt);
  CHECK_THROWS_AS(predict(bank, -0.1, FilterNoise{}), NonPositiveDt);
}

TEST_CASE("Joseph update matches the textbook gain on a position-only observation") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  PositionFilterState s;
  for (int i = 0; i < 6; ++i) s.state(i) = n(rng);
  Eigen::Matrix<double, 6, 6> a;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) a(r, c) = n(rng);
  s.covariance = a * a.transpose() + Mat6x6::Identity();

  FilterNoise noise;
  DetectionBox d = det_at(0.7, -0.3, 0.0, 0.0);
  d.has_velocity = false;

  Eigen::Matrix<double, 2, 6> h = Eigen::Matrix<double, 2, 6>::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  const Eigen::Matrix2d r = noise.position_meas_var * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d innov_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 6, 2> k = s.covariance * h.transpose() * innov_cov.inverse();
  const Vec6 x = s.state + k * (Vec2(0.7, -0.3) - h * s.state);
  const Mat6x6 p = (Mat6x6::Identity() - k * h) * s.covariance;

  const auto u = update(s, d, noise);
  CHECK((u.state - x).norm() < 1e-10);
  CHECK((u.covariance - p).norm() < 1e-9);
}

TEST_CASE("velocity rows are skipped for boxes without velocity") {
  FilterNoise noise;
  PositionFilterState s;
  s.covariance = Mat6x6::Identity();
  DetectionBox with = det_at(0.0, 0.0, 10.0, 0.0);
  DetectionBox without = with;
  without.has_velocity = false;
  CHECK(update(s, with, noise).state(2) > 1.0);
  CHECK(update(s, without, noise).state(2) == doctest::Approx(0.0));
}

TEST_CASE("initialisation copies the detection") {
  const DetectionBox d = det_at(3.0, 4.0, 2.0, 1.0);
  const FilterBank b = init_from_detection(d, FilterNoise{}, 0.5);
  CHECK(b.position.state(0) == 3.0);
  CHECK(b.position.state(3) == 1.0);
  CHECK(b.size.state(0) == 4.5);
  CHECK(b.heading.state(0) == doctest::Approx(std::atan2(1.0, 2.0)));
}

TEST_CASE("heading innovation takes the short way round") {
  CHECK(heading_innovation(3.1, -3.1) == doctest::Approx(2.0 * std::numbers::pi - 6.2));
  CHECK(heading_innovation(-3.1, 3.1) == doctest::Approx(-(2.0 * std::numbers::pi - 6.2)));
  CHECK(heading_innovation(0.2, 0.5) == doctest::Approx(0.3));
}

TEST_CASE("heading update across the pi seam stays near the seam") {
  FilterNoise noise;
  HeadingFilterState s;
  s.state << 3.1, 3.1, 0.0, 0.0;
  DetectionBox d = det_at(0, 0, -1.0, -0.05);
  d.global_yaw = -3.1;
  d.global_orientation = yaw_to_quaternion(d.global_yaw);
  const auto u = update(s, d, noise, 0.5);
  CHECK(std::abs(wrap_angle(u.state(0))) > 3.0);
}

TEST_CASE("velocity heading is gated by speed") {
  CHECK_FALSE(velocity_heading(det_at(0, 0, 0.3, 0.0), 0.5).has_value());
  REQUIRE(velocity_heading(det_at(0, 0, 0.0, 2.0), 0.5).has_value());
  CHECK(*velocity_heading(det_at(0, 0, 0.0, 2.0), 0.5) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("size stays above the floor") {
  FilterNoise noise;
  SizeFilterState s;
  s.state << 0.05, 0.05, -5.0, -5.0;
  const auto p = predict(s, 1.0, noise);
  CHECK(p.state(0) >= kMinSize);
  CHECK(p.state(1) >= kMinSize);
}

TEST_CASE("noise validation") {
  FilterNoise bad;
  bad.position_meas_var = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(FilterNoise{}.validate());
}
