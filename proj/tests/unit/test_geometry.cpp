#include <doctest.h>

#include "mctrack/errors.hpp"
#include "mctrack/geometry.hpp"
#include "mctrack/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mctrack;
using geometry::Box7;

namespace {

// Membership test in the box's own frame; shares no code with the clipper.
bool inside_footprint(const Box7& b, double px, double py) {
  const double dx = px - b.x, dy = py - b.y;
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  return std::abs(u) <= 0.5 * b.l && std::abs(v) <= 0.5 * b.w;
}

struct Extent {
  double x_min, x_max, y_min, y_max;
};

Extent footprint_extent(const Box7& b) {
  const double c = std::abs(std::cos(b.theta)), s = std::abs(std::sin(b.theta));
  const double hx = 0.5 * (b.l * c + b.w * s), hy = 0.5 * (b.l * s + b.w * c);
  return {b.x - hx, b.x + hx, b.y - hy, b.y + hy};
}

// Samples the intersection of the two bounding rectangles.
double monte_carlo_overlap(const Box7& a, const Box7& b, int samples, std::mt19937_64& rng) {
  const Extent ea = footprint_extent(a), eb = footprint_extent(b);
  const Extent e{std::max(ea.x_min, eb.x_min), std::min(ea.x_max, eb.x_max),
                 std::max(ea.y_min, eb.y_min), std::min(ea.y_max, eb.y_max)};
  if (e.x_min >= e.x_max || e.y_min >= e.y_max) return 0.0;
  std::uniform_real_distribution<double> ux(e.x_min, e.x_max), uy(e.y_min, e.y_max);
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    const double px = ux(rng), py = uy(rng);
    if (inside_footprint(a, px, py) && inside_footprint(b, px, py)) ++hits;
  }
  return (e.x_max - e.x_min) * (e.y_max - e.y_min) * hits / samples;
}

Box7 random_box(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> pos(-spread, spread), size(0.3, 2.0),
      yaw(-std::numbers::pi, std::numbers::pi);
  return Box7{pos(rng), pos(rng), 0.0, size(rng), size(rng), 1.0, yaw(rng)};
}

double overlap(const Box7& a, const Box7& b) {
  return geometry::convex_overlap_area(geometry::bev_polygon(a), geometry::bev_polygon(b));
}

}  // namespace

TEST_CASE("corners follow the half-extent sign pattern") {
  const Box7 b{1.0, 2.0, 3.0, 4.0, 2.0, 6.0, 0.0};
  const auto c = geometry::corners_3d(b);
  CHECK(c.col(0).isApprox(Vec3(3.0, 3.0, 6.0)));
  CHECK(c.col(2).isApprox(Vec3(3.0, 1.0, 0.0)));
  CHECK(c.col(6).isApprox(Vec3(-1.0, 1.0, 0.0)));

  // A quarter turn maps +x onto +y.
  const Box7 r{0.0, 0.0, 0.0, 4.0, 2.0, 2.0, std::numbers::pi / 2};
  CHECK(geometry::corners_3d(r).col(0).isApprox(Vec3(-1.0, 2.0, 1.0)));
}

TEST_CASE("BEV polygon is counter-clockwise with area l*w") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Box7 b = random_box(rng, 10.0);
    const auto poly = geometry::bev_polygon(b);
    CHECK(geometry::signed_area(poly.vertices) == doctest::Approx(b.l * b.w).epsilon(1e-12));
  }
}

TEST_CASE("overlap of a square with its 45-degree rotation is the regular octagon") {
  const Box7 a{0.0, 0.0, 0.0, 2.0, 2.0, 1.0, 0.0};
  const Box7 b{0.0, 0.0, 0.0, 2.0, 2.0, 1.0, std::numbers::pi / 4};
  // Square of side 2 minus four corner triangles with legs 2 - sqrt(2).
  const double leg = 2.0 - std::sqrt(2.0);
  CHECK(overlap(a, b) == doctest::Approx(4.0 - 2.0 * leg * leg).epsilon(1e-12));
}

TEST_CASE("axis-aligned overlaps are exact") {
  const Box7 a{0.0, 0.0, 0.0, 2.0, 2.0, 1.0, 0.0};
  CHECK(overlap(a, Box7{1.0, 0.5, 0.0, 2.0, 2.0, 1.0, 0.0}) == doctest::Approx(1.5));
  CHECK(overlap(a, Box7{5.0, 0.0, 0.0, 2.0, 2.0, 1.0, 0.0}) == 0.0);
  CHECK(overlap(a, Box7{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.3}) == doctest::Approx(1.0));
}

TEST_CASE("overlap agrees with a Monte-Carlo estimate") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const Box7 a = random_box(rng, 1.0);
    const Box7 b = random_box(rng, 1.0);
    const double mc = monte_carlo_overlap(a, b, 200000, rng);
    CHECK(std::abs(overlap(a, b) - mc) < 2e-2);
  }
}

TEST_CASE("Ro_GDIoU anchors") {
  const Box7 a{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
  CHECK(geometry::ro_gdiou(a, a) == 1.0);
  const Box7 rotated{3.0, -2.0, 0.0, 4.2, 1.8, 1.5, 0.7};
  CHECK(geometry::ro_gdiou(rotated, rotated) == 1.0);

  // Unit squares sharing an edge: IoU 0, hull = union, c^2/d^2 = 1/5.
  const Box7 b{1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
  CHECK(std::abs(geometry::ro_gdiou(a, b) + 0.2) < 1e-12);

  // Far apart the score approaches -2.
  const Box7 far{1e4, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
  CHECK(geometry::ro_gdiou(a, far) < -1.99);
}

TEST_CASE("Ro_GDIoU is bounded and bitwise symmetric") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Box7 a = random_box(rng, 3.0);
    const Box7 b = random_box(rng, 3.0);
    const double s = geometry::ro_gdiou(a, b);
    CHECK(s >= -2.0);
    CHECK(s <= 1.0);
    CHECK(s == geometry::ro_gdiou(b, a));
  }
}

TEST_CASE("GIoU equals IoU when one footprint contains the other") {
  const Box7 big{0.0, 0.0, 0.0, 6.0, 4.0, 1.0, 0.4};
  const Box7 small{0.2, -0.1, 0.0, 1.0, 0.5, 1.0, 1.1};
  CHECK(geometry::giou_bev(big, small) == doctest::Approx(geometry::ro_iou(big, small)));
}

TEST_CASE("weights must sum to two") {
  const Box7 a{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(geometry::ro_gdiou(a, a, {1.5, 1.0}), ConfigError);
  CHECK_NOTHROW(geometry::ro_gdiou(a, a, {2.0, 0.0}));
}

TEST_CASE("zero-area footprints are rejected") {
  const Box7 a{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
  const Box7 flat{0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(geometry::ro_gdiou(a, flat), DegenerateBox);
}

TEST_CASE("SDIoU of two 10x10 rectangles offset by 5 px") {
  const geometry::Rect2D a{0.0, 0.0, 10.0, 10.0};
  const geometry::Rect2D b{5.0, 0.0, 15.0, 10.0};
  // IoU 1/3, center term 25/325, no shape term.
  CHECK(geometry::sdiou_rv(a, b) == doctest::Approx(10.0 / 39.0).epsilon(1e-12));
  CHECK(geometry::sdiou_rv(a, a) == 1.0);
}

TEST_CASE("projection through the synthetic front camera") {
  const CameraCalib cam = scenario::synthetic_front_camera();
  const Box7 ahead{20.0, 0.0, 1.5, 4.0, 2.0, 1.0, 0.0};
  const auto rect = geometry::project_box_to_image(ahead, cam);
  REQUIRE(rect.has_value());
  // Centered laterally and vertically (the box center sits at camera height).
  CHECK(rect->center().x() == doctest::Approx(800.0));
  CHECK(rect->center().y() == doctest::Approx(450.0));
  // Nearest face at 18 m, half width 1 m.
  CHECK(rect->width() == doctest::Approx(2.0 * 1000.0 / 18.0));

  const Box7 behind{-20.0, 0.0, 1.5, 4.0, 2.0, 1.0, 0.0};
  CHECK_FALSE(geometry::project_box_to_image(behind, cam).has_value());
}
