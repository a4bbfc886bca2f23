#pragma once

#include "mctrack/types.hpp"

#include <array>
#include <optional>
#include <span>

namespace mctrack::geometry {

/// Oriented 3D box: center, extents along the body axes, yaw about +z.
struct Box7 {
  double x = 0.0, y = 0.0, z = 0.0;
  double l = 1.0, w = 1.0, h = 1.0;
  double theta = 0.0;

  Vec2 center_bev() const { return {x, y}; }
};

Box7 box_from_detection(const DetectionBox& det);

/// Four BEV vertices, counter-clockwise.
struct BevPolygon {
  std::array<Vec2, 4> vertices;

  double area() const;
  Vec2 centroid() const;
};

/// Axis-aligned image rectangle in pixels. Degenerate (zero-width) rects are
/// allowed because point-like boxes project to a single pixel.
struct Rect2D {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
};

/// Weights on the enclosing-area and center-distance penalties. Must sum to 2.
struct IouWeights {
  double omega1 = 1.0;
  double omega2 = 1.0;

  void validate() const;
};

/// The 8 corners as columns of R * P + T, with P the half-extent sign
/// pattern (+l: 0..3, -l: 4..7; +w: 0,3,4,7; +h: 0,1,4,5).
Eigen::Matrix<double, 3, 8> corners_3d(const Box7& box);

/// xy of corners 2, 3, 7, 6 (the bottom face), counter-clockwise.
BevPolygon bev_polygon(const Box7& box);

/// Signed shoelace area, positive for counter-clockwise input.
double signed_area(std::span<const Vec2> poly);

/// Intersection area of two convex polygons by half-plane clipping.
double convex_overlap_area(const BevPolygon& a, const BevPolygon& b);

/// The intermediate quantities shared by every IoU-family score.
struct BevOverlap {
  double intersection = 0.0;
  double union_area = 0.0;
  double enclosing_area = 0.0;      // convex hull of both polygons
  double center_dist_sq = 0.0;
  double enclosing_diag_sq = 0.0;   // of the axis-aligned rect around both

  double iou() const { return intersection / union_area; }
  double giou_penalty() const { return (enclosing_area - union_area) / enclosing_area; }
  double diou_penalty() const { return center_dist_sq / enclosing_diag_sq; }
};

/// Throws DegenerateBox when either footprint has zero area.
BevOverlap bev_overlap(const Box7& a, const Box7& b);

double ro_iou(const Box7& a, const Box7& b);

/// Rotated IoU minus weighted GIoU and DIoU penalties, in [-2, 1].
double ro_gdiou(const Box7& a, const Box7& b, const IouWeights& weights = {});

double giou_bev(const Box7& a, const Box7& b);
double diou_bev(const Box7& a, const Box7& b);

/// Image-plane IoU with center-distance and shape-difference penalties.
double sdiou_rv(const Rect2D& a, const Rect2D& b);

/// Projects the box through a pinhole camera. Returns nullopt when the center
/// is not in front of the camera or the projection misses the image.
std::optional<Rect2D> project_box_to_image(const Box7& box, const CameraCalib& calib);

}  // namespace mctrack::geometry
