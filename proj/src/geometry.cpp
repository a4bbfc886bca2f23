#include "mctrack/geometry.hpp"

#include "mctrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace mctrack::geometry {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Clipping a convex quad against four half-planes adds at most one vertex per
// plane, so 4 + 4 is the ceiling.
constexpr std::size_t kMaxClipVertices = 8;

struct ClipBuffer {
  std::array<Vec2, kMaxClipVertices + 1> pts;
  std::size_t n = 0;

  void push(const Vec2& p) { pts[n++] = p; }
};

struct Aabb {
  double x_min = std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();

  void add(const Vec2& p) {
    x_min = std::min(x_min, p.x());
    y_min = std::min(y_min, p.y());
    x_max = std::max(x_max, p.x());
    y_max = std::max(y_max, p.y());
  }
};

Aabb bounds_of(const BevPolygon& p) {
  Aabb box;
  for (const auto& v : p.vertices) box.add(v);
  return box;
}

bool disjoint(const Aabb& a, const Aabb& b) {
  return a.x_max <= b.x_min || b.x_max <= a.x_min || a.y_max <= b.y_min || b.y_max <= a.y_min;
}

// Andrew's monotone chain; collinear points are dropped.
double convex_hull_area(std::array<Vec2, 8> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::array<Vec2, 16> hull;
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (int i = static_cast<int>(pts.size()) - 2; i >= 0; --i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  // Last point repeats the first.
  return signed_area(std::span<const Vec2>(hull.data(), k - 1));
}

auto as_tuple(const Box7& b) { return std::tie(b.x, b.y, b.z, b.l, b.w, b.h, b.theta); }

}  // namespace

Box7 box_from_detection(const DetectionBox& det) {
  return Box7{det.global_xyz.x(), det.global_xyz.y(), det.global_xyz.z(), det.lwh.x(),
              det.lwh.y(),        det.lwh.z(),        det.global_yaw};
}

double BevPolygon::area() const { return signed_area(vertices); }

Vec2 BevPolygon::centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& v : vertices) c += v;
  return c / 4.0;
}

void IouWeights::validate() const {
  if (omega1 < 0.0 || omega2 < 0.0 || std::abs(omega1 + omega2 - 2.0) > 1e-9) {
    throw ConfigError("IoU weights must be non-negative and sum to 2");
  }
}

Eigen::Matrix<double, 3, 8> corners_3d(const Box7& box) {
  const double hl = 0.5 * box.l, hw = 0.5 * box.w, hh = 0.5 * box.h;
  Eigen::Matrix<double, 3, 8> p;
  // clang-format off
  p <<  hl,  hl,  hl,  hl, -hl, -hl, -hl, -hl,
        hw, -hw, -hw,  hw,  hw, -hw, -hw,  hw,
        hh,  hh, -hh, -hh,  hh,  hh, -hh, -hh;
  // clang-format on
  const double c = std::cos(box.theta), s = std::sin(box.theta);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return (r * p).colwise() + Vec3(box.x, box.y, box.z);
}

BevPolygon bev_polygon(const Box7& box) {
  const auto c = corners_3d(box);
  BevPolygon poly;
  constexpr std::array<int, 4> kBottomFace = {2, 3, 7, 6};
  for (std::size_t i = 0; i < 4; ++i) {
    poly.vertices[i] = c.col(kBottomFace[i]).head<2>();
  }
  // Already CCW for positive extents; kept as a guard against mirrored input.
  if (poly.area() < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  return poly;
}

double signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

double convex_overlap_area(const BevPolygon& a, const BevPolygon& b) {
  if (disjoint(bounds_of(a), bounds_of(b))) return 0.0;

  ClipBuffer cur;
  for (const auto& v : a.vertices) cur.push(v);

  for (std::size_t e = 0; e < 4 && cur.n > 0; ++e) {
    const Vec2& e0 = b.vertices[e];
    const Vec2 edge = b.vertices[(e + 1) % 4] - e0;
    ClipBuffer next;
    for (std::size_t i = 0; i < cur.n; ++i) {
      const Vec2& p = cur.pts[i];
      const Vec2& q = cur.pts[(i + 1) % cur.n];
      const double dp = cross(edge, p - e0);
      const double dq = cross(edge, q - e0);
      if (dp >= 0.0) next.push(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        if (next.n < kMaxClipVertices) next.push(p + t * (q - p));
      }
    }
    cur = next;
  }
  if (cur.n < 3) return 0.0;
  return std::max(0.0, signed_area(std::span<const Vec2>(cur.pts.data(), cur.n)));
}

BevOverlap bev_overlap(const Box7& first, const Box7& second) {
  // Canonical argument order makes every score exactly symmetric.
  const bool swap = as_tuple(second) < as_tuple(first);
  const Box7& a = swap ? second : first;
  const Box7& b = swap ? first : second;

  const BevPolygon pa = bev_polygon(a);
  const BevPolygon pb = bev_polygon(b);
  const double area_a = pa.area();
  const double area_b = pb.area();
  if (!(area_a > 0.0) || !(area_b > 0.0)) {
    throw DegenerateBox("BEV footprint has zero area");
  }

  BevOverlap out;
  Aabb enclosing = bounds_of(pa);
  for (const auto& v : pb.vertices) enclosing.add(v);
  const double dx = enclosing.x_max - enclosing.x_min;
  const double dy = enclosing.y_max - enclosing.y_min;
  out.enclosing_diag_sq = dx * dx + dy * dy;
  out.center_dist_sq = (a.center_bev() - b.center_bev()).squaredNorm();

  if (pa.vertices == pb.vertices) {
    out.intersection = out.union_area = out.enclosing_area = area_a;
    return out;
  }

  out.intersection = std::min({convex_overlap_area(pa, pb), area_a, area_b});
  out.union_area = area_a + area_b - out.intersection;
  std::array<Vec2, 8> all;
  std::copy(pa.vertices.begin(), pa.vertices.end(), all.begin());
  std::copy(pb.vertices.begin(), pb.vertices.end(), all.begin() + 4);
  out.enclosing_area = std::max(convex_hull_area(all), out.union_area);
  return out;
}

double ro_iou(const Box7& a, const Box7& b) { return bev_overlap(a, b).iou(); }

double ro_gdiou(const Box7& a, const Box7& b, const IouWeights& weights) {
  weights.validate();
  const BevOverlap o = bev_overlap(a, b);
  return o.iou() - weights.omega1 * o.giou_penalty() - weights.omega2 * o.diou_penalty();
}

double giou_bev(const Box7& a, const Box7& b) {
  const BevOverlap o = bev_overlap(a, b);
  return o.iou() - o.giou_penalty();
}

double diou_bev(const Box7& a, const Box7& b) {
  const BevOverlap o = bev_overlap(a, b);
  return o.iou() - o.diou_penalty();
}

double sdiou_rv(const Rect2D& a, const Rect2D& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;

  const double ex_min = std::min(a.x_min, b.x_min), ex_max = std::max(a.x_max, b.x_max);
  const double ey_min = std::min(a.y_min, b.y_min), ey_max = std::max(a.y_max, b.y_max);
  const double wc = ex_max - ex_min, hc = ey_max - ey_min;
  const double diag_sq = wc * wc + hc * hc;
  if (diag_sq == 0.0) return 1.0;  // both collapse to the same pixel

  const double iou = uni > 0.0 ? inter / uni : 0.0;
  const double center = (a.center() - b.center()).squaredNorm() / diag_sq;
  const double dw = a.width() - b.width(), dh = a.height() - b.height();
  const double shape = (dw * dw + dh * dh) / diag_sq;
  return iou - center - shape;
}

std::optional<Rect2D> project_box_to_image(const Box7& box, const CameraCalib& calib) {
  const Eigen::Matrix3d rot = calib.global_to_camera.topLeftCorner<3, 3>();
  const Vec3 trans = calib.global_to_camera.topRightCorner<3, 1>();

  const Vec3 center_cam = rot * Vec3(box.x, box.y, box.z) + trans;
  if (center_cam.z() <= 0.0) return std::nullopt;

  constexpr double kNearPlane = 1e-3;
  const auto corners = corners_3d(box);
  Rect2D r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  int projected = 0;
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = rot * corners.col(i) + trans;
    if (p.z() <= kNearPlane) continue;
    const double u = calib.fx() * p.x() / p.z() + calib.cx();
    const double v = calib.fy() * p.y() / p.z() + calib.cy();
    r.x_min = std::min(r.x_min, u);
    r.x_max = std::max(r.x_max, u);
    r.y_min = std::min(r.y_min, v);
    r.y_max = std::max(r.y_max, v);
    ++projected;
  }
  if (projected == 0) return std::nullopt;

  const double w = calib.image_width, h = calib.image_height;
  if (r.x_max < 0.0 || r.x_min > w || r.y_max < 0.0 || r.y_min > h) return std::nullopt;
  r.x_min = std::clamp(r.x_min, 0.0, w);
  r.x_max = std::clamp(r.x_max, 0.0, w);
  r.y_min = std::clamp(r.y_min, 0.0, h);
  r.y_max = std::clamp(r.y_max, 0.0, h);
  return r;
}

}  // namespace mctrack::geometry
