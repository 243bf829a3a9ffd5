#pragma once

// Geometric half of the panel-detection pipeline: RANSAC plane fitting,
// inlier masking, connected-component filtering, four-corner extraction,
// drone->world transforms and the bridge into SurfaceModel.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <unordered_map>
#include <vector>

#include "pvcoat/dynamics.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/geometry.hpp"
#include "pvcoat/surface.hpp"

namespace pvcoat {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;  // drone frame unless stated otherwise
  std::vector<std::uint8_t> valid;      // optional; empty means all valid

  bool is_valid(std::size_t i) const {
    return (valid.empty() || valid[i]) && points[i].allFinite();
  }

  std::vector<std::size_t> valid_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (is_valid(i)) idx.push_back(i);
    }
    return idx;
  }
};

// Plane n . x = d with |n| = 1.
struct PlaneModel {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double offset = 0.0;            // d
  double inlier_threshold = 0.01; // m

  double distance(const Eigen::Vector3d& p) const {
    return normal.dot(p) - offset;
  }
};

namespace detail {

// Deterministic sign convention so fitted planes compare cleanly.
inline void canonicalize(Eigen::Vector3d& n, double& d) {
  double s = 0.0;
  if (std::abs(n.z()) > 1e-12) {
    s = n.z();
  } else if (std::abs(n.x()) > 1e-12) {
    s = n.x();
  } else {
    s = n.y();
  }
  if (s < 0.0) {
    n = -n;
    d = -d;
  }
}

inline PlaneModel least_squares_plane(const std::vector<Eigen::Vector3d>& pts,
                                      double epsilon) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d q = p - centroid;
    scatter += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  Eigen::Vector3d n = es.eigenvectors().col(0);  // smallest eigenvalue
  n.normalize();
  double d = n.dot(centroid);
  canonicalize(n, d);
  return PlaneModel{n, d, epsilon};
}

}  // namespace detail

struct RansacResult {
  PlaneModel plane;
  std::vector<std::uint8_t> inlier_mask;  // per input point
  std::size_t inlier_count = 0;
};

// Best-consensus plane by inlier count (ties: lower mean inlier residual,
// then earlier iteration), refit on its inliers by least squares.
// Bit-reproducible for a fixed seed.
inline RansacResult ransac_plane_fit(const PointCloud& cloud, double epsilon,
                                     int iterations, std::uint64_t seed) {
  if (epsilon <= 0.0) throw ConfigError("inlier threshold must be positive");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  const auto idx = cloud.valid_indices();
  if (idx.size() < 3) throw DegenerateCloud("need at least 3 valid points");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);

  struct Best {
    std::size_t count = 0;
    double mean_residual = std::numeric_limits<double>::infinity();
    Eigen::Vector3d normal;
    double offset = 0.0;
    bool found = false;
  } best;

  auto consider = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Eigen::Vector3d& c) {
    Eigen::Vector3d n = (b - a).cross(c - a);
    const double nn = n.norm();
    if (nn < 1e-12) return;  // collinear sample
    n /= nn;
    double d = n.dot(a);
    detail::canonicalize(n, d);
    std::size_t count = 0;
    double abs_sum = 0.0;
    for (const auto i : idx) {
      const double r = std::abs(n.dot(cloud.points[i]) - d);
      if (r <= epsilon) {
        ++count;
        abs_sum += r;
      }
    }
    if (count == 0) return;
    const double mean_res = abs_sum / static_cast<double>(count);
    if (count > best.count ||
        (count == best.count && mean_res < best.mean_residual)) {
      best = {count, mean_res, n, d, true};
    }
  };

  for (int it = 0; it < iterations; ++it) {
    const std::size_t i = idx[pick(rng)];
    const std::size_t j = idx[pick(rng)];
    const std::size_t k = idx[pick(rng)];
    if (i == j || j == k || i == k) continue;
    consider(cloud.points[i], cloud.points[j], cloud.points[k]);
  }

  if (!best.found) {
    // random sampling found nothing usable; deterministic scan to decide
    // between an unlucky draw and a genuinely degenerate cloud
    for (std::size_t a = 0; a < idx.size() && !best.found; ++a) {
      for (std::size_t b = a + 1; b < idx.size() && !best.found; ++b) {
        for (std::size_t c = b + 1; c < idx.size() && !best.found; ++c) {
          consider(cloud.points[idx[a]], cloud.points[idx[b]],
                   cloud.points[idx[c]]);
        }
      }
    }
    if (!best.found) throw DegenerateCloud("no 3 non-collinear points");
  }

  // least-squares refit on the consensus set, then final mask
  std::vector<Eigen::Vector3d> inlier_pts;
  inlier_pts.reserve(best.count);
  for (const auto i : idx) {
    if (std::abs(best.normal.dot(cloud.points[i]) - best.offset) <= epsilon) {
      inlier_pts.push_back(cloud.points[i]);
    }
  }
  RansacResult result;
  result.plane = detail::least_squares_plane(inlier_pts, epsilon);
  result.inlier_mask.assign(cloud.points.size(), 0);
  for (const auto i : idx) {
    if (std::abs(result.plane.distance(cloud.points[i])) <= epsilon) {
      result.inlier_mask[i] = 1;
      ++result.inlier_count;
    }
  }
  return result;
}

// Four extreme panel corners, ordered CCW about the plane normal.
struct PanelCorners {
  std::array<Eigen::Vector3d, 4> corners;
};

enum class CornerMethod {
  kMinAreaRect,   // min-area-rectangle vertices snapped to nearest inlier
  kAxisExtremes,  // extreme points along the plane basis axes
};

namespace detail {

struct PlaneBasis {
  Eigen::Vector3d origin, b1, b2, normal;

  geom::Vec2 project(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d q = p - origin;
    return {q.dot(b1), q.dot(b2)};
  }
};

inline PlaneBasis plane_basis(const PlaneModel& plane) {
  PlaneBasis basis;
  basis.normal = plane.normal;
  basis.origin = plane.offset * plane.normal;
  const Eigen::Vector3d seed = std::abs(plane.normal.x()) < 0.9
                                   ? Eigen::Vector3d::UnitX()
                                   : Eigen::Vector3d::UnitY();
  basis.b1 = (seed - seed.dot(plane.normal) * plane.normal).normalized();
  basis.b2 = plane.normal.cross(basis.b1);
  return basis;
}

// Indices of the largest 8-connected grid component (cell size = cell).
inline std::vector<std::size_t> largest_grid_component(
    const std::vector<geom::Vec2>& pts, double cell) {
  const auto key = [&](const geom::Vec2& p) -> std::int64_t {
    const auto cx = static_cast<std::int64_t>(std::floor(p.x() / cell));
    const auto cy = static_cast<std::int64_t>(std::floor(p.y() / cell));
    return (cx << 32) ^ (cy & 0xffffffffLL);
  };
  const auto cell_xy = [&](const geom::Vec2& p) {
    return std::pair<std::int64_t, std::int64_t>(
        static_cast<std::int64_t>(std::floor(p.x() / cell)),
        static_cast<std::int64_t>(std::floor(p.y() / cell)));
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < pts.size(); ++i) grid[key(pts[i])].push_back(i);

  std::unordered_map<std::int64_t, int> label;
  label.reserve(grid.size());
  std::vector<std::vector<std::int64_t>> comp_cells;
  // scan points in index order so component discovery is deterministic
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::int64_t k0 = key(pts[i]);
    if (label.count(k0)) continue;
    const int comp = static_cast<int>(comp_cells.size());
    comp_cells.emplace_back();
    std::vector<std::pair<std::int64_t, std::int64_t>> stack{cell_xy(pts[i])};
    label[k0] = comp;
    comp_cells[comp].push_back(k0);
    while (!stack.empty()) {
      const auto [cx, cy] = stack.back();
      stack.pop_back();
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          const std::int64_t nk = ((cx + dx) << 32) ^ ((cy + dy) & 0xffffffffLL);
          if (grid.count(nk) && !label.count(nk)) {
            label[nk] = comp;
            comp_cells[comp].push_back(nk);
            stack.emplace_back(cx + dx, cy + dy);
          }
        }
      }
    }
  }

  std::vector<std::size_t> comp_size(comp_cells.size(), 0);
  for (std::size_t c = 0; c < comp_cells.size(); ++c) {
    for (const auto k : comp_cells[c]) comp_size[c] += grid[k].size();
  }
  const std::size_t best =
      std::distance(comp_size.begin(),
                    std::max_element(comp_size.begin(), comp_size.end()));
  std::vector<std::size_t> out;
  out.reserve(comp_size[best]);
  for (const auto k : comp_cells[best]) {
    for (const auto i : grid[k]) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// CCW ordering (about the plane normal used for projection), starting at
// the corner with the smallest angle for determinism.
inline void order_ccw(std::array<Eigen::Vector3d, 4>& corners,
                      const PlaneBasis& basis) {
  geom::Vec2 centroid(0.0, 0.0);
  std::array<geom::Vec2, 4> p2;
  for (int i = 0; i < 4; ++i) {
    p2[i] = basis.project(corners[i]);
    centroid += p2[i];
  }
  centroid *= 0.25;
  std::array<int, 4> order{0, 1, 2, 3};
  std::array<double, 4> ang;
  for (int i = 0; i < 4; ++i) {
    ang[i] = std::atan2(p2[i].y() - centroid.y(), p2[i].x() - centroid.x());
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ang[a] < ang[b]; });
  const std::array<Eigen::Vector3d, 4> tmp = corners;
  for (int i = 0; i < 4; ++i) corners[i] = tmp[order[i]];
}

}  // namespace detail

// Extracts the panel's four extreme points from the plane inliers. Keeps
// only the largest connected component (grid connectivity at cell size
// 2*epsilon) before taking the min-area-rectangle vertices snapped to the
// nearest inlier. Exactly four inliers are their own corners and bypass
// the component filter.
inline PanelCorners extract_corners(const PointCloud& inliers,
                                    const PlaneModel& plane,
                                    CornerMethod method = CornerMethod::kMinAreaRect) {
  const auto idx = inliers.valid_indices();
  if (idx.size() < 4) throw TooFewPoints("corner extraction needs >= 4 inliers");

  const auto basis = detail::plane_basis(plane);
  std::vector<geom::Vec2> p2;
  p2.reserve(idx.size());
  for (const auto i : idx) p2.push_back(basis.project(inliers.points[i]));

  std::vector<std::size_t> comp(p2.size());
  if (idx.size() == 4) {
    comp = {0, 1, 2, 3};
  } else {
    comp = detail::largest_grid_component(p2, 2.0 * plane.inlier_threshold);
    if (2 * comp.size() < idx.size()) {
      throw FragmentedCloud("largest component holds under half the inliers");
    }
  }

  std::array<std::size_t, 4> chosen{};
  if (method == CornerMethod::kMinAreaRect) {
    std::vector<geom::Vec2> comp_pts;
    comp_pts.reserve(comp.size());
    for (const auto c : comp) comp_pts.push_back(p2[c]);
    const auto rect = geom::min_area_rect(comp_pts);
    const auto rect_corners = rect.corners();
    for (int k = 0; k < 4; ++k) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_i = comp[0];
      for (const auto c : comp) {
        const double d2 = (p2[c] - rect_corners[k]).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_i = c;
        }
      }
      chosen[k] = best_i;
    }
  } else {
    std::array<double, 4> extreme{std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity()};
    for (const auto c : comp) {
      if (p2[c].x() < extreme[0]) { extreme[0] = p2[c].x(); chosen[0] = c; }
      if (p2[c].x() > extreme[1]) { extreme[1] = p2[c].x(); chosen[1] = c; }
      if (p2[c].y() < extreme[2]) { extreme[2] = p2[c].y(); chosen[2] = c; }
      if (p2[c].y() > extreme[3]) { extreme[3] = p2[c].y(); chosen[3] = c; }
    }
  }

  PanelCorners out;
  for (int k = 0; k < 4; ++k) out.corners[k] = inliers.points[idx[chosen[k]]];
  detail::order_ccw(out.corners, basis);
  return out;
}

// Rigid transform of corners into the world frame: x_w = R_bw x_b + s.
inline PanelCorners to_world(const PanelCorners& corners,
                             const RigidBodyState& pose) {
  const Eigen::Matrix3d r = pose.rotation();
  PanelCorners out;
  for (int i = 0; i < 4; ++i) {
    out.corners[i] = r * corners.corners[i] + pose.position;
  }
  return out;
}

// Builds the ground-effect surface from detected corners: least-squares
// plane through the four points, corners projected onto it as the convex
// boundary.
inline SurfaceModel surface_from_corners(const PanelCorners& corners) {
  std::vector<Eigen::Vector3d> pts(corners.corners.begin(),
                                   corners.corners.end());
  const PlaneModel plane = detail::least_squares_plane(pts, 0.0);
  if (std::abs(plane.normal.z()) < 1e-9) {
    throw NonConvex("panel plane is vertical; no footprint below");
  }

  SurfaceModel s;
  s.normal = plane.normal.z() > 0.0 ? plane.normal : Eigen::Vector3d(-plane.normal);
  const double d = plane.normal.z() > 0.0 ? plane.offset : -plane.offset;
  s.point = d * s.normal;
  s.boundary.resize(4);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d& v = corners.corners[i];
    s.boundary[i] = v - (s.normal.dot(v) - d) * s.normal;
  }

  geom::Polygon2 fp = s.footprint();
  if (geom::signed_area(fp) < 0.0) {
    std::reverse(s.boundary.begin(), s.boundary.end());
    fp = s.footprint();
  }
  if (geom::area(fp) < 1e-12 || !geom::is_convex_ccw(fp, /*strict=*/true)) {
    throw NonConvex("panel corners do not form a convex quadrilateral");
  }
  return s;
}

struct PanelCloudSpec {
  double grid_spacing = 0.01;     // m, sampling pitch on the panel
  double noise_sigma = 0.0;       // m, along the panel normal
  double outlier_fraction = 0.0;  // fraction of total points
  double outlier_box = 2.0;       // m, half-extent of the outlier cube
  std::uint64_t seed = 1;
};

// Synthetic stand-in for the depth-camera cloud: panel surface sampled on a
// grid plus uniform outliers, expressed in the drone frame of `pose`.
inline PointCloud make_panel_cloud(const SurfaceModel& panel,
                                   const RigidBodyState& pose,
                                   const PanelCloudSpec& spec) {
  if (panel.boundary.size() < 3) throw ConfigError("panel boundary required");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : panel.boundary) centroid += v;
  centroid /= static_cast<double>(panel.boundary.size());

  const Eigen::Vector3d b1 =
      (panel.boundary[1] - panel.boundary[0]).normalized();
  const Eigen::Vector3d b2 = panel.normal.cross(b1);
  double umin = 0, umax = 0, vmin = 0, vmax = 0;
  for (const auto& v : panel.boundary) {
    const Eigen::Vector3d q = v - centroid;
    umin = std::min(umin, q.dot(b1));
    umax = std::max(umax, q.dot(b1));
    vmin = std::min(vmin, q.dot(b2));
    vmax = std::max(vmax, q.dot(b2));
  }

  const geom::Polygon2 fp = panel.footprint();
  std::vector<Eigen::Vector3d> world_pts;
  for (double u = umin; u <= umax + 1e-12; u += spec.grid_spacing) {
    for (double v = vmin; v <= vmax + 1e-12; v += spec.grid_spacing) {
      Eigen::Vector3d p = centroid + u * b1 + v * b2;
      if (!geom::point_in_convex({p.x(), p.y()}, fp)) continue;
      if (spec.noise_sigma > 0.0) {
        p += spec.noise_sigma * gauss(rng) * panel.normal;
      }
      world_pts.push_back(p);
    }
  }

  if (spec.outlier_fraction > 0.0) {
    const auto n_out = static_cast<std::size_t>(
        spec.outlier_fraction / (1.0 - spec.outlier_fraction) *
        static_cast<double>(world_pts.size()));
    for (std::size_t k = 0; k < n_out; ++k) {
      world_pts.push_back(centroid + spec.outlier_box *
                                         Eigen::Vector3d(uni(rng), uni(rng),
                                                         uni(rng)));
    }
  }

  // express in the drone frame so the pipeline sees camera-like data
  const Eigen::Matrix3d r = pose.rotation();
  PointCloud cloud;
  cloud.points.reserve(world_pts.size());
  for (const auto& p : world_pts) {
    cloud.points.push_back(r.transpose() * (p - pose.position));
  }
  return cloud;
}

}  // namespace pvcoat
