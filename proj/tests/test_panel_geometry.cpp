#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pvcoat/panel_geometry.hpp"

using namespace pvcoat;
using Catch::Approx;

namespace {

// Dense rectangular panel cloud in the z = height plane (world frame,
// identity pose makes drone frame identical).
PointCloud rect_cloud(double len_x, double len_y, double pitch,
                      double height = 1.0) {
  PointCloud cloud;
  for (double x = 0.0; x <= len_x + 1e-12; x += pitch) {
    for (double y = 0.0; y <= len_y + 1e-12; y += pitch) {
      cloud.points.emplace_back(x, y, height);
    }
  }
  return cloud;
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(c, 1.0));
}

double corner_error(const PanelCorners& got,
                    const std::array<Eigen::Vector3d, 4>& truth) {
  double worst = 0.0;
  for (const auto& t : truth) {
    double best = 1e9;
    for (const auto& g : got.corners) best = std::min(best, (g - t).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("ransac on an exact plane") {
  PointCloud cloud = rect_cloud(1.0, 1.0, 0.1, 1.0);
  const auto fit = ransac_plane_fit(cloud, 0.01, 100, 7);
  CHECK(fit.plane.normal.z() == Approx(1.0).margin(1e-12));
  CHECK(fit.plane.offset == Approx(1.0).margin(1e-12));
  CHECK(fit.inlier_count == cloud.points.size());
}

TEST_CASE("ransac with 30% outliers recovers the plane") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::normal_distribution<double> gauss(0.0, 0.002);

  PointCloud cloud = rect_cloud(1.0, 2.0, 0.02, 0.5);
  for (auto& p : cloud.points) p.z() += gauss(rng);
  const std::size_t n_in = cloud.points.size();
  for (std::size_t i = 0; i < n_in * 3 / 7; ++i) {
    cloud.points.emplace_back(uni(rng), uni(rng), uni(rng));
  }

  const auto fit = ransac_plane_fit(cloud, 0.01, 500, 99);
  CHECK(angle_between(fit.plane.normal, Eigen::Vector3d::UnitZ()) <
        0.5 * M_PI / 180.0);
  CHECK(fit.inlier_count >= n_in * 95 / 100);
}

TEST_CASE("ransac recovers a 12.4 degree tilt within 0.3 degrees") {
  const double tilt = 12.4 * M_PI / 180.0;
  const auto panel = SurfaceModel::make_rect({0, 0, 0.4}, 1.1, 2.3, tilt);
  PanelCloudSpec spec;
  spec.grid_spacing = 0.02;
  spec.noise_sigma = 0.003;
  spec.outlier_fraction = 0.2;
  spec.seed = 8;
  const auto cloud = make_panel_cloud(panel, RigidBodyState{}, spec);
  const auto fit = ransac_plane_fit(cloud, 0.01, 500, 3);
  const double got =
      std::acos(std::min(std::abs(fit.plane.normal.z()), 1.0));
  CHECK(std::abs(got - tilt) < 0.3 * M_PI / 180.0);
}

TEST_CASE("ransac is reproducible for a fixed seed") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  PointCloud cloud = rect_cloud(1.0, 1.0, 0.05, 0.3);
  for (int i = 0; i < 200; ++i) {
    cloud.points.emplace_back(uni(rng), uni(rng), uni(rng));
  }
  const auto a = ransac_plane_fit(cloud, 0.01, 300, 1234);
  const auto b = ransac_plane_fit(cloud, 0.01, 300, 1234);
  CHECK(a.plane.normal == b.plane.normal);
  CHECK(a.plane.offset == b.plane.offset);
  CHECK(a.inlier_mask == b.inlier_mask);
}

TEST_CASE("ransac degenerate clouds") {
  PointCloud two;
  two.points = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(ransac_plane_fit(two, 0.01, 10, 1), DegenerateCloud);

  PointCloud line;
  for (double x = 0; x < 1.0; x += 0.1) line.points.emplace_back(x, 0.0, 0.0);
  CHECK_THROWS_AS(ransac_plane_fit(line, 0.01, 50, 1), DegenerateCloud);
}

TEST_CASE("corner extraction on a dense rectangle") {
  PointCloud cloud = rect_cloud(1.1, 2.3, 0.01, 0.0);
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};
  const auto corners = extract_corners(cloud, plane);
  const std::array<Eigen::Vector3d, 4> truth = {
      Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1.1, 0, 0),
      Eigen::Vector3d(1.1, 2.3, 0), Eigen::Vector3d(0, 2.3, 0)};
  CHECK(corner_error(corners, truth) < 0.02);
}

TEST_CASE("corner extraction tolerates a reflective hole") {
  PointCloud cloud = rect_cloud(1.1, 2.3, 0.01, 0.0);
  PointCloud holed;
  for (const auto& p : cloud.points) {
    if ((p.head<2>() - Eigen::Vector2d(0.6, 1.2)).norm() > 0.25) {
      holed.points.push_back(p);
    }
  }
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};
  const auto corners = extract_corners(holed, plane);
  const std::array<Eigen::Vector3d, 4> truth = {
      Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1.1, 0, 0),
      Eigen::Vector3d(1.1, 2.3, 0), Eigen::Vector3d(0, 2.3, 0)};
  CHECK(corner_error(corners, truth) < 0.02);
}

TEST_CASE("four rectangle points are their own corners") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {2, 0, 0}, {2, 1, 0}, {0, 1, 0}};
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};
  const auto corners = extract_corners(cloud, plane);
  const std::array<Eigen::Vector3d, 4> truth = {
      Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 0, 0),
      Eigen::Vector3d(2, 1, 0), Eigen::Vector3d(0, 1, 0)};
  CHECK(corner_error(corners, truth) < 1e-12);
}

TEST_CASE("corner extraction error paths") {
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};

  PointCloud three;
  three.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(extract_corners(three, plane), TooFewPoints);

  // two distant dense blobs of equal size: largest component < 50%
  PointCloud split;
  for (double x = 0.0; x <= 0.2; x += 0.01) {
    for (double y = 0.0; y <= 0.2; y += 0.01) {
      split.points.emplace_back(x, y, 0.0);
      split.points.emplace_back(x + 5.0, y, 0.0);
      split.points.emplace_back(x + 10.0, y, 0.0);
    }
  }
  CHECK_THROWS_AS(extract_corners(split, plane), FragmentedCloud);
}

TEST_CASE("corner extraction commutes with in-plane rotation") {
  PointCloud cloud = rect_cloud(1.1, 2.3, 0.01, 0.0);
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};
  const auto base = extract_corners(cloud, plane);

  const double ang = 0.7;
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(ang, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  PointCloud rotated;
  for (const auto& p : cloud.points) rotated.points.push_back(rot * p);
  const auto turned = extract_corners(rotated, plane);

  std::array<Eigen::Vector3d, 4> expect;
  for (int i = 0; i < 4; ++i) expect[i] = rot * base.corners[i];
  CHECK(corner_error(turned, expect) < 0.02);
}

TEST_CASE("axis-extreme corner method stays close on an axis-aligned panel") {
  PointCloud cloud = rect_cloud(1.0, 2.0, 0.01, 0.0);
  PlaneModel plane{Eigen::Vector3d::UnitZ(), 0.0, 0.01};
  const auto corners =
      extract_corners(cloud, plane, CornerMethod::kAxisExtremes);
  for (const auto& c : corners.corners) {
    CHECK(std::abs(c.z()) < 1e-12);
  }
}

TEST_CASE("to_world is a rigid transform") {
  PanelCorners corners;
  corners.corners = {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 1),
                     Eigen::Vector3d(1, 2, 1), Eigen::Vector3d(0, 2, 1)};

  SECTION("identity pose") {
    const auto out = to_world(corners, RigidBodyState{});
    for (int i = 0; i < 4; ++i) CHECK(out.corners[i] == corners.corners[i]);
  }

  SECTION("pure translation") {
    RigidBodyState pose;
    pose.position = {1.0, -2.0, 3.0};
    const auto out = to_world(corners, pose);
    CHECK((out.corners[2] - (corners.corners[2] + pose.position)).norm() <
          1e-15);
  }

  SECTION("random pose preserves pairwise distances") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      RigidBodyState pose;
      pose.position = {uni(rng), uni(rng), uni(rng)};
      pose.attitude = Eigen::Quaterniond(uni(rng), uni(rng), uni(rng), uni(rng))
                          .normalized();
      const auto out = to_world(corners, pose);
      for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
          const double d0 = (corners.corners[i] - corners.corners[j]).norm();
          const double d1 = (out.corners[i] - out.corners[j]).norm();
          CHECK(std::abs(d0 - d1) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("surface from corners") {
  SECTION("axis-aligned rectangle") {
    PanelCorners corners;
    corners.corners = {Eigen::Vector3d(0, 0, 0.5), Eigen::Vector3d(1, 0, 0.5),
                       Eigen::Vector3d(1, 2, 0.5), Eigen::Vector3d(0, 2, 0.5)};
    const auto s = surface_from_corners(corners);
    CHECK(s.normal.z() == Approx(1.0).margin(1e-12));
    CHECK(s.plane_z_at(0.5, 1.0) == Approx(0.5).margin(1e-12));
  }

  SECTION("12.4 degree tilt is recovered") {
    const double tilt = 12.4 * M_PI / 180.0;
    const auto truth = SurfaceModel::make_rect({0, 0, 0}, 1.1, 2.3, tilt);
    PanelCorners corners;
    for (int i = 0; i < 4; ++i) corners.corners[i] = truth.boundary[i];
    const auto s = surface_from_corners(corners);
    const double angle =
        std::acos(std::min(std::abs(s.normal.dot(Eigen::Vector3d::UnitZ())), 1.0));
    CHECK(angle == Approx(tilt).margin(1e-6));
  }

  SECTION("collinear corners rejected") {
    PanelCorners corners;
    corners.corners = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                       Eigen::Vector3d(2, 0, 0), Eigen::Vector3d(3, 0, 0)};
    CHECK_THROWS_AS(surface_from_corners(corners), NonConvex);
  }
}

TEST_CASE("full pipeline reproduces the generating plane") {
  const double tilt = 12.4 * M_PI / 180.0;
  const auto truth = SurfaceModel::make_rect({0.3, -0.2, 0.1}, 1.1, 2.3, tilt);

  RigidBodyState pose;
  pose.position = {0.4, 0.1, 1.3};
  pose.attitude =
      Eigen::Quaterniond(Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitZ()));

  PanelCloudSpec spec;
  spec.grid_spacing = 0.02;
  spec.noise_sigma = 0.0;
  spec.seed = 21;
  const auto cloud = make_panel_cloud(truth, pose, spec);

  const auto fit = ransac_plane_fit(cloud, 0.01, 200, 77);
  PointCloud inliers;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (fit.inlier_mask[i]) inliers.points.push_back(cloud.points[i]);
  }
  const auto corners = extract_corners(inliers, fit.plane);
  const auto world = to_world(corners, pose);
  const auto recovered = surface_from_corners(world);
  CHECK((recovered.normal - truth.normal).norm() < 1e-6);
}
