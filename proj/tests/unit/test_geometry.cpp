#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "grid_oracle.hpp"
#include "scenecraft/error.hpp"
#include "scenecraft/geometry/convex.hpp"
#include "scenecraft/geometry/mass.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/geometry/rotation.hpp"

using namespace scenecraft;
using namespace scenecraft::geom;

namespace {

std::vector<WorldPiece> unit_cube_at(const Vec3& center) {
  const ConvexPiece cube = ConvexPiece::box(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5));
  return {WorldPiece::from(cube, Pose3(center, Quat::Identity()))};
}

ConvexPiece random_convex(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(4, 14);
  std::vector<Vec3> pts;
  const int n = count(rng);
  const Vec3 scale(0.2 + std::abs(u(rng)), 0.2 + std::abs(u(rng)), 0.2 + std::abs(u(rng)));
  for (int i = 0; i < n; ++i) pts.push_back(Vec3(u(rng), u(rng), u(rng)).cwiseProduct(scale));
  return ConvexPiece(pts);
}

Vec3 support(const WorldPiece& p, const Vec3& d) {
  Vec3 best = p.vertices.front();
  for (const auto& v : p.vertices) {
    if (v.dot(d) > best.dot(d)) best = v;
  }
  return best;
}

}  // namespace

TEST(SignedDistance, FaceGapBetweenUnitCubes) {
  EXPECT_NEAR(signed_distance(unit_cube_at(Vec3::Zero()), unit_cube_at(Vec3(3, 0, 0))).distance, 2.0, 1e-12);
}

TEST(SignedDistance, CoincidentCubesPenetrateByOneEdge) {
  EXPECT_NEAR(signed_distance(unit_cube_at(Vec3::Zero()), unit_cube_at(Vec3::Zero())).distance, -1.0, 1e-12);
}

TEST(SignedDistance, PartialOverlapAlongX) {
  const auto sd = signed_distance(unit_cube_at(Vec3::Zero()), unit_cube_at(Vec3(0.75, 0, 0)));
  EXPECT_NEAR(sd.distance, -0.25, 1e-12);
  EXPECT_NEAR(sd.normal.x(), 1.0, 1e-12);
}

TEST(SignedDistance, EmptySetIsInvalid) {
  std::vector<WorldPiece> none;
  EXPECT_THROW(signed_distance(none, unit_cube_at(Vec3::Zero())), Error);
}

TEST(ConvexPiece, RejectsDegenerateInput) {
  EXPECT_THROW(ConvexPiece({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}), Error);
  EXPECT_THROW(ConvexPiece({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)}), Error);
}

TEST(ConvexPiece, BoxHullStructure) {
  const auto box = ConvexPiece::box(Vec3(0, 0, 0), Vec3(1, 2, 3));
  EXPECT_EQ(box.vertices().size(), 8u);
  EXPECT_EQ(box.faces().size(), 6u);
  EXPECT_EQ(box.edges().size(), 12u);
  EXPECT_EQ(box.edge_directions().size(), 3u);
  EXPECT_NEAR(box.volume(), 6.0, 1e-12);
}

TEST(SignedDistance, SymmetricOnRandomPairs) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_convex(rng);
    const auto b = random_convex(rng);
    const Pose3 pa(Vec3(u(rng), u(rng), u(rng)), sample_rotation_uniform(rng));
    const Pose3 pb(Vec3(u(rng), u(rng), u(rng)), sample_rotation_uniform(rng));
    const std::vector<WorldPiece> wa{WorldPiece::from(a, pa)};
    const std::vector<WorldPiece> wb{WorldPiece::from(b, pb)};
    EXPECT_NEAR(signed_distance(wa, wb).distance, signed_distance(wb, wa).distance, 1e-9);
  }
}

TEST(SignedDistance, RecoversConstructedGap) {
  Rng rng(11);
  std::uniform_real_distribution<double> gap(1e-3, 0.8);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_convex(rng);
    const auto b = random_convex(rng);
    const Quat qa = sample_rotation_uniform(rng);
    const Quat qb = sample_rotation_uniform(rng);
    const Vec3 n = sample_rotation_uniform(rng) * Vec3::UnitX();
    const WorldPiece wa = WorldPiece::from(a, Pose3(Vec3::Zero(), qa));
    WorldPiece wb = WorldPiece::from(b, Pose3(Vec3::Zero(), qb));
    // Place b so that its support point along -n sits exactly g beyond a's
    // support point along n: the gap along n is then attained by a point pair.
    const double g = gap(rng);
    wb.translate(support(wa, n) + g * n - support(wb, -n));
    EXPECT_NEAR(signed_distance(wa, wb).distance, g, 1e-6);
  }
}

TEST(OffsetPolygon, InwardOffsetOfSquare) {
  const auto out = offset_polygon(Polygon2::rectangle(Vec2(0, 0), Vec2(10, 10)), -0.35);
  ASSERT_EQ(out.size(), 1u);
  // Overlay arithmetic is snapped to an integer grid internally: ~1e-7 m.
  EXPECT_NEAR(out[0].area(), 86.49, 1e-5);
  for (const auto& v : out[0].exterior) {
    EXPECT_NEAR(std::min(std::abs(v.x() - 0.35), std::abs(v.x() - 9.65)), 0.0, 1e-6);
    EXPECT_NEAR(std::min(std::abs(v.y() - 0.35), std::abs(v.y() - 9.65)), 0.0, 1e-6);
  }
}

TEST(OffsetPolygon, ZeroIsIdentity) {
  Polygon2 p;
  p.exterior = {Vec2(0, 0), Vec2(4, 0), Vec2(5, 3), Vec2(1, 4)};
  const auto out = offset_polygon(p, 0.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], p);
}

TEST(OffsetPolygon, OverErosionIsEmpty) {
  EXPECT_TRUE(offset_polygon(Polygon2::rectangle(Vec2(0, 0), Vec2(0.5, 0.5)), -0.35).empty());
}

TEST(OffsetPolygon, DilationRoundsCorners) {
  const auto out = offset_polygon(Polygon2::rectangle(Vec2(0, 0), Vec2(1, 1)), 0.5);
  ASSERT_EQ(out.size(), 1u);
  const double exact = 1.0 + 4 * 0.5 + kPi * 0.25;
  EXPECT_NEAR(out[0].area(), exact, 2e-3);
  EXPECT_LE(out[0].area(), exact);
  EXPECT_GE(out[0].exterior.size(), 4u * kArcSegmentsPerQuarter);
}

TEST(OffsetPolygon, RejectsSelfIntersecting) {
  Polygon2 bow;
  bow.exterior = {Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)};
  EXPECT_THROW(offset_polygon(bow, -0.1), Error);
}

TEST(OffsetPolygon, OpeningStaysInsideOriginal) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> radius(0.05, 0.6);
  for (int i = 0; i < 200; ++i) {
    std::vector<Vec2> pts;
    for (int k = 0; k < 12; ++k) pts.emplace_back(u(rng), u(rng));
    Polygon2 p;
    p.exterior = convex_hull_2d(pts);
    if (p.exterior.size() < 3 || p.area() < 0.5) continue;
    const double r = radius(rng);
    for (const auto& eroded : offset_polygon(p, -r)) {
      for (const auto& opened : offset_polygon(eroded, r)) {
        // p is convex: containment reduces to every vertex lying on the inner
        // side of every edge line.
        for (const auto& v : opened.exterior) {
          for (size_t k = 0; k < p.exterior.size(); ++k) {
            const Vec2& a = p.exterior[k];
            const Vec2& b = p.exterior[(k + 1) % p.exterior.size()];
            const Vec2 e = b - a;
            const double side = (e.x() * (v.y() - a.y()) - e.y() * (v.x() - a.x())) / e.norm();
            EXPECT_GE(side, -1e-6);
          }
        }
      }
    }
  }
}

TEST(FreeSpace, EmptyRoomIsOneComponent) {
  const auto fs = free_space(Polygon2::rectangle(Vec2(0, 0), Vec2(10, 10)), {}, 0.35);
  ASSERT_EQ(fs.regions.size(), 1u);
  EXPECT_NEAR(fs.total_area, 86.49, 1e-5);
}

TEST(FreeSpace, WallToWallStripSplitsRoom) {
  const std::vector<Obb2> strip{{Vec2(5, 5), Vec2(5, 0.2), 0.0}};
  const auto fs = free_space(Polygon2::rectangle(Vec2(0, 0), Vec2(10, 10)), strip, 0.35);
  EXPECT_EQ(fs.regions.size(), 2u);
}

TEST(FreeSpace, CenteredObstacleMatchesGridOracle) {
  const auto floor = Polygon2::rectangle(Vec2(0, 0), Vec2(10, 10));
  const std::vector<Obb2> box{{Vec2(5, 5), Vec2(1, 1), 0.0}};
  const auto fs = free_space(floor, box, 0.35);
  const auto grid = oracle::grid_free_space(floor, box, 0.35);
  ASSERT_EQ(fs.regions.size(), 1u);
  EXPECT_EQ(grid.components, 1);
  EXPECT_NEAR(fs.total_area, grid.total_area, 0.01 * grid.total_area);
}

TEST(FreeSpace, ComponentAreasSumToDifferenceArea) {
  // Obstacles kept far apart so the difference area has an independent
  // closed form: eroded floor minus each dilated obstacle clipped to it.
  Rng rng(5);
  std::uniform_real_distribution<double> ang(0.0, kPi);
  const auto floor = Polygon2::rectangle(Vec2(0, 0), Vec2(12, 8));
  const double r = 0.3;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Obb2> obstacles;
    for (int i = 0; i < 3; ++i) {
      obstacles.push_back({Vec2(2.0 + 4.0 * i, trial % 2 ? 4.0 : 0.6), Vec2(0.6, 0.4), ang(rng)});
    }
    const auto fs = free_space(floor, obstacles, r);
    double sum = 0.0;
    for (const auto& reg : fs.regions) sum += reg.area;
    const auto eroded = offset_polygon(floor, -r).front();
    double expected = eroded.area();
    for (const auto& o : obstacles) {
      for (const auto& grown : offset_polygon(Polygon2::from_obb(o), r)) expected -= intersection_area(eroded, grown);
    }
    EXPECT_NEAR(sum, expected, 1e-6 * expected);
  }
}

TEST(MassProperties, UnitCube) {
  const auto mp = mesh_mass_properties(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1)), 2.0);
  EXPECT_NEAR(mp.volume, 1.0, 1e-12);
  EXPECT_NEAR(mp.density, 2.0, 1e-12);
  EXPECT_TRUE(mp.com.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
  EXPECT_TRUE(mp.inertia.isApprox(Mat3::Identity() / 3.0, 1e-12));
}

TEST(MassProperties, LinearInMass) {
  const auto mesh = box_mesh(Vec3(-0.2, 0, 0.1), Vec3(0.7, 0.4, 1.3));
  const auto a = mesh_mass_properties(mesh, 1.5);
  const auto b = mesh_mass_properties(mesh, 1.5 * 7.0);
  EXPECT_TRUE(b.inertia.isApprox(7.0 * a.inertia, 1e-12));
}

TEST(MassProperties, IcosphereApproachesSolidSphere) {
  const auto mp = mesh_mass_properties(icosphere_mesh(0.5, 3), 1.0);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(mp.inertia);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(eig.eigenvalues()(i), 0.1, 0.002);
}

TEST(MassProperties, RejectsInvertedMesh) {
  auto mesh = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1));
  for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  EXPECT_THROW(mesh_mass_properties(mesh, 1.0), Error);
}

TEST(MassProperties, PrincipalMomentsSatisfyTriangleInequality) {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const auto piece = random_convex(rng);
    const auto mp = mesh_mass_properties(piece.mesh(), 1.0 + i);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(mp.inertia);
    const Vec3 l = eig.eigenvalues();
    EXPECT_GE(l.minCoeff(), -1e-12);
    EXPECT_LE(l(0), l(1) + l(2) + 1e-12);
    EXPECT_LE(l(1), l(0) + l(2) + 1e-12);
    EXPECT_LE(l(2), l(0) + l(1) + 1e-12);
  }
}

TEST(Rotation, DeterministicPerSeed) {
  Rng a(42);
  Rng b(42);
  EXPECT_EQ(sample_rotation_uniform(a).coeffs(), sample_rotation_uniform(b).coeffs());
}

TEST(Rotation, OrthonormalProper) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = sample_rotation_uniform(rng).toRotationMatrix();
    EXPECT_TRUE((r.transpose() * r).isApprox(Mat3::Identity(), 1e-9));
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
}

TEST(Rotation, RotatedAxisHasNoPreferredDirection) {
  Rng rng(2);
  Vec3 mean = Vec3::Zero();
  const int n = 10000;
  for (int i = 0; i < n; ++i) mean += sample_rotation_uniform(rng) * Vec3::UnitZ();
  EXPECT_LT((mean / n).norm(), 0.05);
}

TEST(RayHitsFloor, InsideOutsideAndBoundary) {
  const auto floor = Polygon2::rectangle(Vec2(0, 0), Vec2(10, 10));
  EXPECT_TRUE(ray_hits_floor(Vec3(1, 1, 0.5), floor));
  EXPECT_FALSE(ray_hits_floor(Vec3(11, 1, 0.5), floor));
  EXPECT_TRUE(ray_hits_floor(Vec3(5, 0, 1), floor));
}

TEST(Angles, NormalizeDegrees) {
  EXPECT_DOUBLE_EQ(normalize_degrees(180.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_degrees(-180.0), 180.0);
  EXPECT_DOUBLE_EQ(normalize_degrees(270.0), -90.0);
  EXPECT_DOUBLE_EQ(Pose2(0, 0, 540.0).theta_deg, 180.0);
}
