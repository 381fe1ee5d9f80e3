#include <gtest/gtest.h>

#include <random>

#include "support/geometry_fixtures.hpp"
#include "support/sampling_oracle.hpp"
#include "svmplan/geodata/environment_map.hpp"

using namespace svmplan;
using namespace svmplan::geodata;

namespace {

std::vector<Vec2> square(double x0, double y0, double s) {
  return {{x0, y0}, {x0 + s, y0}, {x0 + s, y0 + s}, {x0, y0 + s}};
}

EnvironmentMap flat_with(std::vector<Building> b) {
  return EnvironmentMap({44.0, 11.0, {}}, TerrainClass::Flat, 0.0, std::move(b), {}, {});
}

Building box_building(double x0, double y0, double s, double h) {
  Building b;
  b.id = "b";
  b.footprint = square(x0, y0, s);
  b.roof_height = h;
  return b;
}

double total_t(const std::vector<BuildingCut>& cuts) {
  double s = 0.0;
  for (const auto& c : cuts) s += c.t_inside;
  return s;
}

double total_t(const std::vector<TerrainRun>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += r.t_end - r.t_begin;
  return s;
}

} // namespace

TEST(Polygon, SignedAreaAndOrientation) {
  const auto sq = square(0, 0, 2);
  EXPECT_DOUBLE_EQ(signed_area(sq), 4.0);
  std::vector<Vec2> cw(sq.rbegin(), sq.rend());
  EXPECT_DOUBLE_EQ(signed_area(cw), -4.0);
}

TEST(Polygon, PointInPolygonMatchesWindingOracle) {
  const std::vector<Vec2> l_shape{{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    EXPECT_EQ(point_in_polygon(l_shape, p), oracle::inside(l_shape, p)) << p.x << "," << p.y;
  }
}

TEST(Polygon, SimplicityCheck) {
  EXPECT_TRUE(is_simple_polygon(square(0, 0, 1)));
  const std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_FALSE(is_simple_polygon(bowtie));
}

TEST(Polygon, PointSegmentDistance) {
  Vec2 foot;
  EXPECT_DOUBLE_EQ(point_segment_distance({1, 1}, {0, 0}, {2, 0}, &foot), 1.0);
  EXPECT_DOUBLE_EQ(foot.x, 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 0}, {0, 0}, {2, 0}), 1.0);
}

TEST(BuildingIntersection, StraightThroughOneBuilding) {
  const auto map = flat_with({box_building(40, -10, 20, 30)});
  const auto cuts = segment_building_intersections(map, {0, 0, 10}, {100, 0, 10});
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_NEAR(cuts[0].chord, 20.0, 1e-9);
  EXPECT_NEAR(cuts[0].t_enter, 0.4, 1e-12);
  EXPECT_NEAR(cuts[0].t_exit, 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(cuts[0].height, 30.0);
}

TEST(BuildingIntersection, SegmentAboveRoofIsClear) {
  const auto map = flat_with({box_building(40, -10, 20, 8)});
  EXPECT_TRUE(segment_building_intersections(map, {0, 0, 10}, {100, 0, 10}).empty());
}

TEST(BuildingIntersection, RoofClipsPartOfTheChord) {
  // z falls from 20 to 0 over 100 m; roof at 12 is crossed at x = 40.
  const auto map = flat_with({box_building(30, -10, 20, 12)});
  const auto cuts = segment_building_intersections(map, {0, 0, 20}, {100, 0, 0});
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_NEAR(cuts[0].t_enter, 0.4, 1e-12);
  EXPECT_NEAR(cuts[0].t_exit, 0.5, 1e-12);
  EXPECT_NEAR(cuts[0].t_inside, 0.1, 1e-12);
}

TEST(BuildingIntersection, OrderedByDistanceFromTx) {
  const auto map = flat_with({box_building(70, -5, 10, 20), box_building(20, -5, 10, 20)});
  const auto cuts = segment_building_intersections(map, {0, 0, 5}, {100, 0, 5});
  ASSERT_EQ(cuts.size(), 2u);
  EXPECT_EQ(cuts[0].building, 1u);
  EXPECT_EQ(cuts[1].building, 0u);
}

TEST(BuildingIntersection, ConcaveFootprintGivesTwoIntervals) {
  Building u;
  u.footprint = {{0, 0}, {30, 0}, {30, 30}, {20, 30}, {20, 10}, {10, 10}, {10, 30}, {0, 30}};
  u.roof_height = 10;
  const auto map = flat_with({u});
  const auto cuts = segment_building_intersections(map, {-10, 20, 2}, {40, 20, 2});
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_NEAR(cuts[0].chord, 20.0, 1e-9);
  EXPECT_NEAR(cuts[0].t_enter, 0.2, 1e-12);
  EXPECT_NEAR(cuts[0].t_exit, 0.8, 1e-12);
}

TEST(BuildingIntersection, SegmentAlongAnEdgeDoesNotCount) {
  const auto map = flat_with({box_building(0, 0, 10, 10)});
  EXPECT_TRUE(segment_building_intersections(map, {-5, 0, 1}, {15, 0, 1}).empty());
}

TEST(BuildingIntersection, EndpointInsideBuilding) {
  const auto map = flat_with({box_building(0, -5, 10, 10)});
  const auto cuts = segment_building_intersections(map, {5, 0, 1}, {25, 0, 1});
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(cuts[0].t_enter, 0.0);
  EXPECT_NEAR(cuts[0].t_exit, 0.25, 1e-12);
}

TEST(BuildingIntersection, MatchesSamplingOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto fx = fixtures::building_fixture(seed);
    const double analytic = total_t(segment_building_intersections(fx.map, fx.tx, fx.rx));
    const double sampled = oracle::sample_segment(fx.map, fx.tx, fx.rx, 0.01, false).ptb;
    ASSERT_GT(sampled, 0.0) << seed;
    EXPECT_LE(std::abs(analytic - sampled) / sampled, 1e-3) << seed;
  }
}

TEST(Terrain, FlatMapReturnsGroundElevation) {
  const EnvironmentMap map({44.0, 11.0, {}}, TerrainClass::Flat, 37.5, {}, {}, {});
  EXPECT_EQ(elevation_at(map, Vec2{123, -45}), 37.5);
  EXPECT_TRUE(segment_terrain_intersections(map, {0, 0, 40}, {100, 0, 38}).empty());
}

TEST(Terrain, InterpolatesBetweenTwoContours) {
  const EnvironmentMap map({44.0, 11.0, {}}, TerrainClass::Hilly, 0.0, {},
                           {{{{0, -100}, {0, 100}}, 100.0}, {{{40, -100}, {40, 100}}, 120.0}}, {});
  EXPECT_NEAR(elevation_at(map, Vec2{10, 0}), 105.0, 1e-12);
  EXPECT_NEAR(elevation_at(map, Vec2{30, 0}), 115.0, 1e-12);
  EXPECT_NEAR(elevation_at(map, Vec2{0, 5}), 100.0, 1e-12);
}

TEST(Terrain, HillyWithoutContoursThrows) {
  const EnvironmentMap map({44.0, 11.0, {}}, TerrainClass::Hilly, 0.0, {}, {}, {});
  EXPECT_THROW(elevation_at(map, Vec2{0, 0}), NoTerrainData);
  EXPECT_THROW(segment_terrain_intersections(map, {0, 0, 1}, {1, 1, 1}), NoTerrainData);
}

TEST(Terrain, IndexedElevationMatchesBruteForce) {
  const auto fx = fixtures::terrain_fixture(42);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-400.0, 400.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    EXPECT_NEAR(elevation_at(fx.map, p), oracle::elevation(fx.map, p), 1e-9);
  }
}

TEST(Terrain, RunsMatchSamplingOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fx = fixtures::terrain_fixture(seed);
    const double analytic = total_t(segment_terrain_intersections(fx.map, fx.tx, fx.rx));
    const double sampled = oracle::sample_segment(fx.map, fx.tx, fx.rx, 0.01, true).ptg;
    ASSERT_GT(sampled, 0.0) << seed;
    EXPECT_LE(std::abs(analytic - sampled) / sampled, 1e-3) << seed;
  }
}

TEST(Roads, ProjectionWithinGateSnaps) {
  const EnvironmentMap map({44.0, 11.0, {}}, TerrainClass::Flat, 0.0, {}, {}, {{"main", {{-100, 0}, {100, 0}}}});
  const auto near = map.to_geo({10, 12, 0}, false);
  const auto r = project_to_road(map, near, 30.0);
  EXPECT_TRUE(r.projected);
  EXPECT_NEAR(r.distance, 12.0, 1e-6);
  const auto lp = map.to_local(r.point);
  EXPECT_NEAR(lp.x, 10.0, 1e-6);
  EXPECT_NEAR(lp.y, 0.0, 1e-6);

  const auto far = project_to_road(map, map.to_geo({10, 45, 0}, false), 30.0);
  EXPECT_FALSE(far.projected);
}

TEST(Roads, NoRoadsIsAnError) {
  const EnvironmentMap map({44.0, 11.0, {}}, TerrainClass::Flat, 0.0, {}, {}, {});
  EXPECT_THROW(project_to_road(map, {44.0, 11.0, {}}), InvalidArgument);
}
