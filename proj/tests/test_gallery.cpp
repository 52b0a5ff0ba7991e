#include <gtest/gtest.h>

#include <finsler_pl/gallery.hpp>

using namespace fpl;

namespace {

double form(double beta, Vec2 v) { return std::sqrt(v.x() * v.x() + 2 * beta * v.x() * v.y() + v.y() * v.y()); }

}  // namespace

TEST(HalfPlanes, EqualBetasActAsOneNormedPlane) {
    for (double beta : {0.0, 0.3}) {
        auto g = build_glued_half_planes(beta, beta);
        Rng rng(3);
        for (int k = 0; k < 40; ++k) {
            Vec2 a(rng.uniform(-2, 2), rng.uniform(-2, 2)), b(rng.uniform(-2, 2), rng.uniform(-2, 2));
            Point pa{a.y() >= 0 ? 0 : 1, a}, pb{b.y() >= 0 ? 0 : 1, b};
            EXPECT_NEAR(dist(*g.complex, pa, pb), form(beta, b - a), 1e-9);
        }
    }
}

TEST(HalfPlanes, VerticalDerivativesDifferAcrossTheLine) {
    auto g = build_glued_half_planes(0.5, -0.5);
    EXPECT_TRUE(g.warnings.empty());
    Vec e(Vec2(1, 0)), up(Vec2(0, 1));
    EXPECT_NEAR(g.complex->face(0).norm(e), 1.0, 1e-15);
    EXPECT_NEAR(g.complex->face(1).norm(e), 1.0, 1e-15);
    EXPECT_NEAR(g.complex->face(0).norm.grad(e).dot(up), 0.5, 1e-12);
    EXPECT_NEAR(g.complex->face(1).norm.grad(e).dot(up), -0.5, 1e-12);
}

TEST(HalfPlanes, RejectsIndefiniteAndWarnsWhenIllConditioned) {
    EXPECT_THROW(build_glued_half_planes(1.0, 0.0), InputError);
    EXPECT_THROW(build_glued_half_planes(0.0, -1.2), InputError);
    auto g = build_glued_half_planes(0.999, -0.999);
    EXPECT_EQ(g.warnings.size(), 2u);
}

TEST(ConvexityFailure, ProfileMatchesClosedFormAndViolatesAtOrigin) {
    auto g = build_glued_half_planes(0.5, -0.5);
    auto rep = measure_convexity_failure(g);
    ASSERT_FALSE(rep.rows.empty());
    for (auto& r : rep.rows) {
        // straight segments from (a, 0) to (0, t) inside the closed half-plane of t
        double a = r.anchor, h = r.step;
        EXPECT_NEAR(r.g_center, std::abs(a), 1e-9);
        EXPECT_NEAR(r.g_plus, form(0.5, Vec2(-a, h)), 1e-9);
        EXPECT_NEAR(r.g_minus, form(-0.5, Vec2(-a, -h)), 1e-9);
    }
    EXPECT_GE(rep.violations, 1);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_GT(rep.witness->anchor, 0);
    EXPECT_GT(rep.max_margin, 1e-6);
    EXPECT_GT(rep.triangles, 0);
}

TEST(ConvexityFailure, NoneForEqualNormsOrOneSidedProbe) {
    auto flat = measure_convexity_failure(build_glued_half_planes(0.4, 0.4));
    EXPECT_EQ(flat.violations, 0);
    EXPECT_EQ(flat.busemann_violations, 0);
    ConvexityProbe one_side;
    one_side.center = 1.0;
    one_side.steps = {0.5, 0.2};
    auto rep = measure_convexity_failure(build_glued_half_planes(0.5, -0.5), one_side);
    EXPECT_EQ(rep.violations, 0);
}

TEST(Belt, BuildsAndStretchesAcrossThePeriod) {
    auto b = build_belt(1.01);
    ASSERT_TRUE(b.cover);
    auto win = b.cover->window(2);
    Point bottom{b.cover->window_face(1, 0), Vec2(0.5, -2)};
    Point top = win->transition(bottom, b.cover->window_face(0, 1));
    EXPECT_NEAR(top.x.x(), 0.5 / 1.01, 1e-14);
    EXPECT_NEAR(top.x.y(), 2.0, 1e-14);
    EXPECT_NO_THROW(build_belt(1.0));
    EXPECT_THROW(build_belt(2.0, 0.35), ConstructionError);
    EXPECT_THROW(build_belt(0.9), InputError);
}

TEST(Belt, DeviationContractsByTheStretchPerPeriod) {
    double f = 1.01;
    AsymptoticsConfig cfg;
    cfg.offsets = {0.05, 0.0};
    auto rep = measure_asymptotics(build_belt(f), cfg);
    auto& r = rep.runs[0];
    ASSERT_EQ(int(r.deviations.size()), cfg.periods);
    for (int j = 0; j < cfg.periods; ++j) EXPECT_NEAR(r.deviations[j], 0.05 * std::pow(f, -j), 1e-12);
    EXPECT_TRUE(r.non_increasing);
    EXPECT_TRUE(r.bounded);
    ASSERT_TRUE(r.ratio.has_value());
    EXPECT_NEAR(*r.ratio, 1 / f, 1e-9);
    ASSERT_TRUE(r.shortening_gap.has_value());
    EXPECT_LT(*r.shortening_gap, 1e-9);
    auto& z = rep.runs[1];
    EXPECT_LT(z.max_deviation, 1e-12);
    EXPECT_FALSE(z.ratio.has_value());
}

TEST(Belt, FactorOneKeepsDeviationConstant) {
    auto rep = measure_asymptotics(build_belt(1.0));
    for (double d : rep.runs[0].deviations) EXPECT_NEAR(d, 0.05, 1e-9);
    EXPECT_NEAR(*rep.runs[0].ratio, 1.0, 1e-9);
}

TEST(Belt, WindowBeyondTheCoverIsAResourceError) {
    AsymptoticsConfig cfg;
    cfg.periods = 10;
    EXPECT_THROW(measure_asymptotics(build_belt(1.01, 0.35, 5), cfg), ResourceError);
}

TEST(DoubleBelt, BridgeJoinsTheTwoBelts) {
    auto g = build_double_belt(1.01, 0.35, 4, 1.0, 2);
    const Complex& c = *g.complex;
    auto face = [](int belt, int k, int part) { return (belt * 4 + k) * 3 + part; };
    Point p{c.face_index(face(0, 2, 0)), Vec2(0.5, -0.5)}, q{c.face_index(face(1, 2, 0)), Vec2(0.5, -0.5)};
    EXPECT_NEAR(dist(c, p, q), 2.0, 1e-9);
}

TEST(Flag, MiddleNormHasAVerticalCorner) {
    auto g = build_russian_flag(0.5);
    const Complex& c = *g.complex;
    EXPECT_FALSE(c.smooth());
    EXPECT_NEAR(c.face(1).norm(Vec(Vec2(1, 0))), 1.0, 1e-15);
    EXPECT_FALSE(c.face(1).norm.smooth_at(Vec(Vec2(0, 1))));
    EXPECT_THROW(require_smooth(c), InputError);
    EXPECT_THROW(build_russian_flag(0.0), InputError);
}

TEST(Flag, FanMembersAreGeodesicsWithGrowingLength) {
    auto g = build_russian_flag(0.5);
    double s = g.parameters.at("half_strip").get<double>();
    double a = 1.0;  // p and q sit at distance a from the middle strip
    auto rep = geodesic_fan(g, Point{0, Vec2(0.3, s + a)}, Point{2, Vec2(0.3, -s - a)});
    double hw = 0.5 * a / std::sqrt(1 - 0.25);
    EXPECT_NEAR(rep.half_width_left, hw, 1e-8);
    EXPECT_NEAR(rep.half_width_right, hw, 1e-8);
    ASSERT_EQ(rep.members.size(), 11u);
    EXPECT_EQ(rep.geodesics, 11);
    for (auto& m : rep.members) {
        double x = m.offset;
        EXPECT_NEAR(m.length, 2 * std::sqrt(x * x + a * a) + 2 * s, 1e-12);
        EXPECT_LE(m.local_defect, 1e-7);
    }
    EXPECT_NEAR(rep.members[5].length, 2 * (a + s), 1e-12);
    EXPECT_TRUE(rep.monotone);
    EXPECT_GT(rep.spread, 1e-4);
}

TEST(Flag, OffsetsBeyondTheHalfWidthFailTheSlopeTest) {
    auto g = build_russian_flag(0.5);
    FanConfig cfg;
    cfg.fraction = 1.3;
    auto rep = geodesic_fan(g, Point{0, Vec2(0, 1.2)}, Point{2, Vec2(0, -1.2)}, cfg);
    EXPECT_FALSE(rep.members.front().geodesic);
    EXPECT_FALSE(rep.members.back().geodesic);
    EXPECT_TRUE(rep.members[5].geodesic);
}

TEST(Flag, SofterCornerNarrowsTheFan) {
    auto soft = geodesic_fan(build_russian_flag(0.01), Point{0, Vec2(0, 1.2)}, Point{2, Vec2(0, -1.2)});
    auto sharp = geodesic_fan(build_russian_flag(0.5), Point{0, Vec2(0, 1.2)}, Point{2, Vec2(0, -1.2)});
    EXPECT_NEAR(soft.half_width_right, soft.analytic_half_width, 1e-8);
    EXPECT_LT(soft.half_width_right, sharp.half_width_right);
}

TEST(Flag, FanRejectsEndpointsOffAVertical) {
    auto g = build_russian_flag(0.5);
    EXPECT_THROW(geodesic_fan(g, Point{0, Vec2(0, 1.2)}, Point{2, Vec2(0.1, -1.2)}), InputError);
    EXPECT_THROW(geodesic_fan(g, Point{1, Vec2(0, 0.01)}, Point{2, Vec2(0, -1.2)}), InputError);
}

TEST(Flag, ScansAndRadiusSeeTheFan) {
    auto g = build_russian_flag(0.5);
    const Complex& c = *g.complex;
    auto e = enumerate_geodesics(c, Point{0, Vec2(0, 1.2)}, Point{2, Vec2(0, -1.2)});
    EXPECT_GT(e.paths.size(), 1u);
    auto scan = uniqueness_scan(c, Region{}, 0.5, 200, 7);
    EXPECT_GT(scan.ambiguous, 0);
    auto r = uniqueness_radius(c, Point{1, Vec2(0, 0.05)});
    EXPECT_TRUE(r.witness.has_value());
    EXPECT_LT(r.radius, r.cap);
}
