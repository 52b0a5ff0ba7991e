#include <finsler_pl/complex.hpp>

#include <gtest/gtest.h>

using namespace fpl;

namespace {

Complex half_planes(const Norm& up, const Norm& down) {
    Face u{0, Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0)), up};
    Face d{1, Polygon::unbounded({Vec2(0, 0)}, Vec2(1, 0), Vec2(-1, 0)), down};
    // Upper: edge 0 is the negative x-axis ray, edge 1 the positive one.
    // Lower: edge 0 is the positive ray, edge 1 the negative one.
    std::vector<Gluing> g(2);
    g[0].face_a = 0, g[0].edge_a = 0, g[0].face_b = 1, g[0].edge_b = 1;
    g[1].face_a = 0, g[1].edge_a = 1, g[1].face_b = 1, g[1].edge_b = 0;
    return Complex({u, d}, g);
}

// k equal Euclidean sectors around the origin.
Complex fan(int k) {
    std::vector<Face> faces;
    std::vector<Gluing> gl;
    for (int i = 0; i < k; ++i) {
        double a0 = 2 * M_PI * i / k, a1 = 2 * M_PI * (i + 1) / k;
        Vec2 r0(std::cos(a0), std::sin(a0)), r1(std::cos(a1), std::sin(a1));
        faces.push_back({i, Polygon::unbounded({Vec2(0, 0)}, r1, r0), euclidean()});
    }
    for (int i = 0; i < k; ++i) {
        Gluing g;
        g.face_a = i, g.edge_a = 0, g.face_b = (i + 1) % k, g.edge_b = 1;
        gl.push_back(g);
    }
    return Complex(faces, gl);
}

}  // namespace

TEST(Polygon, UnboundedOrientation) {
    Polygon q = Polygon::unbounded({Vec2(0, 0)}, Vec2(0, 1), Vec2(1, 0));
    EXPECT_EQ(q.check(), "");
    EXPECT_TRUE(q.contains(Vec2(1, 1)));
    EXPECT_FALSE(q.contains(Vec2(-1, 1)));
    EXPECT_FALSE(q.contains(Vec2(1, -1)));
    Polygon up = Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0));
    EXPECT_TRUE(up.contains(Vec2(5, 0.1)));
    EXPECT_FALSE(up.contains(Vec2(5, -0.1)));
    EXPECT_EQ(up.edges_at(Vec2(0, 0)).size(), 2u);
    Polygon cw = Polygon::bounded({Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)});
    EXPECT_NE(cw.check(), "");
    Polygon sq = Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)});
    EXPECT_EQ(sq.check(), "");
    auto clip = sq.clip_box(Vec2(0.5, -1), Vec2(2, 0.5));
    double area = 0;
    for (std::size_t i = 0; i < clip.size(); ++i) area += cross2(clip[i], clip[(i + 1) % clip.size()]) / 2;
    EXPECT_NEAR(area, 0.25, 1e-15);
}

TEST(Complex, ValidateExamples) {
    auto flat = half_planes(euclidean(), euclidean());
    EXPECT_TRUE(flat.validate().valid);
    // x^2 + xy + y^2 and x^2 - xy + y^2 both restrict to |x| on horizontals.
    auto obs = half_planes(ellipsoidal(mat2(1, 0.5, 0.5, 1)), ellipsoidal(mat2(1, -0.5, -0.5, 1)));
    EXPECT_TRUE(obs.validate().valid);
    auto bad = half_planes(euclidean(2, 1.01), euclidean());
    auto r = bad.validate();
    EXPECT_FALSE(r.valid);
    ASSERT_FALSE(r.errors.empty());
    EXPECT_NE(r.errors[0].find("isometry"), std::string::npos);
    EXPECT_NEAR(r.worst_isometry_defect, 0.01 / 1.01, 1e-12);
    EXPECT_THROW(bad.require_valid(), ValidationError);
}

TEST(Complex, TransitionAndRoundTrip) {
    auto c = half_planes(euclidean(), euclidean());
    c.require_valid();
    Point p{0, Vec2(0.5, 0)};
    Point q = c.transition(p, 1);
    EXPECT_EQ(q.face, 1);
    EXPECT_NEAR((q.x - Vec2(0.5, 0)).norm(), 0, 1e-15);
    Point back = c.transition(q, 0);
    EXPECT_NEAR((back.x - p.x).norm(), 0, 1e-12);
    EXPECT_THROW(c.transition(Point{0, Vec2(0.5, 1)}, 1), IncidenceError);
    Rng rng(1);
    for (int s = 0; s < 100; ++s) {
        Point a{0, Vec2(rng.uniform(-5, 5), 0)};
        auto b = c.transition(c.transition(a, 1), 0);
        EXPECT_LT((b.x - a.x).norm(), 1e-12);
    }
}

TEST(Complex, StretchedGluingTransition) {
    // Bottom edge of a square glued to the top edge of another with factor f.
    double f = 1.01;
    Face a{0, Polygon::bounded({Vec2(-1, -2), Vec2(1, -2), Vec2(1, 2), Vec2(-1, 2)}), euclidean()};
    Face b{1, Polygon::bounded({Vec2(-1 / f, -2), Vec2(1 / f, -2), Vec2(1 / f, 2), Vec2(-1 / f, 2)}), euclidean(2, f)};
    Gluing g;
    g.face_a = 0, g.edge_a = 0, g.face_b = 1, g.edge_b = 2;
    g.matrix << 1 / f, 0, 0, 1;
    g.offset = Vec2(0, 4);
    Complex c({a, b}, {g});
    auto r = c.validate();
    EXPECT_TRUE(r.valid) << (r.errors.empty() ? "" : r.errors[0]);
    Point p = c.transition(Point{0, Vec2(0.5, -2)}, 1);
    EXPECT_NEAR(p.x.x(), 0.5 / f, 1e-15);
    EXPECT_NEAR(p.x.y(), 2, 1e-15);
}

TEST(Complex, CycleInconsistencyDetected) {
    // Three half-planes sharing the x-axis where one chain shifts by 0.1.
    Face u{0, Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0)), euclidean()};
    Face d{1, Polygon::unbounded({Vec2(0, 0)}, Vec2(1, 0), Vec2(-1, 0)), euclidean()};
    Face e{2, Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}), euclidean()};
    Face f{3, Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}), euclidean()};
    std::vector<Gluing> gl(3);
    gl[0].face_a = 2, gl[0].edge_a = 0, gl[0].face_b = 3, gl[0].edge_b = 0;
    gl[1].face_a = 3, gl[1].edge_a = 0, gl[1].face_b = 2, gl[1].edge_b = 0;
    gl[1].matrix << -1, 0, 0, 1;
    gl[1].offset = Vec2(1, 0);
    gl[2].face_a = 0, gl[2].edge_a = 1, gl[2].face_b = 1, gl[2].edge_b = 0;
    Complex c({u, d, e, f}, gl);
    auto r = c.validate();
    EXPECT_FALSE(r.valid);
    EXPECT_GT(r.worst_cycle_defect, 0.5);
}

TEST(Complex, StarCounts) {
    auto c = fan(5);
    c.require_valid();
    EXPECT_EQ(star(c, Point{0, Vec2(1, 0.2)}).faces().size(), 1u);
    EXPECT_EQ(star(c, Point{0, Vec2(1, 0)}).faces().size(), 2u);
    EXPECT_EQ(star(c, Point{0, Vec2(0, 0)}).faces().size(), 5u);
    // Canonical representative is the lowest face.
    Point onray{1, Vec2(std::cos(2 * M_PI / 5), std::sin(2 * M_PI / 5))};
    EXPECT_EQ(c.canonical(onray).face, 0);
}

TEST(Complex, TangentCones) {
    auto c = fan(5);
    c.require_valid();
    auto t0 = tangent_cone(c, Point{0, Vec2(1, 0.2)});
    EXPECT_EQ(t0.cone.complex.face_count(), 1);
    EXPECT_TRUE(t0.cone.complex.face(0).poly.is_plane());
    auto t1 = tangent_cone(c, Point{0, Vec2(1, 0)});
    EXPECT_EQ(t1.cone.complex.face_count(), 2);
    EXPECT_EQ(t1.cone.complex.gluings().size(), 2u);
    EXPECT_TRUE(t1.cone.complex.validate().valid);
    auto t5 = tangent_cone(c, Point{0, Vec2(0, 0)});
    EXPECT_EQ(t5.cone.complex.face_count(), 5);
    EXPECT_EQ(t5.cone.complex.gluings().size(), 5u);
    EXPECT_TRUE(t5.cone.complex.validate().valid);
    EXPECT_TRUE(std::isinf(t5.radius));
    auto q = t1.to_cone(Point{0, Vec2(1.1, 0.05)});
    EXPECT_NEAR((q.x - Vec2(0.1, 0.05)).norm(), 0, 1e-15);
}

TEST(Complex, RadialDistanceAndDilation) {
    auto c = fan(4);
    Cone cone{c, {}};
    for (int i = 0; i < 4; ++i) cone.apex.push_back(Point{i, Vec2::Zero()});
    Point q{0, Vec2(3, 4) / 5.0 * 5.0};
    // Sector 0 is the first quadrant.
    EXPECT_NEAR(radial_distance(cone, Point{0, Vec2(3, 4)}), 5, 1e-15);
    Rng rng(2);
    for (int s = 0; s < 100; ++s) {
        Point p{0, Vec2(rng.uniform(0, 2), rng.uniform(0, 2))};
        double t = rng.uniform(0, 3);
        EXPECT_NEAR(radial_distance(cone, dilate(cone, p, t)), t * radial_distance(cone, p),
                    1e-12 * (1 + radial_distance(cone, p)));
    }
    EXPECT_EQ(dilate(cone, q, 1).x, q.x);
    EXPECT_EQ(dilate(cone, q, 0).x, Vec2(0, 0));
    // Two-sector cone with different norms: radial distance uses the point's own sector.
    Face a{0, Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0)), ellipsoidal(mat2(1, 0.3, 0.3, 2))};
    Face b{1, Polygon::unbounded({Vec2(0, 0)}, Vec2(1, 0), Vec2(-1, 0)), lp(2, 3)};
    std::vector<Gluing> g(2);
    g[0].face_a = 0, g[0].edge_a = 0, g[0].face_b = 1, g[0].edge_b = 1;
    g[1].face_a = 0, g[1].edge_a = 1, g[1].face_b = 1, g[1].edge_b = 0;
    Cone two{Complex({a, b}, g), {Point{0, Vec2::Zero()}, Point{1, Vec2::Zero()}}};
    EXPECT_NEAR(radial_distance(two, Point{0, Vec2(0.3, 0.7)}),
                std::sqrt(0.09 + 2 * 0.3 * 0.3 * 0.7 + 2 * 0.49), 1e-15);
}

TEST(Complex, JsonRoundTrip) {
    auto c = half_planes(ellipsoidal(mat2(1, 0.5, 0.5, 1)), ellipsoidal(mat2(1, -0.5, -0.5, 1)));
    auto j = c.to_json();
    auto d = Complex::from_json(j);
    EXPECT_EQ(d.to_json().dump(), j.dump());
    EXPECT_TRUE(d.validate().valid);
    EXPECT_THROW(Complex::from_json(json{{"faces", 3}}), InputError);
    json bad = j;
    bad["gluings"][0]["faceA"] = 42;
    EXPECT_THROW(Complex::from_json(bad), InputError);
}

TEST(Complex, PeriodicWindowsAreCachedAndBounded) {
    // A vertical strip of unit squares.
    Face f{0, Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}), euclidean()};
    Complex base({f}, {});
    Gluing g;
    g.face_a = 0, g.edge_a = 2, g.face_b = 0, g.edge_b = 0;
    g.offset = Vec2(0, -1);
    base.set_periodic(PeriodicSpec{{g}, 16});
    PeriodicCover cover(base);
    auto w = cover.window(4);
    EXPECT_EQ(w->face_count(), 4);
    EXPECT_EQ(w->gluings().size(), 3u);
    EXPECT_EQ(cover.window(4).get(), w.get());
    EXPECT_THROW(cover.window(17), ResourceError);
    // Concurrent expansion is safe and yields one shared instance.
    std::vector<const Complex*> seen(8);
    parallel_for(8, [&](std::size_t i) { seen[i] = cover.window(8).get(); }, 8);
    for (auto* p : seen) EXPECT_EQ(p, seen[0]);
    auto q = cover.quotient();
    EXPECT_EQ(q.gluings().size(), 1u);
}
