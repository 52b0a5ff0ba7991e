#pragma once
// Small complexes shared by the test binaries.

#include <finsler_pl/complex.hpp>

namespace fpl::testing {

inline Complex half_planes(const Norm& up, const Norm& down) {
    Face u{0, Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0)), up};
    Face d{1, Polygon::unbounded({Vec2(0, 0)}, Vec2(1, 0), Vec2(-1, 0)), down};
    std::vector<Gluing> g(2);
    g[0].face_a = 0, g[0].edge_a = 0, g[0].face_b = 1, g[0].edge_b = 1;
    g[1].face_a = 0, g[1].edge_a = 1, g[1].face_b = 1, g[1].edge_b = 0;
    Complex c({u, d}, g);
    c.require_valid();
    return c;
}

inline Complex obs1() { return half_planes(ellipsoidal(mat2(1, 0.5, 0.5, 1)), ellipsoidal(mat2(1, -0.5, -0.5, 1))); }

// Flat cone of sectors with the given opening angles, each in its own chart
// spanning [0, angle] from the positive x-axis.
inline Complex flat_cone(const std::vector<double>& angles) {
    std::vector<Face> faces;
    std::vector<Gluing> gl;
    int k = int(angles.size());
    for (int i = 0; i < k; ++i) {
        Vec2 r0(1, 0), r1(std::cos(angles[i]), std::sin(angles[i]));
        faces.push_back({i, Polygon::unbounded({Vec2(0, 0)}, r1, r0), euclidean()});
    }
    for (int i = 0; i < k; ++i) {
        Gluing g;
        g.face_a = i, g.edge_a = 0, g.face_b = (i + 1) % k, g.edge_b = 1;
        double th = angles[i];
        g.matrix << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
        gl.push_back(g);
    }
    Complex c(faces, gl);
    c.require_valid();
    return c;
}

inline Complex square(double half, const Norm& n = euclidean()) {
    Face f{0, Polygon::bounded({Vec2(-half, -half), Vec2(half, -half), Vec2(half, half), Vec2(-half, half)}), n};
    Complex c({f}, {});
    c.require_valid();
    return c;
}

}  // namespace fpl::testing
