#pragma once
// Piecewise linear cone surfaces in a normed space: the saddle test as a
// convex-hull membership problem, the induced complex, and the three-case
// witnesses for uniqueness of geodesics.

#include "paths.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace fpl {

// ---- minimum-norm point in a convex hull --------------------------------------------

namespace detail {

template <class S>
S sabs(const S& v) {
    return v < 0 ? S(-v) : v;
}

template <class S>
S dot(const std::vector<S>& a, const std::vector<S>& b) {
    S s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solves A x = b by Gaussian elimination with partial pivoting; false if singular.
template <class S>
bool solve_dense(std::vector<std::vector<S>> A, std::vector<S> b, std::vector<S>& x, const S& zero_tol) {
    int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (sabs(A[r][col]) > sabs(A[piv][col])) piv = r;
        if (sabs(A[piv][col]) <= zero_tol) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col || A[r][col] == 0) continue;
            S f = A[r][col] / A[col][col];
            for (int k = col; k < n; ++k) A[r][k] -= f * A[col][k];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return true;
}

}  // namespace detail

template <class S>
struct MinNormPoint {
    std::vector<S> lambda;  // convex weights over all points
    std::vector<S> x;
    S norm2 = 0;
};

// Wolfe's algorithm. With tol = 0 and an exact scalar type it terminates
// with the exact minimum-norm point.
template <class S>
MinNormPoint<S> wolfe_min_norm(const std::vector<std::vector<S>>& P, const S& tol) {
    int m = int(P.size());
    int d = int(P[0].size());
    S scale = 0;
    for (auto& p : P) scale = std::max(scale, detail::dot(p, p));
    int j0 = 0;
    for (int j = 1; j < m; ++j)
        if (detail::dot(P[j], P[j]) < detail::dot(P[j0], P[j0])) j0 = j;
    std::vector<int> set{j0};
    std::vector<S> lam{S(1)};
    auto point = [&] {
        std::vector<S> x(d, S(0));
        for (std::size_t i = 0; i < set.size(); ++i)
            for (int k = 0; k < d; ++k) x[k] += lam[i] * P[set[i]][k];
        return x;
    };
    std::vector<S> x = point();
    for (int major = 0; major < 10 * m + 100; ++major) {
        int j = 0;
        S best = detail::dot(x, P[0]);
        for (int k = 1; k < m; ++k) {
            S v = detail::dot(x, P[k]);
            if (v < best) best = v, j = k;
        }
        S xx = detail::dot(x, x);
        if (best >= xx - tol * scale) break;
        if (std::find(set.begin(), set.end(), j) != set.end()) break;
        set.push_back(j);
        lam.push_back(S(0));
        for (int minor = 0; minor < 10 * m + 100; ++minor) {
            int s = int(set.size());
            std::vector<std::vector<S>> A(s + 1, std::vector<S>(s + 1, S(0)));
            std::vector<S> rhs(s + 1, S(0));
            for (int a = 0; a < s; ++a) {
                for (int b = 0; b < s; ++b) A[a][b] = detail::dot(P[set[a]], P[set[b]]);
                A[a][s] = 1;
                A[s][a] = 1;
            }
            rhs[s] = 1;
            std::vector<S> sol;
            if (!detail::solve_dense(A, rhs, sol, tol * scale * S(1e-6))) {
                // Affinely dependent corral: drop the newest point.
                set.pop_back();
                lam.pop_back();
                break;
            }
            bool positive = true;
            for (int a = 0; a < s; ++a)
                if (sol[a] <= tol) positive = false;
            if (positive) {
                for (int a = 0; a < s; ++a) lam[a] = sol[a];
                break;
            }
            S theta = 1;
            int drop = -1;
            for (int a = 0; a < s; ++a)
                if (sol[a] <= tol) {
                    S th = lam[a] / (lam[a] - sol[a]);
                    if (drop < 0 || th < theta) theta = th, drop = a;
                }
            for (int a = 0; a < s; ++a) lam[a] = lam[a] + theta * (sol[a] - lam[a]);
            lam[drop] = 0;
            std::vector<int> ns;
            std::vector<S> nl;
            for (int a = 0; a < s; ++a)
                if (lam[a] > tol) ns.push_back(set[a]), nl.push_back(lam[a]);
            set = ns;
            lam = nl;
            S tot = 0;
            for (auto& l : lam) tot += l;
            for (auto& l : lam) l /= tot;
        }
        x = point();
    }
    MinNormPoint<S> r;
    r.lambda.assign(m, S(0));
    for (std::size_t i = 0; i < set.size(); ++i) r.lambda[set[i]] = lam[i];
    r.x = x;
    r.norm2 = detail::dot(x, x);
    return r;
}

// Decides whether the origin lies in the convex hull of the points.
struct HullCertificate {
    bool contains_origin = false;
    bool exact = false;             // decided by the rational fallback
    std::vector<double> lambda;     // convex weights when the origin is inside
    Vec functional;                 // separating direction otherwise
    double margin = 0;              // min over points of functional . p (> 0 when separated)
    double residual = 0;            // |sum lambda p| when inside, max(0, -margin) otherwise
    double distance = 0;            // distance from the origin to the hull

    json to_json() const {
        json j{{"contains_origin", contains_origin}, {"exact", exact}, {"residual", residual}, {"distance", distance}};
        if (contains_origin)
            j["lambda"] = lambda;
        else {
            j["functional"] = std::vector<double>(functional.data(), functional.data() + functional.size());
            j["margin"] = margin;
        }
        return j;
    }
};

inline HullCertificate origin_in_hull(const std::vector<Vec>& pts) {
    if (pts.empty()) throw InputError("no generators");
    int d = int(pts[0].size());
    std::vector<std::vector<double>> P;
    for (auto& p : pts) P.push_back(std::vector<double>(p.data(), p.data() + d));
    auto r = wolfe_min_norm<double>(P, 1e-15);
    double dist = std::sqrt(std::max(0.0, r.norm2));
    HullCertificate h;
    h.distance = dist;
    bool inside = dist <= 1e-12;
    if (dist > 1e-12 && dist < 1e-8) {
        using boost::multiprecision::cpp_rational;
        std::vector<std::vector<cpp_rational>> Q;
        for (auto& p : P) {
            std::vector<cpp_rational> q;
            for (double v : p) q.push_back(cpp_rational(v));
            Q.push_back(q);
        }
        auto e = wolfe_min_norm<cpp_rational>(Q, cpp_rational(0));
        h.exact = true;
        inside = e.norm2 == 0;
        h.distance = std::sqrt(e.norm2.convert_to<double>());
        for (int i = 0; i < int(P.size()); ++i) r.lambda[i] = e.lambda[i].convert_to<double>();
        for (int k = 0; k < d; ++k) r.x[k] = e.x[k].convert_to<double>();
    }
    h.contains_origin = inside;
    if (inside) {
        h.lambda = r.lambda;
        Vec s = Vec::Zero(d);
        for (std::size_t i = 0; i < pts.size(); ++i) s += r.lambda[i] * pts[i];
        h.residual = s.norm();
    } else {
        Vec f(d);
        for (int k = 0; k < d; ++k) f[k] = r.x[k];
        f /= f.norm();
        h.functional = f;
        h.margin = kInf;
        for (auto& p : pts) h.margin = std::min(h.margin, f.dot(p));
        h.residual = std::max(0.0, -h.margin);
    }
    return h;
}

// ---- saddle cone surfaces -----------------------------------------------------------------

// A positively homogeneous map from the plane into a normed space, linear on
// each convex sector between consecutive fan rays.
struct SaddleConeSurface {
    int ambient_dim = 3;
    Norm ambient;
    std::vector<Vec2> fan;  // counter-clockwise unit directions
    std::vector<Mat> maps;  // sector i lies between fan[i] and fan[i+1]; ambient_dim x 2

    int sectors() const { return int(fan.size()); }

    void validate() const {
        int k = sectors();
        if (k < 2 || int(maps.size()) != k) throw ValidationError("surface needs matching fan and sector maps");
        if (ambient.dim() != ambient_dim) throw ValidationError("ambient norm dimension mismatch");
        double total = 0;
        for (int i = 0; i < k; ++i) {
            const Vec2 &a = fan[i], &b = fan[(i + 1) % k];
            double ang = std::atan2(cross2(a, b), a.dot(b));
            if (ang <= 0) ang += 2 * M_PI;
            if (ang > M_PI + 1e-12) throw ValidationError("sector " + std::to_string(i) + " is not convex");
            total += ang;
            const Mat& A = maps[i];
            if (A.rows() != ambient_dim || A.cols() != 2) throw ValidationError("sector map has the wrong shape");
            Eigen::JacobiSVD<Mat> svd(A);
            auto sv = svd.singularValues();
            if (!(sv[1] > 1e-12 * sv[0])) throw ValidationError("sector " + std::to_string(i) + " image is degenerate");
            Vec u = A * Vec(b), v = maps[(i + 1) % k] * Vec(b);
            if ((u - v).norm() > 1e-10 * std::max(1.0, u.norm()))
                throw ValidationError("sector maps " + std::to_string(i) + " and " + std::to_string((i + 1) % k) +
                                      " disagree on their shared ray");
        }
        if (std::abs(total - 2 * M_PI) > 1e-9) throw ValidationError("fan does not wind once around the origin");
    }

    // Sector containing the plane point x (by angle).
    int sector_of(const Vec2& x) const {
        int k = sectors();
        for (int i = 0; i < k; ++i) {
            const Vec2 &a = fan[i], &b = fan[(i + 1) % k];
            if (cross2(a, x) >= -1e-15 * x.norm() && cross2(x, b) >= -1e-15 * x.norm()) return i;
        }
        return 0;
    }

    Vec image(const Vec2& x) const { return maps[sector_of(x)] * Vec(x); }

    // Ambient generators: unit images of the rays and of one bisector per sector.
    std::vector<Vec> generators() const {
        std::vector<Vec> g;
        int k = sectors();
        for (int i = 0; i < k; ++i) {
            Vec r = maps[i] * Vec(fan[i]);
            g.push_back(r / ambient(r));
            Vec2 mid = fan[i] + fan[(i + 1) % k];
            if (mid.norm() < 1e-12) mid = Vec2(-fan[i].y(), fan[i].x());
            Vec b = maps[i] * Vec(mid.normalized());
            g.push_back(b / ambient(b));
        }
        return g;
    }

    // Ambient length of a plane polyline, split at ray crossings.
    double polyline_length(const std::vector<Vec2>& pts) const {
        double L = 0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            auto cuts = ray_cuts(pts[i], pts[i + 1]);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                Vec2 a = pts[i] + cuts[k] * (pts[i + 1] - pts[i]), b = pts[i] + cuts[k + 1] * (pts[i + 1] - pts[i]);
                Vec2 mid = 0.5 * (a + b);
                if (mid.norm() == 0) continue;
                L += ambient(Vec(maps[sector_of(mid)] * Vec(Vec2(b - a))));
            }
        }
        return L;
    }

    // Parameters in [0, 1] where segment [a, b] crosses fan rays, with 0 and 1.
    std::vector<double> ray_cuts(const Vec2& a, const Vec2& b) const {
        std::vector<double> t{0.0, 1.0};
        Vec2 d = b - a;
        for (auto& r : fan) {
            double den = cross2(r, d);
            if (std::abs(den) < 1e-300) continue;
            double s = -cross2(r, a) / den;  // cross(r, a + s d) = 0
            if (s > 0 && s < 1 && (a + s * d).dot(r) > 0) t.push_back(s);
        }
        std::sort(t.begin(), t.end());
        return t;
    }

    json to_json() const {
        json fj = json::array(), mj = json::array();
        for (auto& f : fan) fj.push_back({f.x(), f.y()});
        for (auto& m : maps) mj.push_back(detail::mat_to_json(m));
        return json{{"ambient_dim", ambient_dim}, {"ambient_norm", ambient.to_json()}, {"fan", fj}, {"sector_maps", mj}};
    }

    static SaddleConeSurface from_json(const json& j) {
        try {
            SaddleConeSurface s;
            s.ambient_dim = j.at("ambient_dim").get<int>();
            s.ambient = norm_from_json(j.at("ambient_norm"));
            for (auto& f : j.at("fan")) s.fan.push_back(Vec2(f.at(0).get<double>(), f.at(1).get<double>()).normalized());
            for (auto& m : j.at("sector_maps")) s.maps.push_back(detail::mat_from_json(m));
            return s;
        } catch (const json::exception& e) {
            throw InputError(std::string("surface JSON: ") + e.what());
        }
    }
};

struct SaddleVerdict {
    bool saddle = false;
    HullCertificate certificate;
    json to_json() const { return json{{"saddle", saddle}, {"certificate", certificate.to_json()}}; }
};

inline SaddleVerdict is_saddle_cone(const SaddleConeSurface& s) {
    s.validate();
    SaddleVerdict v;
    v.certificate = origin_in_hull(s.generators());
    v.saddle = v.certificate.contains_origin;
    return v;
}

// Graph of a function over the plane, linear on sectors: x -> (x, h(x)) with
// h(fan_i) = heights_i, composed into the ambient space of dimension 3.
inline SaddleConeSurface graph_cone(const std::vector<double>& angles, const std::vector<double>& heights,
                                    const Norm& ambient) {
    SaddleConeSurface s;
    s.ambient_dim = 3;
    s.ambient = ambient;
    int k = int(angles.size());
    for (double a : angles) s.fan.push_back(Vec2(std::cos(a), std::sin(a)));
    for (int i = 0; i < k; ++i) {
        Vec2 a = s.fan[i], b = s.fan[(i + 1) % k];
        Mat2 M;
        M << a.x(), a.y(), b.x(), b.y();
        Vec2 g = M.inverse() * Vec2(heights[i], heights[(i + 1) % k]);
        Mat A(3, 2);
        A << 1, 0, 0, 1, g.x(), g.y();
        s.maps.push_back(A);
    }
    return s;
}

// Random graph cone with k in {4, 5, 6} sectors (each below 0.9 pi), heights
// in [-1, 1] and an lp ambient norm with p in [1.5, 4]. With saddle = false
// all heights are positive, which puts every generator above the plane.
inline SaddleConeSurface random_graph_cone(Rng& rng, bool saddle) {
    for (;;) {
        int k = rng.integer(4, 6);
        std::vector<double> w(k);
        double tot = 0;
        for (auto& x : w) tot += (x = rng.uniform(0.3, 1.0));
        std::vector<double> ang(k);
        bool ok = true;
        double acc = rng.uniform(0, 2 * M_PI);
        for (int i = 0; i < k; ++i) {
            ang[i] = acc;
            double step = 2 * M_PI * w[i] / tot;
            if (step >= 0.9 * M_PI) ok = false;
            acc += step;
        }
        std::vector<double> h(k);
        for (auto& z : h) z = saddle ? rng.uniform(-1, 1) : rng.uniform(0.1, 1);
        double p = rng.uniform(1.5, 4);
        if (!ok) continue;
        auto s = graph_cone(ang, h, lp(3, p));
        if (is_saddle_cone(s).saddle == saddle) return s;
    }
}

// ---- triangulated surfaces ----------------------------------------------------------------

struct Mesh {
    std::vector<Vec> vertices;
    std::vector<std::array<int, 3>> triangles;

    static Mesh from_json(const json& j) {
        try {
            Mesh m;
            for (auto& v : j.at("vertices")) m.vertices.push_back(detail::vec_from_json(v));
            for (auto& t : j.at("triangles")) m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
            return m;
        } catch (const json::exception& e) {
            throw InputError(std::string("mesh JSON: ") + e.what());
        }
    }
};

struct VertexSaddle {
    int vertex = 0;
    bool interior = false;
    bool saddle = false;
    double distance = 0;  // from the origin to the generator hull
};

struct SurfaceReport {
    std::vector<VertexSaddle> vertices;
    int interior = 0, failures = 0, skipped = 0;
    json to_json() const {
        json v = json::array();
        for (auto& x : vertices)
            if (x.interior && !x.saddle) v.push_back({{"vertex", x.vertex}, {"distance", x.distance}});
        return json{{"interior", interior}, {"failures", failures}, {"skipped_boundary", skipped}, {"failing_vertices", v}};
    }
};

// Runs the cone test at every interior vertex with the link directions and
// the incident triangle directions as generators. Boundary vertices are skipped.
inline SurfaceReport is_saddle_surface(const Mesh& m) {
    int n = int(m.vertices.size());
    std::vector<std::vector<int>> inc(n);
    for (int t = 0; t < int(m.triangles.size()); ++t) {
        const auto& tr = m.triangles[t];
        for (int k : tr)
            if (k < 0 || k >= n) throw InputError("triangle references a missing vertex");
        Vec a = m.vertices[tr[1]] - m.vertices[tr[0]], b = m.vertices[tr[2]] - m.vertices[tr[0]];
        double area2 = a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b);
        if (!(area2 > 1e-24 * a.squaredNorm() * b.squaredNorm())) throw InputError("degenerate triangle " + std::to_string(t));
        for (int k : tr) inc[k].push_back(t);
    }
    SurfaceReport rep;
    rep.vertices.resize(n);
    parallel_for(std::size_t(n), [&](std::size_t v) {
        VertexSaddle& vs = rep.vertices[v];
        vs.vertex = int(v);
        std::map<int, int> edge_use;
        for (int t : inc[v])
            for (int k : m.triangles[t])
                if (k != int(v)) ++edge_use[k];
        vs.interior = !inc[v].empty();
        for (auto& [u, c] : edge_use)
            if (c != 2) vs.interior = false;
        if (!vs.interior) return;
        std::vector<Vec> gen;
        for (auto& [u, c] : edge_use) gen.push_back((m.vertices[u] - m.vertices[v]).normalized());
        for (int t : inc[v]) {
            Vec cen = (m.vertices[m.triangles[t][0]] + m.vertices[m.triangles[t][1]] + m.vertices[m.triangles[t][2]]) / 3.0;
            gen.push_back((cen - m.vertices[v]).normalized());
        }
        auto h = origin_in_hull(gen);
        vs.saddle = h.contains_origin;
        vs.distance = h.distance;
    });
    for (auto& vs : rep.vertices) {
        if (!vs.interior) {
            ++rep.skipped;
            continue;
        }
        ++rep.interior;
        if (!vs.saddle) ++rep.failures;
    }
    return rep;
}

// ---- induced complexes ---------------------------------------------------------------------

// One face per sector with the pullback norm; all faces use the plane chart,
// so gluings along shared rays are identities. Equal sector maps give a
// single whole-plane face.
inline Complex induced_complex(const SaddleConeSurface& s) {
    s.validate();
    int k = s.sectors();
    bool same = true;
    for (int i = 1; i < k; ++i)
        if ((s.maps[i] - s.maps[0]).norm() > 1e-14 * s.maps[0].norm()) same = false;
    std::vector<Face> faces;
    std::vector<Gluing> gl;
    if (same) {
        faces.push_back(Face{0, Polygon::plane(), pullback(s.ambient, s.maps[0])});
    } else {
        for (int i = 0; i < k; ++i)
            faces.push_back(Face{i, Polygon::unbounded({Vec2(0, 0)}, s.fan[(i + 1) % k], s.fan[i]), pullback(s.ambient, s.maps[i])});
        for (int i = 0; i < k; ++i) {
            Gluing g;
            g.face_a = i, g.edge_a = 0, g.face_b = (i + 1) % k, g.edge_b = 1;
            gl.push_back(g);
        }
    }
    Complex c(std::move(faces), std::move(gl));
    auto rep = c.validate();
    if (!rep.valid) throw ConstructionError("induced complex failed validation: " + rep.errors.front());
    return c;
}

// Plane coordinates of a point of the induced complex (charts are the plane).
inline Vec2 plane_point(const Point& p) { return p.x; }

// ---- the three-case witness ----------------------------------------------------------------

struct CaseReport {
    int case_id = 0;
    std::vector<double> ts, lengths;  // sampled family t -> len(gamma_t)
    double min_second_difference = 0;
    double midpoint_gap = 0;          // (len0 + len1) / 2 - len(1/2)
    bool strictly_convex = false;
    // Case 3.
    int generator = -1;
    double d0f = 0;
    double apex_length = 0;
    double len0 = 0, len1 = 0;
    bool reduction_holds = false;

    json to_json() const {
        json j{{"case", case_id}, {"len0", len0}, {"len1", len1}};
        if (case_id != 3) {
            j["t"] = ts;
            j["lengths"] = lengths;
            j["min_second_difference"] = min_second_difference;
            j["midpoint_gap"] = midpoint_gap;
            j["strictly_convex"] = strictly_convex;
        } else {
            j["generator"] = generator;
            j["d0f"] = d0f;
            j["apex_length"] = apex_length;
            j["reduction_holds"] = reduction_holds;
        }
        return j;
    }
};

namespace detail {

inline bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a), d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
    Vec2 d = b - a;
    double t = d.squaredNorm() > 0 ? std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
    return (a + t * d - x).norm();
}

// Winding number of a closed polyline around the origin.
inline int winding(const std::vector<Vec2>& loop) {
    double total = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec2 &a = loop[i], &b = loop[(i + 1) % loop.size()];
        total += std::atan2(cross2(a, b), a.dot(b));
    }
    return int(std::lround(total / (2 * M_PI)));
}

// Ray crossings of a polyline as (ray index, point), in order.
inline std::vector<std::pair<int, Vec2>> crossings(const SaddleConeSurface& s, const std::vector<Vec2>& pts) {
    std::vector<std::pair<int, Vec2>> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Vec2 a = pts[i], d = pts[i + 1] - pts[i];
        std::vector<std::pair<double, int>> hits;
        for (int r = 0; r < s.sectors(); ++r) {
            double den = cross2(s.fan[r], d);
            if (std::abs(den) < 1e-300) continue;
            double t = -cross2(s.fan[r], a) / den;
            if (t > 1e-12 && t < 1 - 1e-12 && (a + t * d).dot(s.fan[r]) > 0) hits.push_back({t, r});
        }
        // Vertices lying on a ray count once.
        if (i + 1 < pts.size() - 1)
            for (int r = 0; r < s.sectors(); ++r)
                if (std::abs(cross2(s.fan[r], pts[i + 1])) <= 1e-12 * pts[i + 1].norm() && pts[i + 1].dot(s.fan[r]) > 0)
                    hits.push_back({1.0, r});
        std::sort(hits.begin(), hits.end());
        for (auto [t, r] : hits) out.push_back({r, a + t * d});
    }
    return out;
}

}  // namespace detail

// Classifies two broken lines with common endpoints and builds the matching
// deformation (Cases 1 and 2) or the first-order certificate (Case 3).
inline CaseReport case_witness(const SaddleConeSurface& s, const VertexPath& g0, const VertexPath& g1, int samples = 33) {
    s.validate();
    auto plane = [](const VertexPath& g) {
        std::vector<Vec2> v;
        for (auto& p : g.vertices) v.push_back(plane_point(p));
        return v;
    };
    std::vector<Vec2> a = plane(g0), b = plane(g1);
    if ((a.front() - b.front()).norm() > 1e-12 || (a.back() - b.back()).norm() > 1e-12)
        throw InputError("paths must share endpoints");
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            if (detail::segments_cross(a[i], a[i + 1], b[j], b[j + 1]))
                throw InputError("paths meet between their endpoints; split at the last common point");
    for (std::size_t i = 1; i + 1 < a.size(); ++i)
        for (std::size_t j = 1; j + 1 < b.size(); ++j)
            if ((a[i] - b[j]).norm() <= 1e-12)
                throw InputError("paths share an interior vertex; split at the last common point");
    CaseReport rep;
    rep.len0 = s.polyline_length(a);
    rep.len1 = s.polyline_length(b);
    Vec2 p = a.front(), q = a.back();
    auto through_apex = [](const std::vector<Vec2>& v) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (detail::point_segment_distance(Vec2::Zero(), v[i], v[i + 1]) <= 1e-12) return true;
        return false;
    };
    double L = std::max(rep.len0, rep.len1);
    auto finish = [&](const std::function<std::vector<Vec2>(double)>& fam) {
        for (int i = 0; i < samples; ++i) {
            double t = double(i) / (samples - 1);
            rep.ts.push_back(t);
            rep.lengths.push_back(s.polyline_length(fam(t)));
        }
        rep.min_second_difference = kInf;
        for (int i = 1; i + 1 < samples; ++i)
            rep.min_second_difference =
                std::min(rep.min_second_difference, rep.lengths[i - 1] - 2 * rep.lengths[i] + rep.lengths[i + 1]);
        double mid = s.polyline_length(fam(0.5));
        rep.midpoint_gap = 0.5 * (rep.lengths.front() + rep.lengths.back()) - mid;
        rep.strictly_convex = rep.min_second_difference >= 1e-8 * L * std::pow(1.0 / (samples - 1), 2) &&
                              rep.midpoint_gap > 1e-8 * L;
    };
    bool apex0 = through_apex(a), apex1 = through_apex(b);
    if (apex0 || apex1) {
        rep.case_id = 1;
        const std::vector<Vec2>& other = apex0 ? b : a;
        // gamma_t = [p, t x_1, ..., t x_k, q] with the ray crossings of the other path as vertices.
        std::vector<Vec2> xs;
        for (auto& [r, x] : detail::crossings(s, other)) xs.push_back(x);
        for (std::size_t i = 1; i + 1 < other.size(); ++i) {
            bool on_ray = false;
            for (auto& x : xs)
                if ((x - other[i]).norm() <= 1e-12) on_ray = true;
            if (!on_ray) xs.push_back(other[i]);
        }
        // Keep the path order.
        std::vector<std::pair<double, Vec2>> ordered;
        for (auto& x : xs) {
            double best = kInf, pos = 0, acc = 0;
            for (std::size_t i = 0; i + 1 < other.size(); ++i) {
                double dd = detail::point_segment_distance(x, other[i], other[i + 1]);
                double seg = (other[i + 1] - other[i]).norm();
                if (dd < best) best = dd, pos = acc + (x - other[i]).norm();
                acc += seg;
            }
            ordered.push_back({pos, x});
        }
        std::sort(ordered.begin(), ordered.end(), [](auto& u, auto& v) { return u.first < v.first; });
        bool flip = !apex0;  // family runs from the apex path to the other one
        finish([&](double t) {
            double tt = flip ? 1 - t : t;
            std::vector<Vec2> v{p};
            for (auto& [pos, x] : ordered) v.push_back(tt * x);
            v.push_back(q);
            return v;
        });
        return rep;
    }
    std::vector<Vec2> loop = a;
    for (auto it = b.rbegin() + 1; it + 1 != b.rend(); ++it) loop.push_back(*it);
    if (detail::winding(loop) == 0) {
        rep.case_id = 2;
        auto ca = detail::crossings(s, a), cb = detail::crossings(s, b);
        bool same = ca.size() == cb.size();
        for (std::size_t i = 0; same && i < ca.size(); ++i) same = ca[i].first == cb[i].first;
        if (!same) throw InputError("paths cross different ray sequences; supply broken lines straight within sectors");
        finish([&](double t) {
            std::vector<Vec2> v{p};
            for (std::size_t i = 0; i < ca.size(); ++i) v.push_back((1 - t) * ca[i].second + t * cb[i].second);
            v.push_back(q);
            return v;
        });
        return rep;
    }
    rep.case_id = 3;
    Vec rp = s.image(p), rq = s.image(q);
    if (rp.norm() == 0 || rq.norm() == 0) throw InputError("an endpoint is the apex");
    auto cert = origin_in_hull(s.generators());
    auto gens = s.generators();
    Vec grad = s.ambient.grad(Vec(-rp)) + s.ambient.grad(Vec(-rq));
    double best = -kInf;
    for (std::size_t j = 0; j < gens.size(); ++j) {
        if (cert.contains_origin && cert.lambda[j] <= 0) continue;
        double v = grad.dot(gens[j]);
        if (v > best) best = v, rep.generator = int(j);
    }
    rep.d0f = best;
    rep.apex_length = s.ambient(rp) + s.ambient(rq);
    rep.reduction_holds = rep.len0 >= rep.apex_length - 1e-12 && rep.len1 >= rep.apex_length - 1e-12;
    return rep;
}

}  // namespace fpl
