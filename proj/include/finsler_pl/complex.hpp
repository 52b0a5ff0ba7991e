#pragma once
// Two-dimensional Finsler PL complexes: convex polygons (possibly unbounded)
// in their own charts, each with a norm, glued edge-to-edge by affine maps.

#include "norms.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>

namespace fpl {

// ---- polygons ------------------------------------------------------------------

struct Edge {
    Vec2 origin, dir;    // points origin + t * dir
    double tmax = 1.0;   // kInf for rays; t ranges over [0, tmax]
    bool ray() const { return std::isinf(tmax); }
    Vec2 at(double t) const { return origin + t * dir; }
    double param(const Vec2& x) const { return (x - origin).dot(dir) / dir.squaredNorm(); }
    // Euclidean distance from x to the closed edge.
    double distance(const Vec2& x) const {
        double t = std::clamp(param(x), 0.0, tmax);
        return (x - at(t)).norm();
    }
};

// A closed convex region given by a counter-clockwise vertex chain. Unbounded
// regions add two rays: the boundary arrives from infinity along -r_in into
// the first vertex and leaves the last vertex along r_out. A region with no
// vertices at all is the whole plane.
class Polygon {
public:
    Polygon() = default;

    static Polygon bounded(std::vector<Vec2> v) {
        Polygon p;
        p.vertices_ = std::move(v);
        p.unbounded_ = false;
        p.build();
        return p;
    }
    static Polygon unbounded(std::vector<Vec2> v, Vec2 r_in, Vec2 r_out) {
        Polygon p;
        p.vertices_ = std::move(v);
        p.unbounded_ = true;
        p.r_in_ = r_in;
        p.r_out_ = r_out;
        p.build();
        return p;
    }
    static Polygon plane() {
        Polygon p;
        p.unbounded_ = true;
        p.whole_ = true;
        return p;
    }

    bool is_unbounded() const { return unbounded_; }
    bool is_plane() const { return whole_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const Vec2& r_in() const { return r_in_; }
    const Vec2& r_out() const { return r_out_; }
    const std::vector<Edge>& edges() const { return edges_; }
    int edge_count() const { return int(edges_.size()); }

    // Outward unit normal and offset of edge i: n.x <= c inside.
    const Vec2& normal(int i) const { return normals_[i]; }
    double offset(int i) const { return offsets_[i]; }

    // Direction of travel along edge i in counter-clockwise boundary order.
    Vec2 travel(int i) const {
        if (unbounded_ && i == 0) return -edges_[0].dir;
        return edges_[i].dir;
    }

    double scale() const {
        double s = 1;
        for (auto& v : vertices_) s = std::max(s, v.cwiseAbs().maxCoeff());
        return s;
    }

    double violation(const Vec2& x) const {
        double m = -kInf;
        for (int i = 0; i < edge_count(); ++i) m = std::max(m, normals_[i].dot(x) - offsets_[i]);
        return whole_ ? -kInf : m;
    }
    bool contains(const Vec2& x, double slack = 1e-12) const {
        return violation(x) <= slack * std::max(1.0, x.cwiseAbs().maxCoeff());
    }

    // Edges whose closed set contains x within tol.
    std::vector<int> edges_at(const Vec2& x, double tol = 1e-11) const {
        std::vector<int> out;
        double s = tol * std::max(1.0, x.cwiseAbs().maxCoeff());
        for (int i = 0; i < edge_count(); ++i)
            if (edges_[i].distance(x) <= s) out.push_back(i);
        return out;
    }

    // Checks convexity and nondegeneracy; returns an empty string when fine.
    std::string check() const {
        if (whole_) return "";
        int n = int(vertices_.size());
        if (!unbounded_) {
            if (n < 3) return "bounded face needs at least 3 vertices";
            double area = 0;
            for (int i = 0; i < n; ++i) area += cross2(vertices_[i], vertices_[(i + 1) % n]);
            if (!(area > 1e-12 * scale() * scale())) return "bounded face must be counter-clockwise with positive area";
        } else {
            if (n < 1) return "unbounded face needs at least one vertex";
            if (r_in_.norm() == 0 || r_out_.norm() == 0) return "rays must be nonzero";
        }
        for (int i = 0; i < edge_count(); ++i)
            if (edges_[i].dir.norm() < 1e-12 * scale()) return "zero-length edge " + std::to_string(i);
        double total = 0;
        int m = edge_count();
        int corners = unbounded_ ? m - 1 : m;
        for (int k = 0; k < corners; ++k) {
            Vec2 a = travel(k).normalized(), b = travel((k + 1) % m).normalized();
            double c = cross2(a, b);
            if (c < -1e-12) return "boundary turns clockwise at vertex " + std::to_string((k + 1) % n);
            total += std::atan2(c, a.dot(b));
        }
        if (unbounded_) {
            if (total > M_PI + 1e-12) return "unbounded face turns by more than pi";
            if (total > M_PI - 1e-12 && n < 2) return "degenerate sector (rays coincide)";
        } else if (std::abs(total - 2 * M_PI) > 1e-9) {
            return "boundary does not wind once";
        }
        return "";
    }

    json to_json() const {
        json j;
        json v = json::array();
        for (auto& p : vertices_) v.push_back({p.x(), p.y()});
        j["vertices"] = v;
        if (unbounded_ && !whole_) j["rays"] = {{r_in_.x(), r_in_.y()}, {r_out_.x(), r_out_.y()}};
        if (whole_) j["plane"] = true;
        return j;
    }

    // Clip against an axis-aligned box; returns the polygon vertices of the intersection.
    std::vector<Vec2> clip_box(const Vec2& lo, const Vec2& hi) const {
        std::vector<Vec2> poly = {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
        for (int i = 0; i < edge_count(); ++i) {
            std::vector<Vec2> out;
            const Vec2& nrm = normals_[i];
            double c = offsets_[i];
            for (std::size_t k = 0; k < poly.size(); ++k) {
                const Vec2& a = poly[k];
                const Vec2& b = poly[(k + 1) % poly.size()];
                double fa = nrm.dot(a) - c, fb = nrm.dot(b) - c;
                if (fa <= 0) out.push_back(a);
                if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) out.push_back(a + (fa / (fa - fb)) * (b - a));
            }
            poly = std::move(out);
            if (poly.empty()) break;
        }
        return poly;
    }

private:
    void build() {
        edges_.clear();
        int n = int(vertices_.size());
        if (!unbounded_) {
            for (int i = 0; i < n; ++i) edges_.push_back({vertices_[i], vertices_[(i + 1) % n] - vertices_[i], 1.0});
        } else {
            if (n == 0) return;
            edges_.push_back({vertices_[0], r_in_, kInf});
            for (int i = 0; i + 1 < n; ++i) edges_.push_back({vertices_[i], vertices_[i + 1] - vertices_[i], 1.0});
            edges_.push_back({vertices_[n - 1], r_out_, kInf});
        }
        normals_.clear();
        offsets_.clear();
        for (int i = 0; i < edge_count(); ++i) {
            Vec2 d = travel(i);
            Vec2 nrm(d.y(), -d.x());
            double l = nrm.norm();
            nrm = l > 0 ? Vec2(nrm / l) : Vec2(0, 0);
            normals_.push_back(nrm);
            offsets_.push_back(nrm.dot(edges_[i].origin));
        }
    }

    std::vector<Vec2> vertices_;
    bool unbounded_ = false, whole_ = false;
    Vec2 r_in_{0, 0}, r_out_{0, 0};
    std::vector<Edge> edges_;
    std::vector<Vec2> normals_;
    std::vector<double> offsets_;
};

// ---- complex --------------------------------------------------------------------

struct Face {
    int id = 0;
    Polygon poly;
    Norm norm;
};

// Affine map phi(x) = matrix x + offset from face A's chart to face B's chart,
// restricted to a bijection between edge a of A and edge b of B.
struct Gluing {
    int face_a = 0, edge_a = 0, face_b = 0, edge_b = 0;  // face indices, not ids
    Mat2 matrix = Mat2::Identity();
    Vec2 offset = Vec2::Zero();
    // Derived edge-parameter map t_b = alpha * t_a + beta.
    double alpha = 1, beta = 0;

    Vec2 forward(const Vec2& x) const { return matrix * x + offset; }
    Vec2 backward(const Vec2& y) const { return matrix.inverse() * (y - offset); }
};

struct Point {
    int face = -1;  // index into Complex::faces()
    Vec2 x = Vec2::Zero();
};

inline bool operator==(const Point& a, const Point& b) { return a.face == b.face && a.x == b.x; }

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool smooth = true;
    double worst_isometry_defect = 0;
    double worst_cycle_defect = 0;
    int faces = 0, gluings = 0;
    json to_json() const {
        return {{"valid", valid},
                {"errors", errors},
                {"warnings", warnings},
                {"smooth", smooth},
                {"worst_isometry_defect", worst_isometry_defect},
                {"worst_cycle_defect", worst_cycle_defect},
                {"faces", faces},
                {"gluings", gluings}};
    }
};

// Gluings that advance one period of a periodic complex: face_a lives in
// period k and face_b in period k + 1.
struct PeriodicSpec {
    std::vector<Gluing> period_gluings;
    int max_periods = 4096;
};

class Complex {
public:
    Complex() = default;
    Complex(std::vector<Face> faces, std::vector<Gluing> gluings) : faces_(std::move(faces)), gluings_(std::move(gluings)) {
        index();
    }

    const std::vector<Face>& faces() const { return faces_; }
    const Face& face(int i) const { return faces_.at(i); }
    const std::vector<Gluing>& gluings() const { return gluings_; }
    int face_count() const { return int(faces_.size()); }
    int face_index(int id) const {
        auto it = id_index_.find(id);
        if (it == id_index_.end()) throw InputError("unknown face id " + std::to_string(id));
        return it->second;
    }
    bool smooth() const {
        for (auto& f : faces_)
            if (!f.norm.smooth()) return false;
        return true;
    }
    const Tolerances& tol() const { return tol_; }
    void set_tolerances(const Tolerances& t) { tol_ = t; }

    const std::optional<PeriodicSpec>& periodic() const { return periodic_; }
    void set_periodic(PeriodicSpec p) { periodic_ = std::move(p); }

    // (gluing index, true when this edge is side A) for every gluing on (face, edge).
    const std::vector<std::pair<int, bool>>& edge_gluings(int face, int edge) const {
        return edge_gluings_[face][edge];
    }

    bool validated() const { return validated_; }

    ValidationReport validate();

    void require_valid() {
        auto r = validate();
        if (!r.valid) {
            std::string msg = "complex failed validation:";
            for (auto& e : r.errors) msg += " " + e + ";";
            throw ValidationError(msg);
        }
    }

    Point point(int face_id, double x, double y) const { return Point{face_index(face_id), Vec2(x, y)}; }

    bool contains(const Point& p) const {
        return p.face >= 0 && p.face < face_count() && faces_[p.face].poly.contains(p.x, tol_.slack * 10);
    }

    // Every (face, chart point) representing the same point of the quotient.
    std::vector<Point> incident(const Point& p) const {
        std::vector<Point> reps{p};
        for (std::size_t k = 0; k < reps.size(); ++k) {
            Point cur = reps[k];
            const auto& poly = faces_[cur.face].poly;
            for (int e : poly.edges_at(cur.x)) {
                for (auto [gi, is_a] : edge_gluings_[cur.face][e]) {
                    const Gluing& g = gluings_[gi];
                    Point img = map_across(g, is_a, cur.x);
                    bool seen = false;
                    for (auto& r : reps)
                        if (r.face == img.face && (r.x - img.x).norm() <= 1e-9 * std::max(1.0, img.x.norm())) {
                            seen = true;
                            break;
                        }
                    if (!seen) reps.push_back(img);
                    if (reps.size() > 4096) throw ResourceError("incidence closure exceeds 4096 representatives");
                }
            }
        }
        return reps;
    }

    // Representatives together with the linear chart change from p's face.
    std::vector<std::pair<Point, Mat2>> incident_frames(const Point& p) const {
        std::vector<std::pair<Point, Mat2>> reps{{p, Mat2::Identity()}};
        for (std::size_t k = 0; k < reps.size(); ++k) {
            auto [cur, L] = reps[k];
            for (int e : faces_[cur.face].poly.edges_at(cur.x)) {
                for (auto [gi, is_a] : edge_gluings_[cur.face][e]) {
                    const Gluing& g = gluings_[gi];
                    Point img = map_across(g, is_a, cur.x);
                    bool seen = false;
                    for (auto& r : reps)
                        if (r.first.face == img.face && (r.first.x - img.x).norm() <= 1e-9 * std::max(1.0, img.x.norm()))
                            seen = true;
                    if (!seen) reps.push_back({img, linear_across(g, is_a) * L});
                    if (reps.size() > 4096) throw ResourceError("incidence closure exceeds 4096 representatives");
                }
            }
        }
        return reps;
    }

    // Maps a point on edge (g.face_a, g.edge_a) to face_b (or reverse) through
    // the edge parametrization, which is exact on the edge.
    Point map_across(const Gluing& g, bool from_a, const Vec2& x) const {
        if (from_a) {
            const Edge& ea = faces_[g.face_a].poly.edges()[g.edge_a];
            const Edge& eb = faces_[g.face_b].poly.edges()[g.edge_b];
            double t = ea.param(x);
            return {g.face_b, eb.at(g.alpha * t + g.beta)};
        }
        const Edge& ea = faces_[g.face_a].poly.edges()[g.edge_a];
        const Edge& eb = faces_[g.face_b].poly.edges()[g.edge_b];
        double t = eb.param(x);
        return {g.face_a, ea.at((t - g.beta) / g.alpha)};
    }

    // Linear part of the gluing as seen from the given side.
    Mat2 linear_across(const Gluing& g, bool from_a) const { return from_a ? g.matrix : Mat2(g.matrix.inverse()); }

    Point transition(const Point& p, int target_face) const {
        for (auto& r : incident(p))
            if (r.face == target_face) return r;
        throw IncidenceError("point is not incident to face " + std::to_string(faces_.at(target_face).id));
    }

    Point canonical(const Point& p) const {
        auto reps = incident(p);
        Point best = reps[0];
        for (auto& r : reps) {
            if (r.face < best.face ||
                (r.face == best.face && (r.x.x() < best.x.x() || (r.x.x() == best.x.x() && r.x.y() < best.x.y()))))
                best = r;
        }
        return best;
    }

    // Cheap proximity measure used for deduplication and convergence checks.
    // Exact when the points share a face; otherwise uses the affine extension
    // of a gluing between the two faces, or a detour through a shared vertex.
    double approx_distance(const Point& a, const Point& b) const {
        if (a.face == b.face) return (a.x - b.x).norm();
        double best = kInf;
        for (auto& ra : incident(a))
            if (ra.face == b.face) best = std::min(best, (ra.x - b.x).norm());
        if (best < kInf) return best;
        for (int e = 0; e < faces_[a.face].poly.edge_count(); ++e)
            for (auto [gi, is_a] : edge_gluings_[a.face][e]) {
                const Gluing& g = gluings_[gi];
                int other = is_a ? g.face_b : g.face_a;
                if (other != b.face) continue;
                Vec2 y = is_a ? g.forward(a.x) : g.backward(a.x);
                best = std::min(best, (y - b.x).norm());
            }
        if (best < kInf) return best;
        // Shared vertex: route through it.
        const auto& va = faces_[a.face].poly.vertices();
        for (auto& v : va) {
            for (auto& r : incident(Point{a.face, v}))
                if (r.face == b.face) best = std::min(best, (a.x - v).norm() + (r.x - b.x).norm());
        }
        return best;
    }

    json to_json() const;
    static Complex from_json(const json& j);

private:
    void index() {
        id_index_.clear();
        for (int i = 0; i < face_count(); ++i) {
            if (id_index_.count(faces_[i].id)) throw InputError("duplicate face id " + std::to_string(faces_[i].id));
            id_index_[faces_[i].id] = i;
        }
        edge_gluings_.assign(faces_.size(), {});
        for (int i = 0; i < face_count(); ++i) edge_gluings_[i].assign(faces_[i].poly.edge_count(), {});
        for (int k = 0; k < int(gluings_.size()); ++k) {
            auto& g = gluings_[k];
            if (g.face_a < 0 || g.face_a >= face_count() || g.face_b < 0 || g.face_b >= face_count())
                throw InputError("gluing " + std::to_string(k) + " references an unknown face");
            if (g.edge_a < 0 || g.edge_a >= faces_[g.face_a].poly.edge_count() || g.edge_b < 0 ||
                g.edge_b >= faces_[g.face_b].poly.edge_count())
                throw InputError("gluing " + std::to_string(k) + " references an unknown edge");
            const Edge& ea = faces_[g.face_a].poly.edges()[g.edge_a];
            const Edge& eb = faces_[g.face_b].poly.edges()[g.edge_b];
            double d2 = eb.dir.squaredNorm();
            g.alpha = (g.matrix * ea.dir).dot(eb.dir) / d2;
            g.beta = (g.forward(ea.origin) - eb.origin).dot(eb.dir) / d2;
            edge_gluings_[g.face_a][g.edge_a].push_back({k, true});
            edge_gluings_[g.face_b][g.edge_b].push_back({k, false});
        }
        validated_ = false;
    }

    std::vector<Face> faces_;
    std::vector<Gluing> gluings_;
    std::map<int, int> id_index_;
    std::vector<std::vector<std::vector<std::pair<int, bool>>>> edge_gluings_;
    std::optional<PeriodicSpec> periodic_;
    Tolerances tol_ = default_tolerances();
    bool validated_ = false;
};

inline ValidationReport Complex::validate() {
    ValidationReport r;
    r.faces = face_count();
    r.gluings = int(gluings_.size());
    auto fail = [&](const std::string& m) {
        r.valid = false;
        r.errors.push_back(m);
    };
    for (auto& f : faces_) {
        std::string tag = "face " + std::to_string(f.id) + ": ";
        if (std::string e = f.poly.check(); !e.empty()) fail(tag + e);
        if (!f.norm) {
            fail(tag + "missing norm");
            continue;
        }
        if (f.norm.dim() != 2) fail(tag + "norm dimension must be 2");
        auto nr = verify_norm(f.norm, 64, 1e-14, 7);
        if (!nr.strictly_convex) fail(tag + "norm is not strictly convex (worst turn " + std::to_string(nr.worst_turn) + ")");
        if (!f.norm.smooth()) r.smooth = false;
        if (auto* e = dynamic_cast<const EllipsoidalNorm*>(&f.norm.impl()); e && e->condition() > 1e3)
            r.warnings.push_back(tag + "ill-conditioned ellipsoidal norm (condition " + std::to_string(e->condition()) + ")");
    }
    if (!r.valid) {
        validated_ = false;
        return r;
    }
    for (int k = 0; k < int(gluings_.size()); ++k) {
        const auto& g = gluings_[k];
        std::string tag = "gluing " + std::to_string(k) + " (face " + std::to_string(faces_[g.face_a].id) + " edge " +
                          std::to_string(g.edge_a) + " -> face " + std::to_string(faces_[g.face_b].id) + " edge " +
                          std::to_string(g.edge_b) + "): ";
        const Edge& ea = faces_[g.face_a].poly.edges()[g.edge_a];
        const Edge& eb = faces_[g.face_b].poly.edges()[g.edge_b];
        double sc = std::max(faces_[g.face_a].poly.scale(), faces_[g.face_b].poly.scale());
        double tol = tol_.structural * sc;
        if (ea.ray() != eb.ray()) {
            fail(tag + "maps a ray to a segment");
            continue;
        }
        Vec2 img_dir = g.matrix * ea.dir;
        if (std::abs(cross2(img_dir, eb.dir)) > tol * img_dir.norm() * eb.dir.norm() / sc) {
            fail(tag + "edge directions are not parallel under the map");
            continue;
        }
        if (ea.ray()) {
            if ((g.forward(ea.origin) - eb.origin).norm() > tol || g.alpha <= 0) {
                fail(tag + "ray origins or orientations do not match");
                continue;
            }
        } else {
            Vec2 p0 = g.forward(ea.at(0)), p1 = g.forward(ea.at(1));
            bool same = (p0 - eb.at(0)).norm() <= tol && (p1 - eb.at(1)).norm() <= tol;
            bool flip = (p0 - eb.at(1)).norm() <= tol && (p1 - eb.at(0)).norm() <= tol;
            if (!same && !flip) {
                fail(tag + "endpoints do not map onto the target edge");
                continue;
            }
        }
        // Isometry on the edge direction space (both orientations).
        double worst = 0;
        for (double s : {1.0, -1.0}) {
            Vec w = Vec(Vec2(s * ea.dir));
            Vec wi = Vec(Vec2(s * img_dir));
            double na = faces_[g.face_a].norm(w), nb = faces_[g.face_b].norm(wi);
            worst = std::max(worst, std::abs(na - nb) / std::max(na, 1e-300));
        }
        r.worst_isometry_defect = std::max(r.worst_isometry_defect, worst);
        if (worst > tol_.structural)
            fail(tag + "not an isometry on the edge (relative defect " + std::to_string(worst) + ")");
    }
    // Cycle consistency: within each class of glued edges, composite parameter
    // maps must agree whichever chain of gluings is followed.
    std::map<std::pair<int, int>, std::pair<double, double>> seen;  // (face, edge) -> map from root param
    for (int f = 0; f < face_count() && r.valid; ++f) {
        for (int e = 0; e < faces_[f].poly.edge_count(); ++e) {
            if (seen.count({f, e})) continue;
            seen[{f, e}] = {1.0, 0.0};
            std::vector<std::pair<int, int>> queue{{f, e}};
            for (std::size_t q = 0; q < queue.size(); ++q) {
                auto [cf, ce] = queue[q];
                auto [a0, b0] = seen[{cf, ce}];
                for (auto [gi, is_a] : edge_gluings_[cf][ce]) {
                    const Gluing& g = gluings_[gi];
                    int nf = is_a ? g.face_b : g.face_a, ne = is_a ? g.edge_b : g.edge_a;
                    double a1, b1;
                    if (is_a) {
                        a1 = g.alpha * a0;
                        b1 = g.alpha * b0 + g.beta;
                    } else {
                        a1 = a0 / g.alpha;
                        b1 = (b0 - g.beta) / g.alpha;
                    }
                    auto it = seen.find({nf, ne});
                    if (it == seen.end()) {
                        seen[{nf, ne}] = {a1, b1};
                        queue.push_back({nf, ne});
                    } else {
                        double d = std::abs(it->second.first - a1) + std::abs(it->second.second - b1);
                        r.worst_cycle_defect = std::max(r.worst_cycle_defect, d);
                        if (d > tol_.structural)
                            fail("gluing cycle through face " + std::to_string(faces_[nf].id) + " edge " +
                                 std::to_string(ne) + " is not the identity (defect " + std::to_string(d) + ")");
                    }
                }
            }
        }
    }
    validated_ = r.valid;
    return r;
}

inline json Complex::to_json() const {
    json j;
    j["schema"] = "finsler-pl/1";
    json fs = json::array();
    for (auto& f : faces_) {
        json fj = f.poly.to_json();
        fj["id"] = f.id;
        fj["dim"] = 2;
        fj["norm"] = f.norm.to_json();
        json subs = json::array();
        for (int e = 0; e < f.poly.edge_count(); ++e) {
            const Edge& ed = f.poly.edges()[e];
            json s = {{"index", e}, {"kind", ed.ray() ? "ray" : "segment"}, {"from", {ed.origin.x(), ed.origin.y()}}};
            if (ed.ray())
                s["direction"] = {ed.dir.x(), ed.dir.y()};
            else
                s["to"] = {ed.at(1).x(), ed.at(1).y()};
            subs.push_back(s);
        }
        fj["subfaces"] = subs;
        fs.push_back(fj);
    }
    j["faces"] = fs;
    auto gl_json = [&](const Gluing& g) {
        return json{{"faceA", faces_[g.face_a].id},
                    {"subA", g.edge_a},
                    {"faceB", faces_[g.face_b].id},
                    {"subB", g.edge_b},
                    {"matrix", {{g.matrix(0, 0), g.matrix(0, 1)}, {g.matrix(1, 0), g.matrix(1, 1)}}},
                    {"offset", {g.offset.x(), g.offset.y()}}};
    };
    json gs = json::array();
    for (auto& g : gluings_) gs.push_back(gl_json(g));
    j["gluings"] = gs;
    if (periodic_) {
        json pg = json::array();
        for (auto& g : periodic_->period_gluings) pg.push_back(gl_json(g));
        j["periodic"] = {{"period_gluings", pg}, {"max_periods", periodic_->max_periods}};
    }
    return j;
}

inline Complex Complex::from_json(const json& j) {
    try {
        auto v2 = [](const json& a) {
            if (!a.is_array() || a.size() != 2) throw InputError("expected a 2-vector");
            return Vec2(a[0].get<double>(), a[1].get<double>());
        };
        std::vector<Face> faces;
        for (auto& fj : j.at("faces")) {
            Face f;
            f.id = fj.at("id").get<int>();
            if (fj.value("dim", 2) != 2) throw InputError("only 2-dimensional faces are supported");
            std::vector<Vec2> vs;
            if (fj.contains("vertices"))
                for (auto& v : fj.at("vertices")) vs.push_back(v2(v));
            if (fj.value("plane", false))
                f.poly = Polygon::plane();
            else if (fj.contains("rays")) {
                auto& r = fj.at("rays");
                if (!r.is_array() || r.size() != 2) throw InputError("rays must be [r_in, r_out]");
                f.poly = Polygon::unbounded(vs, v2(r[0]), v2(r[1]));
            } else
                f.poly = Polygon::bounded(vs);
            f.norm = norm_from_json(fj.at("norm"));
            faces.push_back(std::move(f));
        }
        std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.id < b.id; });
        std::map<int, int> idx;
        for (int i = 0; i < int(faces.size()); ++i) idx[faces[i].id] = i;
        auto fidx = [&](int id) {
            auto it = idx.find(id);
            if (it == idx.end()) throw InputError("gluing references unknown face id " + std::to_string(id));
            return it->second;
        };
        auto parse_gl = [&](const json& gj) {
            Gluing g;
            g.face_a = fidx(gj.at("faceA").get<int>());
            g.edge_a = gj.at("subA").get<int>();
            g.face_b = fidx(gj.at("faceB").get<int>());
            g.edge_b = gj.at("subB").get<int>();
            if (gj.contains("matrix")) {
                Mat m = detail::mat_from_json(gj.at("matrix"));
                if (m.rows() != 2 || m.cols() != 2) throw InputError("gluing matrix must be 2x2");
                g.matrix = m;
            }
            if (gj.contains("offset")) g.offset = v2(gj.at("offset"));
            if (std::abs(g.matrix.determinant()) < 1e-14) throw InputError("gluing matrix must be invertible");
            return g;
        };
        std::vector<Gluing> gl;
        if (j.contains("gluings"))
            for (auto& gj : j.at("gluings")) gl.push_back(parse_gl(gj));
        Complex c(std::move(faces), std::move(gl));
        if (j.contains("periodic") && !j.at("periodic").is_null()) {
            PeriodicSpec ps;
            for (auto& gj : j.at("periodic").at("period_gluings")) ps.period_gluings.push_back(parse_gl(gj));
            ps.max_periods = j.at("periodic").value("max_periods", 4096);
            c.set_periodic(ps);
        }
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("complex description: ") + e.what());
    }
}

// ---- stars, tangent cones, dilatations --------------------------------------------

struct Star {
    Point center;
    std::vector<Point> reps;  // one per incident face representative
    std::vector<int> faces() const {
        std::set<int> s;
        for (auto& r : reps) s.insert(r.face);
        return {s.begin(), s.end()};
    }
};

inline Star star(const Complex& c, const Point& p) { return Star{c.canonical(p), c.incident(p)}; }

// A complex whose faces are cones with apex at each chart's origin.
struct Cone {
    Complex complex;
    std::vector<Point> apex;  // apex representative in every face
    Point apex_point() const { return apex.at(0); }
};

inline double radial_distance(const Cone& cone, const Point& q) {
    const Face& f = cone.complex.face(q.face);
    return f.norm(Vec(Vec2(q.x - cone.apex[q.face].x)));
}

inline Point dilate(const Cone& cone, const Point& q, double t) {
    if (t < 0) throw InputError("dilate: factor must be nonnegative");
    const Vec2& o = cone.apex[q.face].x;
    return Point{q.face, o + t * (q.x - o)};
}

struct TangentCone {
    Cone cone;
    std::vector<Point> reps;  // representative of p in the source face matching each cone face
    double radius = 0;        // chart map is an isometry on this Euclidean chart radius

    // Chart map from a neighborhood of p: a point of source face reps[i].face.
    Point to_cone(const Point& q) const {
        for (int i = 0; i < int(reps.size()); ++i)
            if (reps[i].face == q.face) return Point{i, q.x - reps[i].x};
        throw IncidenceError("tangent cone chart: face not in the star");
    }
};

inline TangentCone tangent_cone(const Complex& c, const Point& p) {
    TangentCone tc;
    tc.reps = c.incident(p);
    std::vector<Face> faces;
    // For every cone face, which source edge became which cone edge.
    std::vector<std::map<int, std::vector<int>>> edge_map(tc.reps.size());
    double radius = kInf;
    for (int i = 0; i < int(tc.reps.size()); ++i) {
        const Point& r = tc.reps[i];
        const Polygon& poly = c.face(r.face).poly;
        auto es = poly.edges_at(r.x);
        Face f;
        f.id = i;
        f.norm = c.face(r.face).norm;
        if (es.empty()) {
            f.poly = Polygon::plane();
        } else if (es.size() == 1) {
            Vec2 t = poly.travel(es[0]);
            f.poly = Polygon::unbounded({Vec2(0, 0)}, -t, t);
            edge_map[i][es[0]] = {0, 1};
        } else {
            // Corner: the incoming edge precedes the outgoing one in boundary order.
            int a = es[0], b = es[1];
            int m = poly.edge_count();
            if (!poly.is_unbounded() && a == 0 && b == m - 1) std::swap(a, b);
            f.poly = Polygon::unbounded({Vec2(0, 0)}, -poly.travel(a), poly.travel(b));
            edge_map[i][a] = {0};
            edge_map[i][b] = {1};
        }
        faces.push_back(f);
        for (int e = 0; e < poly.edge_count(); ++e) {
            bool touches = std::find(es.begin(), es.end(), e) != es.end();
            if (!touches) radius = std::min(radius, poly.edges()[e].distance(r.x));
        }
        for (auto& v : poly.vertices())
            if ((v - r.x).norm() > 1e-12) radius = std::min(radius, (v - r.x).norm());
    }
    std::vector<Gluing> gl;
    for (int i = 0; i < int(tc.reps.size()); ++i) {
        const Point& r = tc.reps[i];
        for (auto& [se, ces] : edge_map[i]) {
            for (auto [gi, is_a] : c.edge_gluings(r.face, se)) {
                if (!is_a) continue;  // each gluing once, from its A side
                const Gluing& g = c.gluings()[gi];
                Point img = c.map_across(g, true, r.x);
                int j = -1;
                for (int k = 0; k < int(tc.reps.size()); ++k)
                    if (tc.reps[k].face == img.face && (tc.reps[k].x - img.x).norm() < 1e-9) j = k;
                if (j < 0 || !edge_map[j].count(g.edge_b)) continue;
                for (int ce : ces) {
                    Vec2 d = faces[i].poly.edges()[ce].dir;
                    Vec2 dimg = g.matrix * d;
                    for (int cf : edge_map[j][g.edge_b]) {
                        Vec2 d2 = faces[j].poly.edges()[cf].dir;
                        if (std::abs(cross2(dimg, d2)) < 1e-9 * dimg.norm() * d2.norm() && dimg.dot(d2) > 0) {
                            Gluing cg;
                            cg.face_a = i;
                            cg.edge_a = ce;
                            cg.face_b = j;
                            cg.edge_b = cf;
                            cg.matrix = g.matrix;
                            cg.offset = Vec2::Zero();
                            gl.push_back(cg);
                        }
                    }
                }
            }
        }
    }
    tc.cone.complex = Complex(std::move(faces), std::move(gl));
    for (int i = 0; i < int(tc.reps.size()); ++i) tc.cone.apex.push_back(Point{i, Vec2::Zero()});
    tc.radius = radius;
    return tc;
}

// ---- periodic covers --------------------------------------------------------------

// Lazily instantiated windows of the universal cover of a periodic complex.
// Windows are cached; access is synchronized so workers may share a cover.
class PeriodicCover {
public:
    explicit PeriodicCover(Complex base) : base_(std::move(base)) {
        if (!base_.periodic()) throw InputError("complex has no periodic structure");
        max_id_ = 0;
        for (auto& f : base_.faces()) max_id_ = std::max(max_id_, f.id);
    }

    const Complex& base() const { return base_; }
    int stride() const { return max_id_ + 1; }
    int max_periods() const { return base_.periodic()->max_periods; }

    // Face index of base face f in period k within a window.
    int window_face(int k, int f) const { return k * base_.face_count() + f; }

    std::shared_ptr<const Complex> window(int periods) const {
        if (periods < 1) throw InputError("window must contain at least one period");
        if (periods > max_periods())
            throw ResourceError("requested " + std::to_string(periods) + " periods; the cover allows at most " +
                                std::to_string(max_periods()));
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(periods);
        if (it != cache_.end()) return it->second;
        int nf = base_.face_count();
        std::vector<Face> faces;
        std::vector<Gluing> gl;
        for (int k = 0; k < periods; ++k) {
            for (int f = 0; f < nf; ++f) {
                Face fc = base_.face(f);
                fc.id = k * stride() + base_.face(f).id;
                faces.push_back(fc);
            }
            for (auto g : base_.gluings()) {
                g.face_a += k * nf;
                g.face_b += k * nf;
                gl.push_back(g);
            }
            if (k + 1 < periods)
                for (auto g : base_.periodic()->period_gluings) {
                    g.face_a += k * nf;
                    g.face_b += (k + 1) * nf;
                    gl.push_back(g);
                }
        }
        auto c = std::make_shared<Complex>(std::move(faces), std::move(gl));
        c->set_tolerances(base_.tol());
        c->require_valid();
        cache_[periods] = c;
        return c;
    }

    // The compact quotient: period gluings close up within one copy.
    Complex quotient() const {
        std::vector<Face> faces = base_.faces();
        std::vector<Gluing> gl = base_.gluings();
        for (auto& g : base_.periodic()->period_gluings) gl.push_back(g);
        Complex c(std::move(faces), std::move(gl));
        c.set_tolerances(base_.tol());
        c.require_valid();
        return c;
    }

private:
    Complex base_;
    int max_id_;
    mutable std::mutex mu_;
    mutable std::map<int, std::shared_ptr<const Complex>> cache_;
};

}  // namespace fpl
