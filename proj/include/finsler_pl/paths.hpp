#pragma once
// Broken lines, the fixed-face-sequence crossing solver, local distances,
// midpoints, the geodesic predicate and orthogonal slices.

#include "complex.hpp"

#include <queue>

namespace fpl {

// ---- vertex paths -------------------------------------------------------------

// A broken line: consecutive vertices share edge_faces[i], and each edge is
// the chart segment there. seg[i] holds the endpoints in that chart.
struct VertexPath {
    std::vector<Point> vertices;
    std::vector<int> edge_faces;
    std::vector<std::pair<Vec2, Vec2>> seg;
    std::vector<double> edge_len;

    int edges() const { return int(edge_len.size()); }
    double length() const {
        double s = 0;
        for (double l : edge_len) s += l;
        return s;
    }
    double max_edge() const {
        double m = 0;
        for (double l : edge_len) m = std::max(m, l);
        return m;
    }
    double energy() const {
        double s = 0;
        for (double l : edge_len) s += l * l;
        return s;
    }
};

inline double length(const VertexPath& s) { return s.length(); }
inline double max_edge(const VertexPath& s) { return s.max_edge(); }
inline double energy(const VertexPath& s) { return s.energy(); }

// Builds a VertexPath, transitioning vertices into each edge face. Zero-length
// edges are dropped unless keep_degenerate is set.
inline VertexPath make_vertex_path(const Complex& c, const std::vector<Point>& pts, const std::vector<int>& faces,
                                   bool keep_degenerate = false) {
    if (pts.size() < 2 || faces.size() + 1 != pts.size())
        throw InputError("vertex path needs n+1 vertices and n edge faces");
    VertexPath p;
    p.vertices.push_back(pts[0]);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        int f = faces[i];
        Point a = pts[i].face == f ? pts[i] : c.transition(pts[i], f);
        Point b = pts[i + 1].face == f ? pts[i + 1] : c.transition(pts[i + 1], f);
        double l = c.face(f).norm(Vec(Vec2(b.x - a.x)));
        if (!keep_degenerate && l <= 1e-15 * std::max(1.0, a.x.norm()) && i + 2 < pts.size()) {
            continue;  // drop the vertex pts[i+1]; the next edge starts from the current last vertex
        }
        if (!keep_degenerate && l <= 1e-15 * std::max(1.0, a.x.norm()) && p.edges() > 0) {
            // final degenerate edge: replace the last vertex by the endpoint
            p.vertices.back() = pts[i + 1];
            continue;
        }
        p.edge_faces.push_back(f);
        p.seg.push_back({a.x, b.x});
        p.edge_len.push_back(l);
        p.vertices.push_back(pts[i + 1]);
    }
    if (p.edges() == 0) {
        int f = faces[0];
        Point a = pts.front().face == f ? pts.front() : c.transition(pts.front(), f);
        Point b = pts.back().face == f ? pts.back() : c.transition(pts.back(), f);
        p.vertices = {pts.front(), pts.back()};
        p.edge_faces = {f};
        p.seg = {{a.x, b.x}};
        p.edge_len = {c.face(f).norm(Vec(Vec2(b.x - a.x)))};
    }
    return p;
}

// Point at arclength fraction u in [0, 1].
inline Point point_at_fraction(const VertexPath& p, double u) {
    double target = u * p.length(), acc = 0;
    for (int i = 0; i < p.edges(); ++i) {
        double l = p.edge_len[i];
        if (acc + l >= target || i + 1 == p.edges()) {
            double lam = l > 0 ? std::clamp((target - acc) / l, 0.0, 1.0) : 0.0;
            auto [a, b] = p.seg[i];
            return Point{p.edge_faces[i], a + lam * (b - a)};
        }
        acc += l;
    }
    return p.vertices.back();
}

// Largest gap between two paths sampled at matching arclength fractions.
inline double path_gap(const Complex& c, const VertexPath& a, const VertexPath& b, int samples = 17) {
    double worst = 0;
    for (int i = 0; i <= samples; ++i) {
        double u = double(i) / samples;
        worst = std::max(worst, c.approx_distance(point_at_fraction(a, u), point_at_fraction(b, u)));
    }
    return worst;
}

// ---- fixed face sequences --------------------------------------------------------

struct Crossing {
    int gluing = 0;
    bool from_a = true;  // leave through the gluing's A side
};

struct FaceSequence {
    std::vector<int> faces;  // F_0 .. F_k
    std::vector<Crossing> steps;
};

namespace detail {

// One-sided derivative that is also right at the origin, where N(e w) = e N(w).
inline double rderiv(const Norm& n, const Vec2& v, const Vec2& w) {
    if (v.squaredNorm() == 0) return n(Vec(w));
    return n.impl().right_deriv(Vec(v), Vec(w));
}

}  // namespace detail

// Length of a broken line through a fixed face sequence, as a function of the
// crossing parameters. Each term is a norm of an affine function, so the
// objective is convex and the problem is solved to high accuracy.
class SequenceProblem {
public:
    SequenceProblem(const Complex& c, const Vec2& a, const FaceSequence& seq, std::optional<Vec2> b)
        : a_(a), has_end_(b.has_value()), b_(b.value_or(Vec2::Zero())) {
        int k = int(seq.steps.size());
        k_ = k;
        double sc = std::max({1.0, a.norm(), b_.norm()});
        for (int i = 0; i < k; ++i) {
            const Gluing& g = c.gluings()[seq.steps[i].gluing];
            bool fa = seq.steps[i].from_a;
            const Edge& ea = c.face(g.face_a).poly.edges()[g.edge_a];
            const Edge& eb = c.face(g.face_b).poly.edges()[g.edge_b];
            const Edge& ex = fa ? ea : eb;
            Po_.push_back(ex.origin);
            Pd_.push_back(ex.dir);
            if (fa) {
                Qo_.push_back(eb.origin + g.beta * eb.dir);
                Qd_.push_back(g.alpha * eb.dir);
            } else {
                Qo_.push_back(ea.origin - (g.beta / g.alpha) * ea.dir);
                Qd_.push_back(ea.dir / g.alpha);
            }
            lo_.push_back(0.0);
            double hi = ex.tmax;
            if (std::isinf(hi)) hi = 1e3 * std::max(sc, ex.origin.norm()) / ex.dir.norm();
            hi_.push_back(hi);
            sc = std::max(sc, ex.origin.norm());
        }
        for (int f : seq.faces) norms_.push_back(&c.face(f).norm);
        scale_ = sc;
    }

    int size() const { return k_; }
    double edge_scale(int i) const { return Pd_[i].norm(); }
    int segments() const { return has_end_ ? k_ + 1 : k_; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }

    Vec2 exit_point(int i, double t) const { return Po_[i] + t * Pd_[i]; }
    Vec2 entry_point(int i, double t) const { return Qo_[i] + t * Qd_[i]; }

    Vec2 seg_vec(const std::vector<double>& t, int j) const {
        Vec2 s = j == 0 ? a_ : entry_point(j - 1, t[j - 1]);
        Vec2 e = j == k_ ? b_ : exit_point(j, t[j]);
        return e - s;
    }

    double value(const std::vector<double>& t) const {
        double s = 0;
        for (int j = 0; j < segments(); ++j) s += (*norms_[j])(Vec(seg_vec(t, j)));
        return s;
    }

    void gradient(const std::vector<double>& t, std::vector<double>& g) const {
        g.assign(k_, 0.0);
        for (int j = 0; j < segments(); ++j) {
            Vec2 gj = Vec2(norms_[j]->subgradient(Vec(seg_vec(t, j))));
            if (j < k_) g[j] += gj.dot(Pd_[j]);
            if (j > 0) g[j - 1] -= gj.dot(Qd_[j - 1]);
        }
    }

    // Partial derivative in t_i from the right (dir=+1) or left (dir=-1).
    double one_sided(const std::vector<double>& t, int i, int dir) const {
        Vec2 e1 = double(dir) * Pd_[i];
        Vec2 e2 = -double(dir) * Qd_[i];
        double d = detail::rderiv(*norms_[i], seg_vec(t, i), e1);
        if (i + 1 < segments()) d += detail::rderiv(*norms_[i + 1], seg_vec(t, i + 1), e2);
        return double(dir) * d;  // back to a derivative in t_i
    }

    // Exact minimization over t_i with the others fixed (bisection on the
    // right derivative, valid for non-smooth convex terms).
    double line_min(std::vector<double>& t, int i) const {
        double lo = lo_[i], hi = hi_[i];
        double keep = t[i];
        t[i] = lo;
        if (one_sided(t, i, +1) >= 0) return t[i];
        t[i] = hi;
        if (one_sided(t, i, +1) < 0) return t[i];
        for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
            double m = 0.5 * (lo + hi);
            if (m <= lo || m >= hi) break;
            t[i] = m;
            if (one_sided(t, i, +1) < 0)
                lo = m;
            else
                hi = m;
        }
        // Pick the lower of the two bracket ends.
        t[i] = lo;
        double flo = local_value(t, i);
        t[i] = hi;
        double fhi = local_value(t, i);
        t[i] = flo < fhi ? lo : hi;
        (void)keep;
        return t[i];
    }

    double local_value(const std::vector<double>& t, int i) const {
        double s = (*norms_[i])(Vec(seg_vec(t, i)));
        if (i + 1 < segments()) s += (*norms_[i + 1])(Vec(seg_vec(t, i + 1)));
        return s;
    }

    void project(std::vector<double>& t) const {
        for (int i = 0; i < k_; ++i) t[i] = std::clamp(t[i], lo_[i], hi_[i]);
    }

    std::vector<double> initial() const {
        std::vector<double> t(k_);
        for (int i = 0; i < k_; ++i) t[i] = std::isinf(hi_[i]) || hi_[i] > 1e2 ? std::min(hi_[i], 1.0) : 0.5 * hi_[i];
        // Cheap warm start: one coordinate sweep forward.
        for (int i = 0; i < k_; ++i) line_min(t, i);
        return t;
    }

    bool smooth() const {
        for (auto* n : norms_)
            if (!n->smooth()) return false;
        return true;
    }

    // Coordinate sweeps to convergence; returns the final value.
    double coordinate_descent(std::vector<double>& t, int max_sweeps = 400) const {
        double f = value(t);
        for (int s = 0; s < max_sweeps; ++s) {
            double move = 0;
            for (int i = 0; i < k_; ++i) {
                double old = t[i];
                line_min(t, i);
                move = std::max(move, std::abs(t[i] - old) * Pd_[i].norm());
            }
            for (int i = k_ - 1; i >= 0; --i) {
                double old = t[i];
                line_min(t, i);
                move = std::max(move, std::abs(t[i] - old) * Pd_[i].norm());
            }
            double fn = value(t);
            bool done = move < 1e-15 * scale_ || fn >= f - 1e-16 * std::max(1.0, f);
            f = std::min(f, fn);
            if (done) break;
        }
        return value(t);
    }

    // Projected Newton with a finite-difference Hessian of the analytic
    // gradient, backtracking on the projected arc, then coordinate polish.
    double solve(std::vector<double>& t) const {
        if (k_ == 0) return value(t);
        if (k_ == 1) {
            line_min(t, 0);
            return value(t);
        }
        project(t);
        double f = value(t);
        std::vector<double> g, gp, gm, tn(k_);
        for (int iter = 0; iter < 100; ++iter) {
            gradient(t, g);
            std::vector<int> free;
            for (int i = 0; i < k_; ++i) {
                bool at_lo = t[i] <= lo_[i] && g[i] > 0, at_hi = t[i] >= hi_[i] && g[i] < 0;
                if (!at_lo && !at_hi) free.push_back(i);
            }
            if (free.empty()) break;
            int m = int(free.size());
            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
            Eigen::VectorXd gf(m);
            for (int a = 0; a < m; ++a) gf[a] = g[free[a]];
            for (int a = 0; a < m; ++a) {
                int j = free[a];
                double h = 1e-7 * std::max(1e-3, step_scale(t, j)) / Pd_[j].norm();
                std::vector<double> tp = t, tm = t;
                tp[j] += h;
                tm[j] -= h;
                gradient(tp, gp);
                gradient(tm, gm);
                for (int b = std::max(0, a - 2); b < std::min(m, a + 3); ++b)
                    H(b, a) = (gp[free[b]] - gm[free[b]]) / (2 * h);
            }
            H = 0.5 * (H + H.transpose());
            Eigen::VectorXd d;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
            if (newton_ok) {
                d = -ldlt.solve(gf);
                if (!d.allFinite() || d.dot(gf) >= 0) newton_ok = false;
            }
            if (!newton_ok) {
                d.resize(m);
                for (int a = 0; a < m; ++a) d[a] = -gf[a] / std::max(std::abs(H(a, a)), 1e-12);
            }
            double alpha = 1, fn = f;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                tn = t;
                for (int a = 0; a < m; ++a) tn[free[a]] += alpha * d[a];
                project(tn);
                fn = value(tn);
                double pred = 0;
                for (int i = 0; i < k_; ++i) pred += g[i] * (tn[i] - t[i]);
                if (fn <= f + 1e-4 * std::min(pred, 0.0) && fn <= f) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            double move = 0;
            for (int i = 0; i < k_; ++i) move = std::max(move, std::abs(tn[i] - t[i]) * Pd_[i].norm());
            t = tn;
            double df = f - fn;
            f = fn;
            if (move < 1e-15 * scale_ || df <= 1e-17 * std::max(1.0, f)) break;
        }
        // Polish: coordinate descent is exact per coordinate and handles corners.
        double fc = coordinate_descent(t, smooth() ? 3 : 400);
        return fc;
    }

private:
    double step_scale(const std::vector<double>& t, int j) const {
        double a = seg_vec(t, j).norm();
        double b = j + 1 < segments() ? seg_vec(t, j + 1).norm() : a;
        return std::min(a, b);
    }

    Vec2 a_;
    bool has_end_;
    Vec2 b_;
    int k_ = 0;
    std::vector<Vec2> Po_, Pd_, Qo_, Qd_;
    std::vector<double> lo_, hi_;
    std::vector<const Norm*> norms_;
    double scale_ = 1;
};

// ---- search ------------------------------------------------------------------------

struct SearchConfig {
    int max_faces = 32;          // face-sequence length bound
    double max_length = kInf;    // paths longer than this are not considered
    int max_nodes = 20000;       // partial sequences expanded before giving up
    double cluster_rel = 1e-9;   // keep candidates within this relative window of the best
    double cluster_abs = 1e-9;
    bool multistart = false;     // extra local minima for non-smooth sequences
    int multistart_seeds = 8;
};

struct Candidate {
    FaceSequence seq;
    std::vector<double> t;
    double length = kInf;
    VertexPath path;
};

struct LocalResult {
    double distance = kInf;
    VertexPath path;
    std::vector<Candidate> candidates;  // distinct, sorted by length
    bool truncated = false;             // node budget exhausted
};

namespace detail {

inline VertexPath candidate_path(const Complex& c, const Point& a, const Point& b, const FaceSequence& seq,
                                 const SequenceProblem& prob, const std::vector<double>& t) {
    std::vector<Point> pts{Point{seq.faces[0], a.x}};
    for (int i = 0; i < prob.size(); ++i) pts.push_back(Point{seq.faces[i], prob.exit_point(i, t[i])});
    pts.push_back(Point{seq.faces.back(), b.x});
    // Each edge lives in the face it traverses; the vertex i+1 is stored in
    // face i's chart, so edge i is in faces[i].
    VertexPath p;
    p.vertices = pts;
    double acc = 0;
    (void)acc;
    for (int j = 0; j <= prob.size(); ++j) {
        Vec2 s = j == 0 ? a.x : prob.entry_point(j - 1, t[j - 1]);
        Vec2 e = j == prob.size() ? b.x : prob.exit_point(j, t[j]);
        p.edge_faces.push_back(seq.faces[j]);
        p.seg.push_back({s, e});
        p.edge_len.push_back(c.face(seq.faces[j]).norm(Vec(Vec2(e - s))));
    }
    // Drop zero-length edges.
    VertexPath q;
    q.vertices.push_back(p.vertices[0]);
    for (int j = 0; j < p.edges(); ++j) {
        bool last = j + 1 == p.edges();
        if (p.edge_len[j] <= 1e-14 * std::max(1.0, p.seg[j].first.norm())) {
            if (last && q.edges() > 0) q.vertices.back() = p.vertices.back();
            if (last && q.edges() == 0) {
                q.vertices.push_back(p.vertices.back());
                q.edge_faces.push_back(p.edge_faces[j]);
                q.seg.push_back(p.seg[j]);
                q.edge_len.push_back(p.edge_len[j]);
            }
            // otherwise the next edge starts at the same point
            if (!last && q.edges() == 0) {
                // vertex 0 should be in the face of the next edge
                q.vertices[0] = Point{p.edge_faces[j + 1], p.seg[j + 1].first};
            }
            continue;
        }
        q.edge_faces.push_back(p.edge_faces[j]);
        q.seg.push_back(p.seg[j]);
        q.edge_len.push_back(p.edge_len[j]);
        q.vertices.push_back(last ? p.vertices.back() : p.vertices[j + 1]);
    }
    q.vertices.front() = a;
    q.vertices.back() = b;
    return q;
}

}  // namespace detail

// Enumerates face sequences from a to b best-first by a convex lower bound
// and solves each complete sequence. Returns every distinct candidate whose
// length is within the configured window of the best.
inline LocalResult search_paths(const Complex& c, const Point& a, const Point& b, const SearchConfig& cfg = {}) {
    if (!c.contains(a) || !c.contains(b)) throw InputError("search_paths: point outside its face");
    auto reps_a = c.incident(a);
    auto reps_b = c.incident(b);
    struct Node {
        double lb;
        long order;
        Point start;
        FaceSequence seq;
        std::vector<double> t;  // prefix solution, warm start
    };
    auto cmp = [](const Node& x, const Node& y) { return x.lb > y.lb || (x.lb == y.lb && x.order > y.order); };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
    long order = 0;
    for (auto& ra : reps_a) open.push(Node{0.0, order++, ra, FaceSequence{{ra.face}, {}}, {}});

    LocalResult res;
    std::vector<Candidate> found;
    double best = kInf;
    auto window = [&](double l) { return l * (1 + cfg.cluster_rel) + cfg.cluster_abs; };
    int expanded = 0;
    while (!open.empty()) {
        Node n = open.top();
        open.pop();
        if (n.lb > cfg.max_length || n.lb > window(best)) break;
        if (++expanded > cfg.max_nodes) {
            res.truncated = true;
            break;
        }
        int F = n.seq.faces.back();
        // Complete at every representative of b in F.
        for (auto& rb : reps_b) {
            if (rb.face != F) continue;
            SequenceProblem prob(c, n.start.x, n.seq, rb.x);
            std::vector<double> t = n.t;
            t.resize(prob.size());
            if (prob.size() > 0 && n.t.empty()) t = prob.initial();
            double L = prob.solve(t);
            std::vector<std::vector<double>> sols{t};
            if (cfg.multistart && !prob.smooth() && prob.size() > 0) {
                double spread = 0.25 * std::max(L, 1e-6);
                for (int s = 1; s <= cfg.multistart_seeds; ++s) {
                    double off = spread * (s % 2 ? 1 : -1) * double((s + 1) / 2) / cfg.multistart_seeds;
                    std::vector<double> ts = t;
                    for (int i = 0; i < prob.size(); ++i) ts[i] += off / prob.edge_scale(i);
                    prob.project(ts);
                    prob.coordinate_descent(ts);
                    sols.push_back(ts);
                }
            }
            for (auto& ts : sols) {
                Candidate cand;
                cand.seq = n.seq;
                cand.t = ts;
                cand.length = prob.value(ts);
                cand.path = detail::candidate_path(c, n.start, rb, n.seq, prob, ts);
                best = std::min(best, cand.length);
                found.push_back(std::move(cand));
            }
        }
        if (int(n.seq.faces.size()) >= cfg.max_faces) continue;
        // Expand across every glued edge of F into faces not yet visited.
        const Polygon& poly = c.face(F).poly;
        for (int e = 0; e < poly.edge_count(); ++e) {
            for (auto [gi, is_a] : c.edge_gluings(F, e)) {
                const Gluing& g = c.gluings()[gi];
                int G = is_a ? g.face_b : g.face_a;
                if (std::find(n.seq.faces.begin(), n.seq.faces.end(), G) != n.seq.faces.end()) continue;
                Node m;
                m.start = n.start;
                m.seq = n.seq;
                m.seq.faces.push_back(G);
                m.seq.steps.push_back({gi, is_a});
                SequenceProblem prefix(c, n.start.x, m.seq, std::nullopt);
                std::vector<double> t = n.t;
                t.push_back(0.5 * std::min(prefix.hi().back(), 1.0));
                double lb = prefix.solve(t);
                // The prefix minimum is a lower bound on every completion.
                if (lb > cfg.max_length || lb > window(best)) continue;
                m.lb = lb;
                m.t = t;
                m.order = order++;
                open.push(std::move(m));
            }
        }
    }
    if (found.empty()) throw OutOfRangeError("no face sequence connects the points within the search bound");
    std::sort(found.begin(), found.end(), [](const Candidate& x, const Candidate& y) { return x.length < y.length; });
    double lim = window(found[0].length);
    for (auto& cand : found) {
        if (cand.length > lim) break;
        bool dup = false;
        for (auto& kept : res.candidates)
            if (path_gap(c, kept.path, cand.path) <= std::max(1e-7, 1e-7 * cand.length)) {
                dup = true;
                break;
            }
        if (!dup) res.candidates.push_back(cand);
    }
    res.distance = res.candidates[0].length;
    res.path = res.candidates[0].path;
    return res;
}

inline std::pair<double, VertexPath> local_distance(const Complex& c, const Point& a, const Point& b,
                                                    const SearchConfig& cfg = {}) {
    auto r = search_paths(c, a, b, cfg);
    return {r.distance, r.path};
}

inline double dist(const Complex& c, const Point& a, const Point& b, const SearchConfig& cfg = {}) {
    return search_paths(c, a, b, cfg).distance;
}

// Walks the minimal path to half its length. Two geometrically distinct
// minimizers of equal length make the midpoint ill-defined.
inline Point midpoint(const Complex& c, const Point& a, const Point& b, const SearchConfig& cfg = {}) {
    SearchConfig sc = cfg;
    sc.cluster_rel = std::max(sc.cluster_rel, 1e-9);
    auto r = search_paths(c, a, b, sc);
    if (r.candidates.size() > 1) {
        double gap = path_gap(c, r.candidates[0].path, r.candidates[1].path);
        throw NonUniqueMidpointError("two distinct minimizers of length " + std::to_string(r.candidates[0].length) +
                                     " and " + std::to_string(r.candidates[1].length) + " (gap " + std::to_string(gap) +
                                     ")");
    }
    return c.canonical(point_at_fraction(r.path, 0.5));
}

// ---- geodesic predicate --------------------------------------------------------------

inline double geodesic_defect(const Complex& c, const std::vector<Point>& s, const SearchConfig& cfg = {}) {
    double worst = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        double d1 = dist(c, s[i - 1], s[i], cfg), d2 = dist(c, s[i], s[i + 1], cfg);
        double d = dist(c, s[i - 1], s[i + 1], cfg);
        worst = std::max(worst, (d1 + d2 - d) / (1 + d));
    }
    return worst;
}

inline bool is_geodesic_sequence(const Complex& c, const std::vector<Point>& s, double tol,
                                 const SearchConfig& cfg = {}) {
    return geodesic_defect(c, s, cfg) <= tol;
}

inline bool is_geodesic_sequence(const Complex& c, const VertexPath& s, double tol, const SearchConfig& cfg = {}) {
    return is_geodesic_sequence(c, s.vertices, tol, cfg);
}

// First-order local minimality of a broken line using one-sided derivatives:
// sliding any interior vertex along its edge (or in any direction inside a
// face) must not decrease length. Returns the most negative slope found.
inline double one_sided_slope(const Complex& c, const VertexPath& p) {
    double worst = kInf;
    for (int i = 1; i < p.edges(); ++i) {
        int F = p.edge_faces[i - 1], G = p.edge_faces[i];
        Vec2 w1 = p.seg[i - 1].second - p.seg[i - 1].first;
        Vec2 w2 = p.seg[i].second - p.seg[i].first;
        Vec2 x = p.seg[i - 1].second;
        std::vector<std::pair<Vec2, Vec2>> dirs;  // direction in F chart, same in G chart
        if (F == G) {
            for (int k = 0; k < 8; ++k) {
                Vec2 d(std::cos(k * M_PI / 4), std::sin(k * M_PI / 4));
                dirs.push_back({d, d});
            }
        } else {
            const Polygon& poly = c.face(F).poly;
            for (int e : poly.edges_at(x, 1e-9))
                for (auto [gi, is_a] : c.edge_gluings(F, e)) {
                    const Gluing& g = c.gluings()[gi];
                    if ((is_a ? g.face_b : g.face_a) != G) continue;
                    Vec2 d = poly.edges()[e].dir.normalized();
                    Mat2 L = c.linear_across(g, is_a);
                    dirs.push_back({d, L * d});
                    dirs.push_back({-d, -(L * d)});
                }
        }
        for (auto& [dF, dG] : dirs) {
            double s = detail::rderiv(c.face(F).norm, w1, dF) + detail::rderiv(c.face(G).norm, w2, -dG);
            worst = std::min(worst, s);
        }
    }
    return worst;
}

// Local minimality at every interior vertex: with u and w on the path a short
// distance eps before and after the vertex, the shortest u-w distance must
// equal 2 eps. Returns the largest relative shortfall (2 eps - d(u, w)) / eps.
inline double local_geodesic_defect(const Complex& c, const VertexPath& p, double frac = 0.25,
                                    const SearchConfig& cfg = {}) {
    double worst = 0;
    for (int i = 1; i < p.edges(); ++i) {
        double eps = frac * std::min(p.edge_len[i - 1], p.edge_len[i]);
        if (!(eps > 0)) continue;
        auto [a0, a1] = p.seg[i - 1];
        auto [b0, b1] = p.seg[i];
        Point u{p.edge_faces[i - 1], a1 + (eps / p.edge_len[i - 1]) * (a0 - a1)};
        Point w{p.edge_faces[i], b0 + (eps / p.edge_len[i]) * (b1 - b0)};
        worst = std::max(worst, (2 * eps - dist(c, u, w, cfg)) / eps);
    }
    return worst;
}

// ---- orthogonal slices ---------------------------------------------------------------

struct SlicePiece {
    int face;
    Vec2 base;       // gamma(t) in this face's chart
    Vec2 direction;  // spans the kernel of grad(v) in this chart
    double s_min, s_max;  // piece is base + s * direction
};

struct LocalSlice {
    Point a, b;
    double t;
    std::vector<SlicePiece> pieces;
    bool agree = true;       // no piece runs along a shared edge, so pieces meet at one point
    bool separates = false;  // a and b lie strictly on opposite sides
};

// The segment [a, b] must lie in one face (a.face, after transition of b).
inline LocalSlice orth_slice(const Complex& c, const Point& a, const Point& b, double t) {
    if (!(t > 0 && t < 1)) throw InputError("orth_slice: t must lie in (0, 1)");
    Point bb = b.face == a.face ? b : c.transition(b, a.face);
    LocalSlice sl{a, bb, t, {}, true, false};
    Vec2 base = a.x + t * (bb.x - a.x);
    Vec2 dir = bb.x - a.x;
    for (auto& [r, L] : c.incident_frames(Point{a.face, base})) {
        const Face& f = c.face(r.face);
        Vec2 v = L * dir;
        Vec vv = Vec(Vec2(v / f.norm(Vec(v))));
        Vec2 g = Vec2(f.norm.grad(vv));
        Vec2 k(-g.y(), g.x());
        k.normalize();
        double smin = -kInf, smax = kInf;
        const Polygon& poly = f.poly;
        for (int e = 0; e < poly.edge_count(); ++e) {
            double nk = poly.normal(e).dot(k);
            double slack = poly.offset(e) - poly.normal(e).dot(r.x);
            if (std::abs(nk) < 1e-15) continue;
            double s = slack / nk;
            if (nk > 0)
                smax = std::min(smax, s);
            else
                smin = std::max(smin, s);
        }
        sl.pieces.push_back({r.face, r.x, k, smin, smax});
        if (r.face == a.face) {
            double sa = g.dot(a.x - base), sb = g.dot(bb.x - base);
            sl.separates = sa < 0 && sb > 0;
        }
    }
    // Pieces in faces that share an edge through the base point must meet that
    // edge at the same point; the base point is that point.
    for (auto& p : sl.pieces) {
        for (int e : c.face(p.face).poly.edges_at(p.base, 1e-9)) {
            Vec2 d = c.face(p.face).poly.edges()[e].dir;
            double cr = cross2(d, p.direction);
            if (std::abs(cr) < 1e-14) {
                sl.agree = false;  // piece runs along the edge: kernel contains the edge direction
            }
        }
    }
    return sl;
}

struct BusemannReport {
    bool inequality_holds = true;  // eval(q - gamma(t)) >= |t - t0| - tol
    double worst_gap = kInf;       // min over samples of eval(q - gamma(t)) - |t - t0|
    bool strict = true;            // strictly positive gap when q != gamma(t0)
    bool decay_monotone = true;    // gaps shrink as |t - t0| grows
    std::vector<std::pair<double, double>> decay;  // (|t - t0|, gap)
    json to_json() const {
        json d = json::array();
        for (auto& [s, g] : decay) d.push_back({s, g});
        return {{"inequality_holds", inequality_holds}, {"worst_gap", worst_gap}, {"strict", strict},
                {"decay_monotone", decay_monotone},   {"decay", d}};
    }
};

// Line gamma(t) = a + t v with eval(v) = 1; q - gamma(t0) must lie in v-perp.
inline BusemannReport busemann_check(const Norm& n, const Vec& a, const Vec& v, const Vec& q, double t0,
                                     const std::vector<double>& ts, double tol = 1e-12) {
    if (std::abs(n.eval(v) - 1) > 1e-9) throw InputError("busemann_check: direction must have unit norm");
    Vec g = n.grad(v);
    Vec w = q - (a + t0 * v);
    if (std::abs(g.dot(w)) > 1e-9 * std::max(1.0, w.norm())) throw InputError("busemann_check: q is not on the slice");
    BusemannReport r;
    bool off = n(w) > 1e-6;
    for (double t : ts) {
        double gap = n(q - (a + t * v)) - std::abs(t - t0);
        r.worst_gap = std::min(r.worst_gap, gap);
        if (gap < -tol) r.inequality_holds = false;
        if (off && !(gap > 0)) r.strict = false;
    }
    double prev = kInf;
    for (double s : {10.0, 100.0, 1000.0}) {
        double gp = n(q - (a + (t0 + s) * v)) - s;
        double gm = n(q - (a + (t0 - s) * v)) - s;
        double gap = std::max(gp, gm);
        r.decay.push_back({s, gap});
        if (gap > prev + 1e-15) r.decay_monotone = false;
        prev = gap;
    }
    return r;
}

// ---- export ---------------------------------------------------------------------------

inline std::string path_csv(const Complex& c, const VertexPath& p) {
    std::ostringstream o;
    o.precision(17);
    o << "index,face_id,x,y,cumulative_length\n";
    double acc = 0;
    for (int i = 0; i <= p.edges(); ++i) {
        int f = i < p.edges() ? p.edge_faces[i] : p.edge_faces.back();
        Vec2 x = i < p.edges() ? p.seg[i].first : p.seg.back().second;
        o << i << ',' << c.face(f).id << ',' << x.x() << ',' << x.y() << ',' << acc << '\n';
        if (i < p.edges()) acc += p.edge_len[i];
    }
    return o.str();
}

inline json path_to_json(const Complex& c, const VertexPath& p) {
    json v = json::array();
    for (auto& x : p.vertices) v.push_back({{"face", c.face(x.face).id}, {"coords", {x.x.x(), x.x.y()}}});
    json ef = json::array();
    for (int f : p.edge_faces) ef.push_back(c.face(f).id);
    return {{"schema", "finsler-pl/1"}, {"vertices", v}, {"edge_faces", ef}, {"length", p.length()},
            {"max_edge", p.max_edge()}, {"energy", p.energy()}};
}

inline std::vector<Point> points_from_json(const Complex& c, const json& j) {
    std::vector<Point> pts;
    try {
        for (auto& v : j.at("vertices")) {
            Point p{c.face_index(v.at("face").get<int>()),
                    Vec2(v.at("coords")[0].get<double>(), v.at("coords")[1].get<double>())};
            if (!c.contains(p)) throw InputError("path vertex lies outside its face");
            pts.push_back(p);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("path description: ") + e.what());
    }
    if (pts.size() < 2) throw InputError("path needs at least two vertices");
    return pts;
}

// Reads the JSON mirror back; edge faces default to a shared face.
inline VertexPath path_from_json(const Complex& c, const json& j) {
    auto pts = points_from_json(c, j);
    std::vector<int> faces;
    if (j.contains("edge_faces")) {
        for (auto& f : j.at("edge_faces")) faces.push_back(c.face_index(f.get<int>()));
    } else {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            int f = -1;
            for (auto& r : c.incident(pts[i]))
                for (auto& s : c.incident(pts[i + 1]))
                    if (r.face == s.face && f < 0) f = r.face;
            if (f < 0) throw InputError("consecutive path vertices share no face");
            faces.push_back(f);
        }
    }
    return make_vertex_path(c, pts, faces, true);
}

inline std::vector<Point> points_from_csv(const Complex& c, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<Point> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 4) throw InputError("path CSV row needs index,face_id,x,y");
        pts.push_back(Point{c.face_index(std::stoi(cells[1])), Vec2(std::stod(cells[2]), std::stod(cells[3]))});
    }
    return pts;
}

}  // namespace fpl
