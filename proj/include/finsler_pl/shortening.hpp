#pragma once
// Midpoint shortening: the map T on admissible vertex sequences, its
// iteration to a geodesic, sampled uniqueness radii and the homotopy check.

#include "paths.hpp"

namespace fpl {

// ---- walking straight lines through the complex -------------------------------------

// Follows the chart line from p in direction dir, carrying the direction
// across gluings, until `budget` norm-length is used or a free edge or a
// vertex is hit. The returned point is within `budget` of p.
inline Point shoot(const Complex& c, const Point& p, Vec2 dir, double budget) {
    Point cur = p;
    for (int hop = 0; hop < 256 && budget > 0; ++hop) {
        const Face& f = c.face(cur.face);
        double speed = f.norm(Vec(dir));
        if (!(speed > 0)) break;
        const Polygon& poly = f.poly;
        double t_exit = kInf;
        for (int i = 0; i < poly.edge_count(); ++i) {
            double nd = poly.normal(i).dot(dir);
            if (nd <= 0) continue;
            double t = (poly.offset(i) - poly.normal(i).dot(cur.x)) / nd;
            t_exit = std::min(t_exit, std::max(t, 0.0));
        }
        double t_budget = budget / speed;
        if (t_budget <= t_exit) {
            cur.x += t_budget * dir;
            return cur;
        }
        Vec2 y = cur.x + t_exit * dir;
        budget -= t_exit * speed;
        auto es = poly.edges_at(y, 1e-10);
        if (es.size() != 1) return Point{cur.face, y};  // vertex: stop
        const auto& gl = c.edge_gluings(cur.face, es[0]);
        if (gl.empty()) return Point{cur.face, y};  // free boundary
        auto [gi, is_a] = gl[0];
        const Gluing& g = c.gluings()[gi];
        Point next = c.map_across(g, is_a, y);
        dir = c.linear_across(g, is_a) * dir;
        cur = next;
    }
    return cur;
}

// Norm distance from a point to the free (unglued) boundary around it.
inline double free_boundary_distance(const Complex& c, const Point& x) {
    double best = kInf;
    for (auto& r : c.incident(x)) {
        const Face& f = c.face(r.face);
        for (int e = 0; e < f.poly.edge_count(); ++e) {
            if (!c.edge_gluings(r.face, e).empty()) continue;
            const Edge& ed = f.poly.edges()[e];
            double ts = std::max(0.0, ed.param(r.x));
            double hi = std::min(ed.tmax, ts + 10 * ((r.x - ed.origin).norm() + 1) / ed.dir.norm());
            auto g = [&](double t) { return f.norm(Vec(Vec2(ed.at(t) - r.x))); };
            double lo = 0;
            for (int it = 0; it < 200; ++it) {
                double m1 = lo + (hi - lo) * 0.381966, m2 = hi - (hi - lo) * 0.381966;
                if (g(m1) <= g(m2))
                    hi = m2;
                else
                    lo = m1;
            }
            best = std::min({best, g(0.5 * (lo + hi)), g(0), ed.ray() ? kInf : g(ed.tmax)});
        }
    }
    return best;
}

// Random point within `radius` of x: a straight shot from a random incident
// representative in a random direction.
inline Point sample_ball(const Complex& c, const Point& x, double radius, Rng& rng) {
    auto reps = c.incident(x);
    for (int tries = 0; tries < 16; ++tries) {
        const Point& r = reps[rng.integer(0, int(reps.size()) - 1)];
        Vec u = rng.unit(2);
        Vec2 d(u[0], u[1]);
        double len = radius * std::sqrt(rng.uniform());
        Point y = shoot(c, r, d, len);
        if (len == 0 || (y.x - r.x).norm() > 0 || y.face != r.face) return y;
    }
    return x;
}

// ---- uniqueness radius ---------------------------------------------------------------

struct RadiusConfig {
    int pairs = 24;             // sampled pairs per tested radius
    std::uint64_t seed = 1;
    double max_radius = 1.0;    // cap when there is no free boundary nearby
    int levels = 10;            // radii cap * shrink^j, j = 0 .. levels-1
    double shrink = 0.75;
    SearchConfig search{};
};

struct RadiusReport {
    double radius = 0;
    double cap = 0;
    int pairs = 0;
    int levels_passed = 0;
    std::string warning;
    std::optional<std::pair<Point, Point>> witness;

    json to_json() const {
        json j{{"radius", radius}, {"cap", cap}, {"pairs", pairs}, {"levels_passed", levels_passed}};
        if (!warning.empty()) j["warning"] = warning;
        if (witness)
            j["witness"] = {{{"face", witness->first.face}, {"x", witness->first.x.x()}, {"y", witness->first.x.y()}},
                            {{"face", witness->second.face}, {"x", witness->second.x.x()}, {"y", witness->second.x.y()}}};
        return j;
    }
};

// True when the minimizer between a and b is unique (or the search fails to
// reach, which is not evidence of ambiguity). On non-smooth complexes local
// geodesics near the minimum also count, since fans of geodesics with distinct
// lengths appear there.
inline bool unique_minimizer(const Complex& c, const Point& a, const Point& b, const SearchConfig& cfg) {
    SearchConfig sc = cfg;
    try {
        if (c.smooth()) return search_paths(c, a, b, sc).candidates.size() <= 1;
        sc.multistart = true;
        sc.cluster_rel = std::max(sc.cluster_rel, 0.05);
        int n = 0;
        for (auto& cand : search_paths(c, a, b, sc).candidates)
            if (local_geodesic_defect(c, cand.path) <= 1e-7) ++n;
        return n <= 1;
    } catch (const OutOfRangeError&) {
        return true;
    }
}

// Conservative sampled lower bound for the uniqueness radius at x. Radii on a
// geometric grid are tested from the smallest upward; the answer is the last
// radius before the first ambiguous pair. Pairs for each radius are drawn
// from a per-level stream, so more pairs can only lower the answer.
inline RadiusReport uniqueness_radius(const Complex& c, const Point& x, const RadiusConfig& cfg = {}) {
    RadiusReport rep;
    rep.cap = std::min(cfg.max_radius, free_boundary_distance(c, x));
    rep.pairs = cfg.pairs;
    Rng root(cfg.seed);
    std::vector<Rng> streams;
    for (int j = 0; j < cfg.levels; ++j) streams.push_back(root.split(std::uint64_t(j)));
    for (int j = cfg.levels - 1; j >= 0; --j) {
        double r = rep.cap * std::pow(cfg.shrink, j);
        Rng rng = streams[j];
        std::vector<std::pair<Point, Point>> pairs;
        for (int k = 0; k < cfg.pairs; ++k) {
            Point a = sample_ball(c, x, r, rng);
            Point b = sample_ball(c, x, r, rng);
            pairs.push_back({a, b});
        }
        std::vector<char> ok(pairs.size());
        parallel_for(pairs.size(), [&](std::size_t k) { ok[k] = unique_minimizer(c, pairs[k].first, pairs[k].second, cfg.search); });
        auto bad = std::find(ok.begin(), ok.end(), 0);
        if (bad != ok.end()) {
            rep.witness = pairs[bad - ok.begin()];
            if (rep.levels_passed == 0) rep.warning = "ambiguous pair found at the smallest tested radius";
            return rep;
        }
        rep.radius = r;
        ++rep.levels_passed;
    }
    return rep;
}

// ---- admissible sequences -----------------------------------------------------------------

// Vertices x_0..x_n with unique shortest pieces between consecutive ones.
struct AdmissibleSequence {
    std::vector<Point> points;
    std::vector<VertexPath> pieces;
    double rho = 0;

    int n() const { return int(pieces.size()); }
    double length() const {
        double s = 0;
        for (auto& p : pieces) s += p.length();
        return s;
    }
    double delta() const {
        double m = 0;
        for (auto& p : pieces) m = std::max(m, p.length());
        return m;
    }
    double energy() const {
        double s = 0;
        for (auto& p : pieces) s += p.length() * p.length();
        return s;
    }
    bool admissible() const { return 2 * delta() < rho; }

    // The broken line obtained by concatenating the pieces.
    VertexPath path() const {
        VertexPath out;
        out.vertices.push_back(points.front());
        for (auto& p : pieces) {
            for (int i = 0; i < p.edges(); ++i) {
                out.edge_faces.push_back(p.edge_faces[i]);
                out.seg.push_back(p.seg[i]);
                out.edge_len.push_back(p.edge_len[i]);
                out.vertices.push_back(p.vertices[i + 1]);
            }
        }
        return out;
    }
};

inline double length(const AdmissibleSequence& s) { return s.length(); }
inline double max_edge(const AdmissibleSequence& s) { return s.delta(); }
inline double energy(const AdmissibleSequence& s) { return s.energy(); }

// The shortest path between a and b, rejecting ties.
inline VertexPath unique_piece(const Complex& c, const Point& a, const Point& b, const SearchConfig& cfg = {}) {
    auto r = search_paths(c, a, b, cfg);
    if (r.candidates.size() > 1)
        throw NonUniqueMidpointError("two distinct shortest paths between consecutive vertices (length " +
                                     std::to_string(r.distance) + ")");
    return r.path;
}

inline AdmissibleSequence make_admissible(const Complex& c, const std::vector<Point>& pts, double rho,
                                          const SearchConfig& cfg = {}) {
    if (pts.size() < 2) throw InputError("a sequence needs at least two points");
    for (auto& p : pts)
        if (!c.contains(p)) throw InputError("sequence point outside its face");
    AdmissibleSequence s;
    s.points = pts;
    s.rho = rho;
    s.pieces.resize(pts.size() - 1);
    parallel_for(s.pieces.size(), [&](std::size_t i) { s.pieces[i] = unique_piece(c, pts[i], pts[i + 1], cfg); });
    if (!s.admissible())
        throw InputError("sequence not admissible: 2*max edge " + std::to_string(2 * s.delta()) +
                         " is not below the radius bound " + std::to_string(rho));
    return s;
}

// Uses the smallest sampled uniqueness radius over the sequence's vertices.
inline AdmissibleSequence make_admissible(const Complex& c, const std::vector<Point>& pts, const RadiusConfig& rcfg) {
    double rho = kInf;
    for (auto& p : pts) rho = std::min(rho, uniqueness_radius(c, p, rcfg).radius);
    return make_admissible(c, pts, rho, rcfg.search);
}

// ---- the map T ---------------------------------------------------------------------------

inline void require_smooth(const Complex& c) {
    if (!c.smooth()) throw InputError("midpoint shortening needs a complex with smooth norms");
}

// y_i = mid(x_{i-1}, x_i), x'_i = mid(y_i, y_{i+1}); endpoints are copied.
inline AdmissibleSequence shorten_step(const Complex& c, const AdmissibleSequence& s, const SearchConfig& cfg = {}) {
    require_smooth(c);
    int n = s.n();
    std::vector<Point> y(n);
    for (int i = 0; i < n; ++i) y[i] = c.canonical(point_at_fraction(s.pieces[i], 0.5));
    AdmissibleSequence out;
    out.rho = s.rho;
    out.points.resize(n + 1);
    out.points.front() = s.points.front();
    out.points.back() = s.points.back();
    parallel_for(std::size_t(std::max(n - 1, 0)), [&](std::size_t k) {
        auto piece = unique_piece(c, y[k], y[k + 1], cfg);
        out.points[k + 1] = c.canonical(point_at_fraction(piece, 0.5));
    });
    out.pieces.resize(n);
    parallel_for(std::size_t(n), [&](std::size_t i) { out.pieces[i] = unique_piece(c, out.points[i], out.points[i + 1], cfg); });
    return out;
}

struct ShortenResult {
    AdmissibleSequence sequence;
    VertexPath path;
    int iterations = 0;
    std::vector<std::vector<double>> log;  // iteration, L, delta, E, displacement

    json to_json() const {
        json rows = json::array();
        for (auto& r : log)
            rows.push_back({{"iteration", int(r[0])}, {"L", r[1]}, {"delta", r[2]}, {"E", r[3]}, {"displacement", r[4]}});
        return json{{"iterations", iterations}, {"length", sequence.length()}, {"log", rows}};
    }
};

// Iterates T until no vertex moves by tol (chart distance after
// canonicalization) or max_iter is reached.
inline ShortenResult shorten_to_geodesic(const Complex& c, const AdmissibleSequence& s, double tol = 1e-9,
                                         int max_iter = 100000, const SearchConfig& cfg = {}) {
    ShortenResult res;
    res.sequence = s;
    res.log.push_back({0, s.length(), s.delta(), s.energy(), kInf});
    for (int it = 1; it <= max_iter; ++it) {
        AdmissibleSequence next = shorten_step(c, res.sequence, cfg);
        double disp = 0;
        for (int i = 1; i < next.n(); ++i)
            disp = std::max(disp, c.approx_distance(res.sequence.points[i], next.points[i]));
        res.sequence = std::move(next);
        res.iterations = it;
        res.log.push_back({double(it), res.sequence.length(), res.sequence.delta(), res.sequence.energy(), disp});
        if (disp < tol) {
            res.path = res.sequence.path();
            return res;
        }
    }
    std::vector<std::vector<double>> tail(res.log.end() - std::min<std::size_t>(10, res.log.size()), res.log.end());
    throw NonConvergenceError("midpoint shortening did not converge in " + std::to_string(max_iter) + " iterations",
                              tail);
}

// Resamples a broken line at n+1 points equally spaced in arclength.
inline std::vector<Point> resample(const Complex& c, const VertexPath& p, int n) {
    std::vector<Point> out{p.vertices.front()};
    for (int i = 1; i < n; ++i) out.push_back(c.canonical(point_at_fraction(p, double(i) / n)));
    out.push_back(p.vertices.back());
    return out;
}

// ---- homotopy uniqueness ---------------------------------------------------------------------

struct HomotopyConfig {
    double tol = 1e-9;
    int max_iter = 100000;
    double agree = 1e-6;         // limits coincide within this after arclength normalization
    int min_points = 4;
    std::optional<double> rho;   // certified radius; sampled when absent
    RadiusConfig radius{};
};

struct HomotopyReport {
    bool all_coincide = false;
    double rho = 0;
    int points = 0;                  // M + 1 vertices per member
    double worst_gap = 0;            // between limits
    std::vector<double> lengths;     // tau -> L of the limit
    std::vector<int> iterations;
    std::vector<int> strict_local_minima;  // interior tau where L is a strict local minimum
    std::vector<VertexPath> limits;

    json to_json() const {
        return json{{"all_coincide", all_coincide}, {"rho", rho},           {"points", points},
                    {"worst_gap", worst_gap},       {"lengths", lengths},   {"iterations", iterations},
                    {"strict_local_minima", strict_local_minima}};
    }
};

inline HomotopyReport homotopy_unique(const Complex& c, const std::vector<VertexPath>& family,
                                      const HomotopyConfig& cfg = {}) {
    if (family.empty()) throw InputError("empty family");
    const Point p = family.front().vertices.front(), q = family.front().vertices.back();
    for (auto& g : family)
        if (c.approx_distance(g.vertices.front(), p) > 1e-12 || c.approx_distance(g.vertices.back(), q) > 1e-12)
            throw InputError("family members must share endpoints");
    HomotopyReport rep;
    if (cfg.rho) {
        rep.rho = *cfg.rho;
    } else {
        rep.rho = kInf;
        for (double u : {0.0, 0.25, 0.5, 0.75, 1.0})
            rep.rho = std::min(rep.rho, uniqueness_radius(c, c.canonical(point_at_fraction(family[0], u)), cfg.radius).radius);
    }
    if (!(rep.rho > 0)) throw InputError("uniqueness radius estimate is zero; the complex looks focusing here");
    for (std::size_t k = 1; k < family.size(); ++k) {
        double gap = path_gap(c, family[k - 1], family[k]);
        if (gap >= rep.rho)
            throw InputError("family is not a fine homotopy: members " + std::to_string(k - 1) + " and " +
                             std::to_string(k) + " are " + std::to_string(gap) + " apart");
    }
    double L0 = 0;
    for (auto& g : family) L0 = std::max(L0, g.length());
    int M = std::max(cfg.min_points, int(std::floor(2 * L0 / rep.rho)) + 1);
    rep.points = M + 1;
    std::vector<ShortenResult> res(family.size());
    parallel_for(family.size(), [&](std::size_t k) {
        auto s = make_admissible(c, resample(c, family[k], M), rep.rho);
        res[k] = shorten_to_geodesic(c, s, cfg.tol, cfg.max_iter);
    });
    for (auto& r : res) {
        rep.lengths.push_back(r.sequence.length());
        rep.iterations.push_back(r.iterations);
        rep.limits.push_back(r.path);
        rep.worst_gap = std::max(rep.worst_gap, path_gap(c, res[0].path, r.path, 32));
    }
    rep.all_coincide = rep.worst_gap <= cfg.agree;
    for (std::size_t k = 1; k + 1 < rep.lengths.size(); ++k)
        if (rep.lengths[k] < rep.lengths[k - 1] - 1e-12 && rep.lengths[k] < rep.lengths[k + 1] - 1e-12)
            rep.strict_local_minima.push_back(int(k));
    return rep;
}

}  // namespace fpl
