#pragma once
// Named constructions with their measurements: glued half-planes, the belt
// (single and double), and the three-strip flag with a non-smooth middle.

#include "oracle.hpp"

namespace fpl {

struct GalleryInstance {
    std::string name;
    json parameters;
    std::shared_ptr<Complex> complex;      // validated
    std::shared_ptr<PeriodicCover> cover;  // periodic constructions only
    std::vector<std::string> warnings;
    std::string notes;

    json to_json() const {
        return {{"name", name},
                {"parameters", parameters},
                {"notes", notes},
                {"warnings", warnings},
                {"complex", complex->to_json()}};
    }
};

namespace detail {

inline GalleryInstance finish(std::string name, json params, Complex c, std::string notes) {
    GalleryInstance g;
    g.name = std::move(name);
    g.parameters = std::move(params);
    g.notes = std::move(notes);
    auto rep = c.validate();
    if (!rep.valid) {
        std::string msg = g.name + " failed validation:";
        for (auto& e : rep.errors) msg += " " + e + ";";
        throw ConstructionError(msg);
    }
    g.warnings = rep.warnings;
    g.complex = std::make_shared<Complex>(std::move(c));
    if (g.complex->periodic()) g.cover = std::make_shared<PeriodicCover>(*g.complex);
    return g;
}

inline void require_instance(const GalleryInstance& g, const std::string& name) {
    if (g.name != name) throw InputError("expected a " + name + " instance, got " + g.name);
}

inline Gluing glue(int fa, int ea, int fb, int eb, Mat2 m = Mat2::Identity(), Vec2 off = Vec2::Zero()) {
    Gluing g;
    g.face_a = fa, g.edge_a = ea, g.face_b = fb, g.edge_b = eb;
    g.matrix = m;
    g.offset = off;
    return g;
}

}  // namespace detail

// ---- glued half-planes -----------------------------------------------------------------

// Upper and lower half-planes with norms x^2 + 2 b x y + y^2, glued along the
// x-axis. Both restrict to |x| on horizontal vectors.
inline GalleryInstance build_glued_half_planes(double beta_up, double beta_down) {
    for (double b : {beta_up, beta_down})
        if (!(1 - b * b > 0)) throw InputError("half-plane norm is not positive definite (need |beta| < 1)");
    Face u{0, Polygon::unbounded({Vec2(0, 0)}, Vec2(-1, 0), Vec2(1, 0)), ellipsoidal(mat2(1, beta_up, beta_up, 1))};
    Face d{1, Polygon::unbounded({Vec2(0, 0)}, Vec2(1, 0), Vec2(-1, 0)),
           ellipsoidal(mat2(1, beta_down, beta_down, 1))};
    Complex c({u, d}, {detail::glue(0, 0, 1, 1), detail::glue(0, 1, 1, 0)});
    return detail::finish("half-planes", {{"beta_up", beta_up}, {"beta_down", beta_down}}, std::move(c),
                          "two normed half-planes whose norms agree on horizontals but have different "
                          "vertical derivatives there");
}

struct ConvexityProbe {
    std::vector<double> anchors{0.25, 0.5, 1.0, -0.25, -0.5, -1.0};  // P = (a, 0)
    std::vector<double> steps{0.2, 0.1, 0.05, 0.02};
    double center = 0;       // probe t = center, center +- h on the y-axis
    int triangles = 200;     // Busemann midpoint triangles
    double box = 1.0;        // triangles sampled in [-box, box]^2
    std::uint64_t seed = 1;
    double threshold = 1e-9;  // margins above this count as violations
};

struct ConvexityRow {
    double anchor, step, g_minus, g_center, g_plus, margin;
};

struct ConvexityReport {
    std::vector<ConvexityRow> rows;
    int violations = 0;
    double max_margin = -kInf;
    std::optional<ConvexityRow> witness;
    int triangles = 0;
    int busemann_violations = 0;
    double busemann_max_margin = -kInf;
    std::optional<std::array<Point, 3>> busemann_witness;

    json to_json() const {
        auto row = [](const ConvexityRow& r) {
            return json{{"anchor", r.anchor}, {"step", r.step},     {"g_minus", r.g_minus},
                        {"g_center", r.g_center}, {"g_plus", r.g_plus}, {"margin", r.margin}};
        };
        auto pt = [](const Point& p) { return json{{"face", p.face}, {"x", p.x.x()}, {"y", p.x.y()}}; };
        json rs = json::array();
        for (auto& r : rows) rs.push_back(row(r));
        json j{{"rows", rs},
               {"violations", violations},
               {"max_margin", max_margin},
               {"triangles", triangles},
               {"busemann_violations", busemann_violations},
               {"busemann_max_margin", busemann_max_margin}};
        if (witness) j["witness"] = row(*witness);
        if (busemann_witness)
            j["busemann_witness"] = {pt((*busemann_witness)[0]), pt((*busemann_witness)[1]), pt((*busemann_witness)[2])};
        return j;
    }
};

// (a) Midpoint convexity of t -> d((a, 0), (0, t)) at the probe center.
// (b) Busemann midpoint inequality d(m(o, a), m(o, b)) <= d(a, b) / 2 on random triangles.
inline ConvexityReport measure_convexity_failure(const GalleryInstance& inst, const ConvexityProbe& cfg = {}) {
    detail::require_instance(inst, "half-planes");
    const Complex& c = *inst.complex;
    auto at = [](double x, double y) { return Point{y >= 0 ? 0 : 1, Vec2(x, y)}; };
    ConvexityReport rep;
    for (double a : cfg.anchors)
        for (double h : cfg.steps) rep.rows.push_back({a, h, 0, 0, 0, 0});
    parallel_for(rep.rows.size(), [&](std::size_t k) {
        auto& r = rep.rows[k];
        Point p = at(r.anchor, 0);
        r.g_minus = dist(c, p, at(0, cfg.center - r.step));
        r.g_center = dist(c, p, at(0, cfg.center));
        r.g_plus = dist(c, p, at(0, cfg.center + r.step));
        r.margin = r.g_center - 0.5 * (r.g_minus + r.g_plus);
    });
    for (auto& r : rep.rows) {
        if (r.margin > rep.max_margin) rep.max_margin = r.margin;
        if (r.margin > cfg.threshold) {
            ++rep.violations;
            if (!rep.witness || r.margin > rep.witness->margin) rep.witness = r;
        }
    }

    Rng rng(cfg.seed);
    std::vector<std::array<Point, 3>> tri(cfg.triangles);
    for (auto& t : tri)
        for (auto& p : t) p = at(rng.uniform(-cfg.box, cfg.box), rng.uniform(-cfg.box, cfg.box));
    std::vector<double> margin(tri.size(), -kInf);
    parallel_for(tri.size(), [&](std::size_t k) {
        auto& [o, a, b] = tri[k];
        try {
            Point m1 = midpoint(c, o, a), m2 = midpoint(c, o, b);
            margin[k] = dist(c, m1, m2) - 0.5 * dist(c, a, b);
        } catch (const NonUniqueMidpointError&) {
        }
    });
    for (std::size_t k = 0; k < tri.size(); ++k) {
        if (margin[k] == -kInf) continue;
        ++rep.triangles;
        if (margin[k] > rep.busemann_max_margin) rep.busemann_max_margin = margin[k];
        if (margin[k] > cfg.threshold) {
            if (!rep.busemann_violations || margin[k] >= rep.busemann_max_margin) rep.busemann_witness = tri[k];
            ++rep.busemann_violations;
        }
    }
    return rep;
}

// ---- belt ------------------------------------------------------------------------------

namespace detail {

// Norm of the upper triangle: horizontal lengths scaled by f, blended back to
// Euclidean near the diagonal so the gluing along y = x is isometric.
inline Norm belt_top_norm(double f, double patch_angle) {
    Norm n = cone_patched(ellipsoidal(mat2(f * f, 0, 0, 1)), Vec(Vec2(1, 1)), patch_angle, 1.0);
    auto rep = verify_norm(n, 4000);
    if (!rep.strictly_convex)
        throw ConstructionError("belt patch breaks strict convexity (worst midpoint margin " +
                                std::to_string(rep.worst_midpoint_margin) + "); use a smaller stretch factor or a "
                                "different patch_angle");
    return n;
}

// Top edge at y = 2 split so that [-1/f, 1/f] carries the period gluing.
inline std::vector<Vec2> belt_top_vertices(double f, std::vector<Vec2> lower) {
    std::vector<Vec2> v = std::move(lower);
    v.push_back(Vec2(1, 2));
    if (f > 1) v.push_back(Vec2(1 / f, 2)), v.push_back(Vec2(-1 / f, 2));
    v.push_back(Vec2(-1, 2));
    return v;
}

inline Gluing belt_period_gluing(int top, int top_edge, int bottom, int bottom_edge, double f) {
    return glue(top, top_edge, bottom, bottom_edge, mat2(f, 0, 0, 1), Vec2(0, -4));
}

}  // namespace detail

// Fundamental domain [-1, 1] x [-2, 2] cut by y = x: Euclidean below (face 0),
// horizontally scaled by f above (face 1). The middle of the top side, of
// scaled length 2, is glued to the bottom side by x -> f x.
inline GalleryInstance build_belt(double factor = 1.01, double patch_angle = 0.35, int max_periods = 4096) {
    if (!(factor >= 1)) throw InputError("belt factor must be at least 1");
    if (!(patch_angle > 0 && patch_angle < M_PI / 4))
        throw InputError("patch_angle must lie in (0, pi/4) so the patch avoids vertical directions");
    double f = factor;
    Face b{0, Polygon::bounded({Vec2(-1, -2), Vec2(1, -2), Vec2(1, 1), Vec2(-1, -1)}), euclidean()};
    Face t{1, Polygon::bounded(detail::belt_top_vertices(f, {Vec2(-1, -1), Vec2(1, 1)})),
           detail::belt_top_norm(f, patch_angle)};
    Complex c({b, t}, {detail::glue(0, 2, 1, 0)});
    PeriodicSpec ps;
    ps.period_gluings.push_back(detail::belt_period_gluing(1, f > 1 ? 3 : 2, 0, 0, f));
    ps.max_periods = max_periods;
    c.set_periodic(ps);
    return detail::finish("belt", {{"factor", factor}, {"patch_angle", patch_angle}, {"max_periods", max_periods}},
                          std::move(c),
                          "rectangle cut along y = x with the upper part scaled horizontally; top glued to bottom "
                          "with a stretch, giving a strip as universal cover");
}

struct AsymptoticsConfig {
    std::vector<double> offsets{0.05};
    int periods = 10;
    double y0 = 1.9;           // launch height in the top period
    int samples_per_period = 10;  // vertices per period for the shortening run
    bool confirm = true;       // run T-infinity on the vertical broken line
    double tol = 1e-10;
};

struct AsymptoticsRun {
    double offset = 0;
    std::vector<double> deviations;  // |x| at height -1 of each period, from the launch period downward
    std::optional<double> ratio;     // fitted per-period ratio, absent when deviations vanish
    bool non_increasing = true;
    bool bounded = true;
    double max_deviation = 0;
    std::optional<double> shortening_gap;  // largest deviation mismatch between solver and T-infinity
    int shortening_iterations = 0;
    double length = 0;

    json to_json() const {
        json j{{"offset", offset},
               {"deviations", deviations},
               {"ratio", ratio ? json(*ratio) : json(nullptr)},
               {"non_increasing", non_increasing},
               {"bounded", bounded},
               {"max_deviation", max_deviation},
               {"length", length}};
        if (shortening_gap) j["shortening_gap"] = *shortening_gap, j["shortening_iterations"] = shortening_iterations;
        return j;
    }
};

struct AsymptoticsReport {
    double factor = 1;
    int periods = 0;
    std::vector<AsymptoticsRun> runs;
    json to_json() const {
        json r = json::array();
        for (auto& x : runs) r.push_back(x.to_json());
        return {{"factor", factor}, {"periods", periods}, {"runs", r}};
    }
};

namespace detail {

// x-coordinate where the path crosses height y inside window face f.
inline std::optional<double> crossing_x(const VertexPath& p, int f, double y) {
    for (int i = 0; i < p.edges(); ++i) {
        if (p.edge_faces[i] != f) continue;
        auto [a, b] = p.seg[i];
        if ((a.y() - y) * (b.y() - y) > 0 || a.y() == b.y()) continue;
        double lam = (y - a.y()) / (b.y() - a.y());
        return a.x() + lam * (b.x() - a.x());
    }
    return std::nullopt;
}

inline std::vector<double> belt_deviations(const VertexPath& p, const PeriodicCover& cover, int periods) {
    std::vector<double> d;
    for (int k = periods - 1; k >= 0; --k) {
        auto x = crossing_x(p, cover.window_face(k, 0), -1.0);
        if (!x) throw NonConvergenceError("tracked geodesic does not cross period " + std::to_string(k), {});
        d.push_back(std::abs(*x));
    }
    return d;
}

}  // namespace detail

// Geodesic from (eps, y0) in the top period of a window down to the point on
// the same vertical in the bottom period, solved over its face sequence and
// confirmed by T-infinity started on the vertical broken line.
inline AsymptoticsReport measure_asymptotics(const GalleryInstance& inst, const AsymptoticsConfig& cfg = {}) {
    detail::require_instance(inst, "belt");
    const PeriodicCover& cover = *inst.cover;
    int K = cfg.periods;
    auto win = cover.window(K);
    const Complex& c = *win;
    double f = inst.parameters.at("factor").get<double>();
    AsymptoticsReport rep;
    rep.factor = f;
    rep.periods = K;
    SearchConfig sc;
    sc.max_faces = 2 * K + 2;
    for (double eps : cfg.offsets) {
        AsymptoticsRun run;
        run.offset = eps;
        auto x_at = [&](int k) { return eps * std::pow(f, k - (K - 1)); };
        Point p{cover.window_face(K - 1, 1), Vec2(eps, cfg.y0)};
        Point q{cover.window_face(0, 0), Vec2(x_at(0), -cfg.y0)};
        auto [L, path] = local_distance(c, p, q, sc);
        run.length = L;
        run.deviations = detail::belt_deviations(path, cover, K);

        if (cfg.confirm) {
            // equal vertical steps along the developed line: a fixed point of T
            std::vector<Point> pts{p};
            int n = cfg.samples_per_period * K;
            double total = 4.0 * K - 2 * (2 - cfg.y0);
            for (int i = 1; i <= n; ++i) {
                double u = total * i / n + (2 - cfg.y0);  // descent measured from the window top
                int k = std::clamp(K - 1 - int(std::floor(u / 4)), 0, K - 1);
                double y = 2 - (u - 4.0 * (K - 1 - k));
                double x = x_at(k);
                pts.push_back(i == n ? q : Point{cover.window_face(k, y > x ? 1 : 0), Vec2(x, y)});
            }
            RadiusConfig rc;
            rc.pairs = 12;
            rc.levels = 6;
            rc.search = sc;
            double rho = uniqueness_radius(c, Point{cover.window_face(K / 2, 0), Vec2(x_at(K / 2), -1)}, rc).radius;
            auto seq = make_admissible(c, pts, rho, sc);
            auto res = shorten_to_geodesic(c, seq, cfg.tol, 100000, sc);
            auto dv = detail::belt_deviations(res.path, cover, K);
            double gap = 0;
            for (int j = 0; j < K; ++j) gap = std::max(gap, std::abs(dv[j] - run.deviations[j]));
            run.shortening_gap = gap;
            run.shortening_iterations = res.iterations;
        }

        const auto& d = run.deviations;
        run.max_deviation = *std::max_element(d.begin(), d.end());
        for (int j = 0; j + 1 < K; ++j)
            if (d[j + 1] > d[j] + 1e-12) run.non_increasing = false;
        run.bounded = run.max_deviation <= d.front() + 1e-9;
        if (std::all_of(d.begin(), d.end(), [](double v) { return v > 1e-12; })) {
            // least-squares slope of log d_j against j
            double sj = 0, sl = 0, sjj = 0, sjl = 0;
            for (int j = 0; j < K; ++j) {
                double l = std::log(d[j]);
                sj += j, sl += l, sjj += double(j) * j, sjl += j * l;
            }
            double den = K * sjj - sj * sj;
            run.ratio = den > 0 ? std::exp((K * sjl - sj * sl) / den) : 1.0;
        }
        rep.runs.push_back(run);
    }
    return rep;
}

// Two belts, each a finite stack of periods, joined by a Euclidean rectangle
// [0, 1] x [0, h] whose bottom and top are glued along the segment
// [0, 1] x {0} of period `bridge_period` in each belt. Faces per belt period:
// lower and upper parts of the Euclidean triangle, then the scaled triangle.
inline GalleryInstance build_double_belt(double factor = 1.01, double patch_angle = 0.35, int periods = 6,
                                         double bridge_height = 1.0, int bridge_period = -1) {
    if (!(factor >= 1)) throw InputError("belt factor must be at least 1");
    if (periods < 1) throw InputError("double belt needs at least one period");
    if (!(bridge_height > 0)) throw InputError("bridge height must be positive");
    if (bridge_period < 0) bridge_period = periods / 2;
    if (bridge_period >= periods) throw InputError("bridge period outside the belt");
    double f = factor;
    Norm top = detail::belt_top_norm(f, patch_angle);
    Polygon lo = Polygon::bounded({Vec2(-1, -2), Vec2(1, -2), Vec2(1, 0), Vec2(0, 0), Vec2(-1, -1)});
    Polygon hi = Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)});
    Polygon tp = Polygon::bounded(detail::belt_top_vertices(f, {Vec2(-1, -1), Vec2(0, 0), Vec2(1, 1)}));
    int top_mid = f > 1 ? 4 : 3;
    std::vector<Face> faces;
    std::vector<Gluing> gl;
    auto idx = [&](int belt, int k, int part) { return (belt * periods + k) * 3 + part; };
    for (int belt = 0; belt < 2; ++belt)
        for (int k = 0; k < periods; ++k) {
            faces.push_back({idx(belt, k, 0), lo, euclidean()});
            faces.push_back({idx(belt, k, 1), hi, euclidean()});
            faces.push_back({idx(belt, k, 2), tp, top});
            gl.push_back(detail::glue(idx(belt, k, 0), 2, idx(belt, k, 1), 0));
            gl.push_back(detail::glue(idx(belt, k, 2), 0, idx(belt, k, 0), 3));
            gl.push_back(detail::glue(idx(belt, k, 2), 1, idx(belt, k, 1), 2));
            if (k + 1 < periods)
                gl.push_back(detail::belt_period_gluing(idx(belt, k, 2), top_mid, idx(belt, k + 1, 0), 0, f));
        }
    int r = int(faces.size());
    double h = bridge_height;
    faces.push_back({r, Polygon::bounded({Vec2(0, 0), Vec2(1, 0), Vec2(1, h), Vec2(0, h)}), euclidean()});
    gl.push_back(detail::glue(r, 0, idx(0, bridge_period, 0), 2));
    gl.push_back(detail::glue(r, 2, idx(1, bridge_period, 0), 2, Mat2::Identity(), Vec2(0, -h)));
    Complex c(std::move(faces), std::move(gl));
    return detail::finish("double-belt",
                          {{"factor", factor},
                           {"patch_angle", patch_angle},
                           {"periods", periods},
                           {"bridge_height", bridge_height},
                           {"bridge_period", bridge_period}},
                          std::move(c), "two finite belt windows joined by a rectangle along a horizontal segment");
}

// ---- three-strip flag ------------------------------------------------------------------------

// Strips y in [s, s + w] (top, face 0), [-s, s] (middle, face 1) and
// [-s - w, -s] (bottom, face 2) over x in [-hw, hw]. The middle norm is the
// maximum of the forms [[1, +-k], [+-k, 1]], with its corner along the vertical.
inline GalleryInstance build_russian_flag(double corner_sharpness = 0.5, double half_strip = 0.05,
                                          double outer_width = 2.0, double half_length = 3.0) {
    double k = corner_sharpness;
    if (!(k > 0 && k < 1)) throw InputError("corner_sharpness must lie in (0, 1)");
    if (!(half_strip > 0 && outer_width > 0 && half_length > 0)) throw InputError("flag dimensions must be positive");
    double s = half_strip, w = outer_width, a = half_length;
    auto rect = [&](double y0, double y1) {
        return Polygon::bounded({Vec2(-a, y0), Vec2(a, y0), Vec2(a, y1), Vec2(-a, y1)});
    };
    Norm mid = max_of_ellipsoidal({mat2(1, k, k, 1), mat2(1, -k, -k, 1)});
    if (std::abs(mid(Vec(Vec2(1, 0))) - 1) > 1e-14)
        throw ConstructionError("middle norm disagrees with the outer strips on horizontals");
    Complex c({{0, rect(s, s + w), euclidean()}, {1, rect(-s, s), mid}, {2, rect(-s - w, -s), euclidean()}},
              {detail::glue(0, 0, 1, 2), detail::glue(1, 0, 2, 2)});
    return detail::finish("flag",
                          {{"corner_sharpness", k},
                           {"half_strip", s},
                           {"outer_width", w},
                           {"half_length", a}},
                          std::move(c), "three horizontal strips; the middle norm has a corner at the vertical");
}

struct FanConfig {
    int members = 11;        // odd; offsets symmetric about 0
    double fraction = 0.9;   // of the measured half-width
    double slope_tol = 1e-9;
};

struct FanMember {
    double offset = 0;
    double length = 0;
    double slope = 0;   // most negative one-sided slope at the crossings
    double local_defect = 0;
    bool geodesic = false;
    VertexPath path;
};

struct FanReport {
    double half_width_left = 0, half_width_right = 0;
    double analytic_half_width = 0;
    std::vector<FanMember> members;
    int geodesics = 0;
    double spread = 0;
    bool monotone = true;
    double monotone_margin = kInf;  // smallest consecutive length increase away from 0

    json to_json() const {
        json m = json::array();
        for (auto& x : members)
            m.push_back({{"offset", x.offset},
                         {"length", x.length},
                         {"slope", x.slope},
                         {"local_defect", x.local_defect},
                         {"geodesic", x.geodesic}});
        return {{"half_width_left", half_width_left},
                {"half_width_right", half_width_right},
                {"analytic_half_width", analytic_half_width},
                {"members", m},
                {"geodesics", geodesics},
                {"spread", spread},
                {"monotone", monotone},
                {"monotone_margin", monotone_margin}};
    }

    std::string csv() const {
        std::ostringstream o;
        o.precision(17);
        o << "offset,length,slope,geodesic\n";
        for (auto& x : members) o << x.offset << ',' << x.length << ',' << x.slope << ',' << (x.geodesic ? 1 : 0) << '\n';
        return o.str();
    }
};

// Broken lines [p, x, y, q] with [x, y] a vertical chord of the middle strip,
// offset horizontally from the common vertical of p and q.
inline FanReport geodesic_fan(const GalleryInstance& inst, const Point& p, const Point& q, const FanConfig& cfg = {}) {
    detail::require_instance(inst, "flag");
    const Complex& c = *inst.complex;
    if (p.face != 0 || q.face != 2) throw InputError("fan needs p in the top strip and q in the bottom strip");
    if (!c.contains(p) || !c.contains(q)) throw InputError("fan endpoints lie outside their strips");
    if (std::abs(p.x.x() - q.x.x()) > 1e-12) throw InputError("fan endpoints must lie on a common vertical");
    if (cfg.members < 1 || cfg.members % 2 == 0) throw InputError("fan member count must be odd");
    double s = inst.parameters.at("half_strip").get<double>();
    double a = inst.parameters.at("half_length").get<double>();
    double kappa = inst.parameters.at("corner_sharpness").get<double>();
    double x0 = p.x.x();
    auto build = [&](double off) {
        Point x{0, Vec2(x0 + off, s)}, y{1, Vec2(x0 + off, -s)};
        return make_vertex_path(c, {p, x, y, q}, {0, 1, 2}, true);
    };
    auto passes = [&](double off) { return one_sided_slope(c, build(off)) >= -cfg.slope_tol; };

    FanReport rep;
    double da = p.x.y() - s, db = -s - q.x.y();
    rep.analytic_half_width = kappa * std::min(da, db) / std::sqrt(1 - kappa * kappa);
    for (int side : {1, -1}) {
        double lo = 0, hi = side > 0 ? a - x0 : a + x0;
        if (passes(side * hi)) {
            lo = hi;
        } else {
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                double mid = 0.5 * (lo + hi);
                (passes(side * mid) ? lo : hi) = mid;
            }
        }
        (side > 0 ? rep.half_width_right : rep.half_width_left) = lo;
    }
    double hw = std::min(rep.half_width_left, rep.half_width_right);
    int half = cfg.members / 2;
    rep.members.resize(cfg.members);
    parallel_for(rep.members.size(), [&](std::size_t i) {
        auto& m = rep.members[i];
        int j = int(i) - half;
        m.offset = half ? j * cfg.fraction * hw / half : 0.0;
        m.path = build(m.offset);
        m.length = m.path.length();
        m.slope = one_sided_slope(c, m.path);
        m.local_defect = local_geodesic_defect(c, m.path);
        m.geodesic = m.slope >= -cfg.slope_tol;
    });
    double lmin = kInf, lmax = -kInf;
    for (auto& m : rep.members) {
        if (m.geodesic) ++rep.geodesics;
        lmin = std::min(lmin, m.length), lmax = std::max(lmax, m.length);
    }
    rep.spread = lmax - lmin;
    for (int j = 1; j <= half; ++j)
        for (int side : {1, -1}) {
            double inc = rep.members[half + side * j].length - rep.members[half + side * (j - 1)].length;
            rep.monotone_margin = std::min(rep.monotone_margin, inc);
            if (!(inc > 0)) rep.monotone = false;
        }
    return rep;
}

}  // namespace fpl
