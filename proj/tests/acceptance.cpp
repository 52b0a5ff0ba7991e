// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Every criterion is a pure function of fixed seeds returning a JSON record;
// the determinism criterion reruns them all under a different thread count.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>

#include <finsler_pl/gallery.hpp>
#include <finsler_pl/saddle.hpp>

using namespace fpl;

namespace {

struct Outcome {
    bool pass = false;
    std::string summary;
    json data;
};

struct Criterion {
    std::string id, title;
    std::function<Outcome()> run;
};

struct Space {
    std::string name;
    std::shared_ptr<const Complex> c;
    Region region;
};

std::shared_ptr<const Complex> saddle_complex(std::uint64_t seed) {
    Rng rng(seed);
    return std::make_shared<const Complex>(induced_complex(random_graph_cone(rng, true)));
}

std::shared_ptr<const Complex> flat_plane() {
    auto c = std::make_shared<Complex>(std::vector<Face>{Face{0, Polygon::plane(), lp(2, 3.0)}}, std::vector<Gluing>{});
    c->require_valid();
    return c;
}

Region box(double lx, double ly, double hx, double hy) {
    Region r;
    r.lo = Vec2(lx, ly);
    r.hi = Vec2(hx, hy);
    return r;
}

std::vector<Space> four_spaces() {
    return {{"flat", flat_plane(), Region{}},
            {"half_planes", build_glued_half_planes(0.5, -0.5).complex, Region{}},
            {"saddle_cone", saddle_complex(101), Region{}},
            {"belt_window", build_belt(1.01).cover->window(2), box(-1, -2, 1, 2)}};
}

// Keeps sampled vertices away from free edges so that radius caps stay usable.
constexpr double kEdgeClearance = 0.5;

Point interior_sample(const Complex& c, const Region& reg, Rng& rng) {
    for (;;) {
        Point p = c.canonical(sample_region(c, reg, rng));
        if (free_boundary_distance(c, p) >= kEdgeClearance) return p;
    }
}

Vec2 unit_dir(Rng& rng) {
    double a = rng.uniform(0, 2 * M_PI);
    return Vec2(std::cos(a), std::sin(a));
}

std::vector<Point> random_walk(const Complex& c, const Region& reg, Rng& rng, int n, double lo, double hi) {
    std::vector<Point> pts{interior_sample(c, reg, rng)};
    while (int(pts.size()) < n) {
        Point nx = c.canonical(shoot(c, pts.back(), unit_dir(rng), rng.uniform(lo, hi)));
        if (c.approx_distance(nx, pts.back()) < 1e-3 || free_boundary_distance(c, nx) < kEdgeClearance) continue;
        pts.push_back(nx);
    }
    return pts;
}

RadiusConfig quick_radius(std::uint64_t seed) {
    RadiusConfig r;
    r.pairs = 8;
    r.levels = 4;
    r.seed = seed;
    return r;
}

// Admissible sequence from a generator, retrying on inadmissible draws.
template <class Gen>
std::optional<AdmissibleSequence> draw_admissible(const Complex& c, Gen&& gen, std::uint64_t seed, int& rejected,
                                                  int tries = 50) {
    for (int t = 0; t < tries; ++t) {
        try {
            return make_admissible(c, gen(), quick_radius(seed + t));
        } catch (const InputError&) {
        } catch (const NonUniqueMidpointError&) {
        }
        ++rejected;
    }
    return std::nullopt;
}

double rel_edge_spread(const AdmissibleSequence& s) {
    double lo = kInf, hi = 0, sum = 0;
    for (auto& p : s.pieces) lo = std::min(lo, p.length()), hi = std::max(hi, p.length()), sum += p.length();
    return (hi - lo) / (sum / s.n());
}

double max_vertex_move(const Complex& c, const AdmissibleSequence& a, const AdmissibleSequence& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.points.size(); ++i) m = std::max(m, c.approx_distance(a.points[i], b.points[i]));
    return m;
}

// ---- 1: monotonicity of L, delta, E under T --------------------------------------------------

Outcome shortening_monotonicity() {
    const int per_space = 125, steps = 4;
    const double tol = 1e-9;
    Outcome o;
    o.pass = true;
    json rows = json::array();
    int total = 0, index = 0;
    for (auto& sp : four_spaces()) {
        const Complex& c = *sp.c;
        Rng rng(1001 + index++);
        int rejected = 0, sequences = 0, checked_steps = 0, strict_checks = 0, strict_failures = 0, errors = 0;
        double up_L = -kInf, up_delta = -kInf, up_E = -kInf;
        for (int k = 0; k < per_space; ++k) {
            int n = rng.integer(3, 8);
            auto s = draw_admissible(
                c, [&] { return random_walk(c, sp.region, rng, n, 0.05, 0.22); }, 10000 + k, rejected);
            if (!s) {
                ++errors;
                continue;
            }
            ++sequences;
            for (int st = 0; st < steps; ++st) {
                AdmissibleSequence next;
                try {
                    next = shorten_step(c, *s);
                } catch (const Error&) {
                    ++errors;
                    break;
                }
                ++checked_steps;
                up_L = std::max(up_L, next.length() - s->length());
                up_delta = std::max(up_delta, next.delta() - s->delta());
                up_E = std::max(up_E, next.energy() - s->energy());
                if (!is_geodesic_sequence(c, s->points, 1e-6)) {
                    ++strict_checks;
                    if (!(next.length() < s->length())) ++strict_failures;
                }
                *s = std::move(next);
            }
        }
        total += sequences;
        bool ok = sequences == per_space && errors == 0 && up_L <= tol && up_delta <= tol && up_E <= tol &&
                  strict_failures == 0;
        o.pass = o.pass && ok;
        rows.push_back({{"space", sp.name}, {"sequences", sequences}, {"rejected_draws", rejected}, {"steps", checked_steps},
                        {"max_increase_L", up_L}, {"max_increase_delta", up_delta}, {"max_increase_E", up_E},
                        {"strict_checks", strict_checks}, {"strict_failures", strict_failures}, {"errors", errors},
                        {"pass", ok}});
    }
    o.data = {{"spaces", rows}, {"sequences", total}};
    o.summary = std::to_string(total) + " sequences, 4 spaces";
    return o;
}

// ---- 2: fixed points are equal-edge geodesics and conversely ---------------------------------

Outcome fixed_points() {
    Outcome o;
    o.pass = true;
    json rows = json::array();
    int built = 0, detected = 0;
    double worst_move = 0, worst_defect = 0, worst_spread = 0;
    for (auto& sp : four_spaces()) {
        const Complex& c = *sp.c;
        Rng rng(2002 + built);
        int rejected = 0, made = 0, moved = 0, found = 0, failed_converse = 0;
        double sp_move = 0;
        while (made < 25 && rejected < 500) {
            Point p = interior_sample(c, sp.region, rng);
            Point q = c.canonical(shoot(c, p, unit_dir(rng), rng.uniform(0.4, 1.2)));
            auto [d, path] = local_distance(c, p, q);
            if (!(d > 0.2) || !std::isfinite(d)) {
                ++rejected;
                continue;
            }
            int n = std::max(2, int(std::ceil(d / 0.15)));
            std::optional<AdmissibleSequence> s;
            try {
                s = make_admissible(c, resample(c, path, n), quick_radius(20000 + made));
            } catch (const Error&) {
                ++rejected;
                continue;
            }
            ++made;
            double move = max_vertex_move(c, *s, shorten_step(c, *s));
            sp_move = std::max(sp_move, move);
            if (move > 1e-9) ++moved;
        }
        for (int k = 0; k < 5; ++k) {
            int n = rng.integer(3, 6);
            auto s = draw_admissible(
                c, [&] { return random_walk(c, sp.region, rng, n, 0.05, 0.22); }, 30000 + k, rejected);
            if (!s) {
                ++failed_converse;
                continue;
            }
            try {
                auto res = shorten_to_geodesic(c, *s, 1e-12, 200000);
                double defect = geodesic_defect(c, res.sequence.points);
                double spread = rel_edge_spread(res.sequence);
                worst_defect = std::max(worst_defect, defect);
                worst_spread = std::max(worst_spread, spread);
                if (defect > 1e-8 || spread > 1e-8) ++failed_converse;
                ++found;
            } catch (const Error&) {
                ++failed_converse;
            }
        }
        built += made;
        detected += found;
        worst_move = std::max(worst_move, sp_move);
        bool ok = made == 25 && moved == 0 && found == 5 && failed_converse == 0;
        o.pass = o.pass && ok;
        rows.push_back({{"space", sp.name}, {"constructed", made}, {"rejected_draws", rejected}, {"max_vertex_move", sp_move},
                        {"moved", moved}, {"fixed_points", found}, {"converse_failures", failed_converse}, {"pass", ok}});
    }
    o.data = {{"spaces", rows}, {"worst_move", worst_move}, {"worst_defect", worst_defect}, {"worst_edge_spread", worst_spread}};
    o.summary = std::to_string(built) + " geodesics fixed, " + std::to_string(detected) + " limits equal-edge";
    return o;
}

// ---- 3: limits of T agree with the graph oracle ----------------------------------------------

Point plane_locate(const Complex& c, const Vec2& x) {
    for (int f = 0; f < c.face_count(); ++f)
        if (c.face(f).poly.contains(x, 0)) return c.canonical(Point{f, x});
    throw InputError("point not covered by any face");
}

Outcome limits_vs_oracle() {
    const double h = 0.01;
    Outcome o;
    o.pass = true;
    json rows = json::array();
    double worst_rel = 0, worst_below = kInf;
    int pairs = 0;
    std::vector<Space> spaces = {{"half_planes", build_glued_half_planes(0.5, -0.5).complex, Region{}},
                                 {"saddle_cone", saddle_complex(303), Region{}}};
    for (auto& sp : spaces) {
        const Complex& c = *sp.c;
        auto g = build_graph(c, box(-1.2, -1.2, 1.2, 1.2), h);
        Rng rng(3003);
        int done = 0, failures = 0, rejected = 0;
        while (done < 25) {
            Vec2 a(rng.uniform(-1, 1), rng.uniform(-1, 1)), b(rng.uniform(-1, 1), rng.uniform(-1, 1));
            if ((b - a).norm() < 0.5) continue;
            int n = int(std::ceil((b - a).norm() / 0.2));
            Vec2 perp = Vec2(a.y() - b.y(), b.x() - a.x()).normalized();
            auto gen = [&] {
                std::vector<Point> pts;
                for (int i = 0; i <= n; ++i) {
                    double wiggle = (i == 0 || i == n) ? 0 : rng.uniform(-0.05, 0.05);
                    pts.push_back(plane_locate(c, a + (b - a) * (double(i) / n) + wiggle * perp));
                }
                return pts;
            };
            auto s = draw_admissible(c, gen, 40000 + done, rejected);
            if (!s) {
                ++failures;
                ++done;
                continue;
            }
            double L;
            try {
                L = shorten_to_geodesic(c, *s, 1e-10, 200000).sequence.length();
            } catch (const Error&) {
                ++failures;
                ++done;
                continue;
            }
            double up = oracle_distance(*g, s->points.front(), s->points.back()).distance_upper;
            double rel = std::abs(L - up) / L;
            bool ok = std::abs(L - up) <= std::max(0.01 * L, 5 * h) && up >= L - 1e-9;
            if (!ok) ++failures;
            worst_rel = std::max(worst_rel, rel);
            worst_below = std::min(worst_below, up - L);
            rows.push_back({{"space", sp.name}, {"limit_length", L}, {"oracle", up}, {"pass", ok}});
            ++done;
        }
        pairs += done;
        o.pass = o.pass && failures == 0;
    }
    o.data = {{"pairs", rows}, {"h", h}, {"worst_relative_gap", worst_rel}, {"min_oracle_minus_limit", worst_below}};
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d pairs, worst |L-oracle|/L %.4f, min oracle-L %.2e", pairs, worst_rel, worst_below);
    o.summary = buf;
    return o;
}

// ---- 4: oracle distances from a cone apex approach the radial distance ------------------------

Norm random_norm(Rng& rng, int dim) {
    switch (rng.integer(0, 2)) {
        case 0:
            return euclidean(dim, rng.uniform(0.5, 2));
        case 1: {
            Mat a(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(-1, 1);
            return ellipsoidal(a.transpose() * a + 0.3 * Mat::Identity(dim, dim));
        }
        default: {
            Mat r(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) r(i, j) = (i == j ? 1 : 0) + rng.uniform(-0.4, 0.4);
            return pullback(lp(dim, rng.uniform(1.5, 4)), r);
        }
    }
}

Cone random_cone(Rng& rng, std::vector<double>& ang) {
    int k = rng.integer(3, 5);
    ang.assign(k, 0);
    std::vector<Norm> norms;
    for (auto& a : ang) a = rng.uniform(0.35 * M_PI, 0.85 * M_PI);
    for (int i = 0; i < k; ++i) norms.push_back(random_norm(rng, 2));
    std::vector<Face> faces;
    std::vector<Gluing> gl;
    for (int i = 0; i < k; ++i)
        faces.push_back({i, Polygon::unbounded({Vec2(0, 0)}, Vec2(std::cos(ang[i]), std::sin(ang[i])), Vec2(1, 0)), norms[i]});
    for (int i = 0; i < k; ++i) {
        int j = (i + 1) % k;
        Vec2 w(std::cos(ang[i]), std::sin(ang[i]));
        double lam = norms[i](Vec(w)) / norms[j](Vec(Vec2(1, 0)));
        Gluing g;
        g.face_a = i, g.edge_a = 0, g.face_b = j, g.edge_b = 1;
        Mat2 rot;
        rot << w.x(), w.y(), -w.y(), w.x();
        g.matrix = lam * rot;
        gl.push_back(g);
    }
    Complex c(faces, gl);
    c.require_valid();
    std::vector<Point> apex;
    for (int i = 0; i < k; ++i) apex.push_back(Point{i, Vec2(0, 0)});
    return Cone{std::move(c), apex};
}

Outcome radial_distances() {
    const std::vector<double> hs = {0.02, 0.01, 0.005};
    Outcome o;
    o.pass = true;
    json cones = json::array();
    Rng rng(4004);
    double worst_final = 0;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> ang;
        Cone cone = random_cone(rng, ang);
        const Complex& c = cone.complex;
        std::vector<Point> qs;
        for (int m = 0; m < 3; ++m) {
            int f = rng.integer(0, c.face_count() - 1);
            double a = rng.uniform(0.1, 0.9) * ang[f];
            qs.push_back(Point{f, rng.uniform(0.2, 0.5) * Vec2(std::cos(a), std::sin(a))});
        }
        std::vector<std::vector<double>> gaps(qs.size());
        for (double h : hs) {
            // a fixed hop keeps the lattices nested, so refinement can only shorten paths
            auto g = build_graph(c, box(-0.6, -0.6, 0.6, 0.6), h, 0.04);
            for (std::size_t m = 0; m < qs.size(); ++m) {
                double r = radial_distance(cone, qs[m]);
                gaps[m].push_back((oracle_distance(*g, cone.apex_point(), qs[m]).distance_upper - r) / r);
            }
        }
        json pts = json::array();
        for (std::size_t m = 0; m < qs.size(); ++m) {
            double r = radial_distance(cone, qs[m]);
            bool above = std::all_of(gaps[m].begin(), gaps[m].end(), [&](double x) { return x * r >= -1e-9; });
            bool ok = above && gaps[m].back() < 0.02 && gaps[m].back() <= gaps[m].front();
            worst_final = std::max(worst_final, gaps[m].back());
            o.pass = o.pass && ok;
            pts.push_back({{"face", qs[m].face}, {"radial", r}, {"relative_gaps", gaps[m]}, {"pass", ok}});
        }
        cones.push_back({{"sectors", c.face_count()}, {"queries", pts}});
    }
    o.data = {{"cones", cones}, {"h", hs}, {"hop", 0.04}, {"worst_final_gap", worst_final}};
    char buf[120];
    std::snprintf(buf, sizeof buf, "5 cones, worst gap at h=0.005 %.4f", worst_final);
    o.summary = buf;
    return o;
}

// ---- 5: strict Busemann inequality and its decay ------------------------------------------------

Outcome busemann() {
    const int tuples = 10000;
    Outcome o;
    Rng rng(5005);
    const char* kinds[] = {"euclidean", "ellipsoidal", "lp"};
    int violations[3] = {0, 0, 0}, not_strict[3] = {0, 0, 0}, slow_decay[3] = {0, 0, 0}, count[3] = {0, 0, 0};
    double worst_gap = kInf, worst_decay[3] = {0, 0, 0};
    for (int k = 0; k < tuples; ++k) {
        int kind = k % 3, dim = rng.integer(2, 4);
        Norm n = kind == 0   ? euclidean(dim, rng.uniform(0.5, 2))
                 : kind == 1 ? [&] {
                       Mat a(dim, dim);
                       for (int i = 0; i < dim; ++i)
                           for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(-1, 1);
                       return ellipsoidal(a.transpose() * a + 0.2 * Mat::Identity(dim, dim));
                   }()
                             : lp(dim, rng.uniform(1.5, 4));
        Vec v(dim), a(dim), z(dim);
        for (int i = 0; i < dim; ++i) v(i) = rng.normal(), a(i) = rng.uniform(-2, 2), z(i) = rng.normal();
        v /= n(v);
        Vec g = n.grad(v);
        Vec w = z - g.dot(z) * v;
        bool on_line = k % 20 == 0;
        if (on_line)
            w.setZero();
        else
            w *= std::exp(rng.uniform(std::log(1e-3), std::log(5e-2))) / n(w);
        double t0 = rng.uniform(-5, 5);
        Vec q = a + t0 * v + w;
        std::vector<double> ts = {t0};
        for (double s : {1e-3, 1e-2, 0.1, 0.5, 1.0}) ts.push_back(t0 + s), ts.push_back(t0 - s);
        for (int i = 0; i < 4; ++i) ts.push_back(t0 + rng.uniform(-1, 1));
        auto r = busemann_check(n, a, v, q, t0, ts, 1e-12);
        ++count[kind];
        worst_gap = std::min(worst_gap, r.worst_gap);
        bool ineq = r.inequality_holds;
        for (auto& [s, gap] : r.decay) ineq = ineq && gap >= -1e-12;
        if (!ineq) ++violations[kind];
        if (!on_line && !r.strict) ++not_strict[kind];
        double far = r.decay.back().second;
        worst_decay[kind] = std::max(worst_decay[kind], far);
        if (far >= 1e-3) ++slow_decay[kind];
    }
    json rows = json::array();
    o.pass = true;
    for (int kind = 0; kind < 3; ++kind) {
        bool ok = violations[kind] == 0 && not_strict[kind] == 0 && slow_decay[kind] == 0;
        o.pass = o.pass && ok;
        rows.push_back({{"norm", kinds[kind]}, {"tuples", count[kind]}, {"violations", violations[kind]},
                        {"not_strict", not_strict[kind]}, {"decay_at_1000_max", worst_decay[kind]},
                        {"slow_decay", slow_decay[kind]}, {"pass", ok}});
    }
    o.data = {{"by_norm", rows}, {"worst_gap", worst_gap}};
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d tuples, max gap at 1000: lp %.2e ellipsoidal %.2e", tuples, worst_decay[2],
                  worst_decay[1]);
    o.summary = buf;
    return o;
}

// ---- 6: homotopic broken lines share their limit --------------------------------------------

std::vector<Point> perturbed(const Complex& c, const std::vector<Point>& base, double amp, Rng& rng) {
    std::vector<Point> out = base;
    for (std::size_t i = 1; i + 1 < out.size(); ++i)
        out[i] = c.canonical(shoot(c, base[i], unit_dir(rng), rng.uniform(0, amp)));
    return out;
}

Outcome homotopy_uniqueness() {
    Outcome o;
    o.pass = true;
    json rows = json::array();
    double worst_gap = 0;
    std::vector<Space> spaces = {{"half_planes", build_glued_half_planes(0.5, -0.5).complex, Region{}},
                                 {"saddle_cone", saddle_complex(606), Region{}},
                                 {"belt_window", build_belt(1.01).cover->window(3), box(-1, -2, 1, 2)}};
    for (auto& sp : spaces) {
        const Complex& c = *sp.c;
        Rng rng(6006);
        int done = 0, failures = 0, rejected = 0, multiple = 0;
        double sp_gap = 0;
        while (done < 20 && rejected < 1000) {
            Point p = interior_sample(c, sp.region, rng);
            Point q = c.canonical(shoot(c, p, unit_dir(rng), rng.uniform(0.5, 1.0)));
            if (free_boundary_distance(c, q) < kEdgeClearance) {
                ++rejected;
                continue;
            }
            auto [d, path] = local_distance(c, p, q);
            int n = std::max(2, int(std::ceil(d / 0.15)));
            auto base = resample(c, path, n);
            auto s1 = draw_admissible(c, [&] { return perturbed(c, base, 0.05, rng); }, 60000 + done, rejected, 5);
            auto s2 = draw_admissible(c, [&] { return perturbed(c, base, 0.05, rng); }, 61000 + done, rejected, 5);
            if (!s1 || !s2) continue;
            ++done;
            try {
                auto l1 = shorten_to_geodesic(c, *s1, 1e-11, 200000).sequence.path();
                auto l2 = shorten_to_geodesic(c, *s2, 1e-11, 200000).sequence.path();
                double gap = path_gap(c, l1, l2);
                sp_gap = std::max(sp_gap, gap);
                bool single = enumerate_geodesics(c, p, q).paths.size() == 1;
                if (!single) ++multiple;
                if (gap > 1e-6 || !single) ++failures;
            } catch (const Error&) {
                ++failures;
            }
        }
        worst_gap = std::max(worst_gap, sp_gap);
        bool ok = done == 20 && failures == 0;
        o.pass = o.pass && ok;
        rows.push_back({{"space", sp.name}, {"pairs", done}, {"rejected_draws", rejected}, {"max_limit_gap", sp_gap},
                        {"multiple_minimizers", multiple}, {"failures", failures}, {"pass", ok}});
    }
    o.data = {{"spaces", rows}, {"worst_limit_gap", worst_gap}};
    char buf[120];
    std::snprintf(buf, sizeof buf, "3 spaces x 20 pairs, worst limit gap %.2e", worst_gap);
    o.summary = buf;
    return o;
}

// ---- 7: saddle cones are non-focusing ----------------------------------------------------------

Outcome saddle_cones() {
    Outcome o;
    o.pass = true;
    json sad = json::array(), peaks = json::array();
    int ambiguous = 0;
    double worst_residual = 0;
    for (int k = 0; k < 10; ++k) {
        Rng rng(7000 + k);
        auto s = random_graph_cone(rng, true);
        auto verdict = is_saddle_cone(s);
        auto scan = uniqueness_scan(induced_complex(s), Region{}, 0.5, 300, 7100 + k);
        ambiguous += scan.ambiguous;
        bool ok = verdict.saddle && scan.ambiguous == 0;
        o.pass = o.pass && ok;
        sad.push_back({{"sectors", s.sectors()}, {"certified", verdict.saddle}, {"ambiguous", scan.ambiguous},
                       {"truncated", scan.truncated}, {"pass", ok}});
    }
    for (int k = 0; k < 3; ++k) {
        Rng rng(7200 + k);
        auto s = random_graph_cone(rng, false);
        auto v = is_saddle_cone(s);
        const auto& cert = v.certificate;
        bool ok = !v.saddle && !cert.contains_origin && cert.margin > 0 && cert.residual < 1e-10;
        worst_residual = std::max(worst_residual, cert.residual);
        o.pass = o.pass && ok;
        peaks.push_back({{"certificate", cert.to_json()}, {"pass", ok}});
    }
    o.data = {{"saddle", sad}, {"non_saddle", peaks}};
    o.summary = "10 saddle cones, " + std::to_string(ambiguous) + " ambiguous of 3000; 3 separating certificates";
    return o;
}

// ---- 8, 9, 10: gallery constructions -----------------------------------------------

Outcome half_plane_convexity() {
    auto g = build_glued_half_planes(0.5, -0.5);
    bool valid = g.complex->validate().valid;
    auto rep = measure_convexity_failure(g);
    auto same = measure_convexity_failure(build_glued_half_planes(0.5, 0.5));
    Outcome o;
    o.pass = valid && rep.violations >= 1 && rep.max_margin > 1e-6 && same.violations == 0;
    o.data = {{"valid", valid}, {"glued", rep.to_json()}, {"equal_betas", same.to_json()}};
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d violations, max margin %.3e; equal betas %d", rep.violations, rep.max_margin,
                  same.violations);
    o.summary = buf;
    return o;
}

Outcome belt_contraction() {
    AsymptoticsConfig cfg;
    cfg.periods = 10;
    auto belt = build_belt(1.01);
    bool valid = belt.complex->validate().valid;
    auto rep = measure_asymptotics(belt, cfg);
    auto ctrl = measure_asymptotics(build_belt(1.0), cfg);
    const auto& r = rep.runs.at(0);
    const auto& c = ctrl.runs.at(0);
    Outcome o;
    o.pass = valid && r.non_increasing && r.ratio && *r.ratio < 1 - 1e-4 && c.ratio && std::abs(*c.ratio - 1) <= 1e-6;
    o.data = {{"valid", valid}, {"stretched", rep.to_json()}, {"control", ctrl.to_json()}};
    char buf[120];
    std::snprintf(buf, sizeof buf, "ratio %.6f, control ratio %.9f", r.ratio.value_or(NAN), c.ratio.value_or(NAN));
    o.summary = buf;
    return o;
}

Outcome flag_fan_family() {
    auto g = build_russian_flag();
    double s = g.parameters.at("half_strip").get<double>();
    auto fan = geodesic_fan(g, Point{0, Vec2(0, s + 1)}, Point{2, Vec2(0, -s - 1)});
    const Complex& c = *g.complex;
    bool distinct = true;
    for (std::size_t i = 0; i < fan.members.size(); ++i)
        for (std::size_t j = i + 1; j < fan.members.size(); ++j)
            if (path_gap(c, fan.members[i].path, fan.members[j].path) < 1e-9) distinct = false;
    bool all_geodesic = std::all_of(fan.members.begin(), fan.members.end(), [](auto& m) { return m.geodesic; });
    auto scan = uniqueness_scan(c, Region{}, 0.5, 200, 7);
    Outcome o;
    o.pass = fan.geodesics >= 11 && all_geodesic && distinct && fan.spread > 1e-4 && fan.monotone && scan.ambiguous > 0;
    o.data = {{"fan", fan.to_json()}, {"distinct", distinct}, {"scan", scan.to_json()}};
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d geodesics, spread %.4f, scan ambiguous %d/200", fan.geodesics, fan.spread,
                  scan.ambiguous);
    o.summary = buf;
    return o;
}

}  // namespace

// Optional arguments restrict the run to the named criteria, e.g. `acceptance C4 C9`.
int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {"C1", "shortening monotonicity", shortening_monotonicity},
        {"C2", "fixed points", fixed_points},
        {"C3", "limits vs oracle", limits_vs_oracle},
        {"C4", "radial distances", radial_distances},
        {"C5", "strict Busemann inequality", busemann},
        {"C6", "homotopy uniqueness", homotopy_uniqueness},
        {"C7", "saddle cones", saddle_cones},
        {"C8", "glued half-planes", half_plane_convexity},
        {"C9", "stretched belt", belt_contraction},
        {"C10", "flag fan", flag_fan_family},
    };
    json report;
    bool all = true, identical = true;
    json mismatched = json::array();
    std::vector<std::string> only(argv + 1, argv + argc);
    for (auto& cr : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), cr.id) == only.end()) continue;
        std::string dumps[2];
        Outcome first;
        double secs = 0;
        const int threads[2] = {1, 8};
        for (int r = 0; r < 2; ++r) {
            parallelism() = threads[r];
            auto t = std::chrono::steady_clock::now();
            Outcome out;
            try {
                out = cr.run();
            } catch (const std::exception& e) {
                out.pass = false;
                out.summary = std::string("error: ") + e.what();
                out.data = {{"error", e.what()}};
            }
            if (r == 0) secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
            out.data["pass"] = out.pass;
            dumps[r] = out.data.dump();
            if (r == 0) first = std::move(out);
        }
        if (dumps[0] != dumps[1]) {
            identical = false;
            mismatched.push_back(cr.id);
        }
        all = all && first.pass;
        report[cr.id] = first.data;
        std::printf("%s %-4s %-28s %s (%.1fs)\n", first.pass ? "PASS" : "FAIL", cr.id.c_str(), cr.title.c_str(),
                    first.summary.c_str(), secs);
        std::fflush(stdout);
    }
    parallelism() = 1;
    report["C11"] = {{"identical", identical}, {"mismatched", mismatched}};
    all = all && identical;
    std::printf("%s %-4s %-28s %s\n", identical ? "PASS" : "FAIL", "C11", "determinism",
                identical ? "all records byte-identical at 1 and 8 threads"
                          : ("differs: " + mismatched.dump()).c_str());
    std::ofstream("acceptance_report.json") << report.dump(2) << "\n";
    return all ? 0 : 1;
}
