#pragma once
// Brute-force checks: a lattice graph whose shortest paths are upper bounds
// for the true distance, exhaustive geodesic enumeration, and uniqueness scans.

#include "shortening.hpp"

#include <unordered_map>

namespace fpl {

// Axis-aligned box applied in every face chart, optionally restricted to a
// subset of face indices.
struct Region {
    Vec2 lo = Vec2(-1, -1), hi = Vec2(1, 1);
    std::vector<int> faces;  // empty: all faces

    bool bounded() const { return lo.allFinite() && hi.allFinite(); }
    bool uses(int f) const { return faces.empty() || std::find(faces.begin(), faces.end(), f) != faces.end(); }
    bool inside(const Vec2& x) const {
        return x.x() >= lo.x() && x.y() >= lo.y() && x.x() <= hi.x() && x.y() <= hi.y();
    }
    json to_json() const {
        json j{{"lo", {lo.x(), lo.y()}}, {"hi", {hi.x(), hi.y()}}};
        if (!faces.empty()) j["faces"] = faces;
        return j;
    }
};

class DiscretizationGraph {
public:
    struct Node {
        std::vector<Point> reps;
    };

    DiscretizationGraph(const Complex& c, Region region, double h, double hop)
        : c_(&c), region_(std::move(region)), h_(h), hop_(hop) {
        per_face_.resize(c.face_count());
    }

    const Complex& complex() const { return *c_; }
    const Region& region() const { return region_; }
    double h() const { return h_; }
    double hop_radius() const { return hop_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int node_count() const { return int(nodes_.size()); }

    // Node index with a representative within 1e-9 of p, or -1.
    int find(const Point& p) const {
        const auto& fn = per_face_[p.face];
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                auto jt = fn.grid.find(key(p.x, dx, dy));
                if (jt == fn.grid.end()) continue;
                for (int k : jt->second)
                    if ((fn.xs[k] - p.x).norm() <= 1e-9 * std::max(1.0, p.x.norm())) return fn.ids[k];
            }
        return -1;
    }

    // Adds a node at p (all incident representatives) unless one exists.
    int add(const Point& p) {
        int e = find(p);
        if (e >= 0) return e;
        int id = int(nodes_.size());
        Node n;
        n.reps = c_->incident(p);
        for (auto& r : n.reps) insert(r.face, id, r.x);
        nodes_.push_back(std::move(n));
        return id;
    }

    void add_interior(int f, const Vec2& x) {
        int id = int(nodes_.size());
        nodes_.push_back(Node{{Point{f, x}}});
        insert(f, id, x);
    }

    // Calls fn(neighbor, weight, face) for every node within the hop radius
    // of chart point x in face f.
    template <class Fn>
    void neighbors(int f, const Vec2& x, Fn&& fn) const {
        const auto& fn_ = per_face_[f];
        const Norm& n = c_->face(f).norm;
        double r2 = hop_ * hop_ * (1 + 1e-12);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                auto jt = fn_.grid.find(key(x, dx, dy));
                if (jt == fn_.grid.end()) continue;
                for (int k : jt->second) {
                    Vec2 d = fn_.xs[k] - x;
                    double s = d.squaredNorm();
                    if (s > r2 || s == 0) continue;
                    fn(fn_.ids[k], n(Vec(d)), f);
                }
            }
    }

    // Nearest node in any chart (Euclidean chart distance).
    double snap_distance(const Point& p) const {
        double best = kInf;
        for (auto& r : c_->incident(p)) {
            const auto& fn = per_face_[r.face];
            for (int ring = 1; ring <= 3 && best == kInf; ++ring)
                for (int dx = -ring; dx <= ring; ++dx)
                    for (int dy = -ring; dy <= ring; ++dy) {
                        auto jt = fn.grid.find(key(r.x, dx, dy));
                        if (jt == fn.grid.end()) continue;
                        for (int k : jt->second) best = std::min(best, (fn.xs[k] - r.x).norm());
                    }
        }
        return best;
    }

    long edge_count() const {
        long m = 0;
        for (int u = 0; u < node_count(); ++u) {
            std::vector<int> seen;
            for (auto& r : nodes_[u].reps)
                neighbors(r.face, r.x, [&](int v, double, int) {
                    if (v > u) seen.push_back(v);
                });
            std::sort(seen.begin(), seen.end());
            m += long(std::unique(seen.begin(), seen.end()) - seen.begin());
        }
        return m;
    }

    json to_json() const {
        return json{{"h", h_}, {"hop_radius", hop_}, {"region", region_.to_json()}, {"nodes", node_count()}};
    }

private:
    struct FaceNodes {
        std::vector<int> ids;
        std::vector<Vec2> xs;
        std::unordered_map<std::int64_t, std::vector<int>> grid;
    };

    std::int64_t key(const Vec2& x, int dx = 0, int dy = 0) const {
        auto ix = std::int64_t(std::floor(x.x() / hop_)) + dx, iy = std::int64_t(std::floor(x.y() / hop_)) + dy;
        return (ix << 32) ^ (iy & 0xffffffff);
    }
    void insert(int f, int id, const Vec2& x) {
        auto& fn = per_face_[f];
        fn.grid[key(x)].push_back(int(fn.ids.size()));
        fn.ids.push_back(id);
        fn.xs.push_back(x);
    }

    const Complex* c_;
    Region region_;
    double h_, hop_;
    std::vector<Node> nodes_;
    std::vector<FaceNodes> per_face_;
};

// Lattice h*Z^2 strictly inside each face and the region box, plus boundary
// samples at arclength multiples of h on each edge (sampled once per glued
// pair), edge endpoints and box-clip endpoints. hop <= 0 selects 4h.
inline std::shared_ptr<DiscretizationGraph> build_graph(const Complex& c, const Region& region, double h,
                                                        double hop = 0) {
    if (!region.bounded()) throw InputError("oracle region must be bounded");
    if (!(h > 0)) throw InputError("oracle resolution must be positive");
    if (hop <= 0) hop = 4 * h;
    auto g = std::make_shared<DiscretizationGraph>(c, region, h, hop);
    int F = c.face_count();
    std::vector<std::vector<Vec2>> interior(F);
    parallel_for(std::size_t(F), [&](std::size_t f) {
        if (!region.uses(int(f))) return;
        const Polygon& poly = c.face(int(f)).poly;
        auto i0 = long(std::ceil(region.lo.x() / h)), i1 = long(std::floor(region.hi.x() / h));
        auto j0 = long(std::ceil(region.lo.y() / h)), j1 = long(std::floor(region.hi.y() / h));
        double eps = 1e-12 * std::max(1.0, poly.scale());
        for (long i = i0; i <= i1; ++i)
            for (long j = j0; j <= j1; ++j) {
                Vec2 x(double(i) * h, double(j) * h);
                if (poly.violation(x) < -eps) interior[f].push_back(x);
            }
    });
    for (int f = 0; f < F; ++f)
        for (auto& x : interior[f]) g->add_interior(f, x);
    for (int f = 0; f < F; ++f) {
        if (!region.uses(f)) continue;
        const Polygon& poly = c.face(f).poly;
        for (int e = 0; e < poly.edge_count(); ++e) {
            bool owner = true;
            for (auto [gi, is_a] : c.edge_gluings(f, e))
                if (!is_a) owner = false;
            if (!owner) continue;
            const Edge& ed = poly.edges()[e];
            double t0 = 0, t1 = ed.tmax;
            for (int k = 0; k < 2; ++k) {
                double o = ed.origin[k], d = ed.dir[k];
                if (d == 0) {
                    if (o < region.lo[k] || o > region.hi[k]) t1 = -1;
                    continue;
                }
                double a = (region.lo[k] - o) / d, b = (region.hi[k] - o) / d;
                if (a > b) std::swap(a, b);
                t0 = std::max(t0, a);
                t1 = std::min(t1, b);
            }
            if (!(t1 >= t0)) continue;
            double len = ed.dir.norm();
            std::vector<double> ts{t0};
            for (long k = long(std::ceil(t0 * len / h)); double(k) * h <= t1 * len; ++k) ts.push_back(double(k) * h / len);
            ts.push_back(t1);
            for (double t : ts) g->add(Point{f, ed.at(std::clamp(t, t0, t1))});
        }
    }
    return g;
}

struct OracleResult {
    double distance_upper = kInf;
    double snap_error = 0;
    std::vector<Point> path;
    std::vector<int> path_faces;  // face of each hop
    int settled = 0;

    json to_json() const {
        return json{{"distance_upper", distance_upper}, {"snap_error", snap_error}, {"path_vertices", int(path.size())}};
    }
};

// Shortest path in the graph with p and q overlaid as extra nodes (no snapping).
inline OracleResult oracle_distance(const DiscretizationGraph& g, const Point& p, const Point& q) {
    const Complex& c = g.complex();
    if (!c.contains(p) || !c.contains(q)) throw InputError("oracle endpoint outside its face");
    int N = g.node_count();
    int P = N, Q = N + 1;
    auto overlay = [&](const Point& x) {
        std::vector<std::tuple<int, double, int>> adj;
        for (auto& r : c.incident(x)) g.neighbors(r.face, r.x, [&](int v, double w, int f) { adj.emplace_back(v, w, f); });
        return adj;
    };
    auto adj_p = overlay(p), adj_q = overlay(q);
    std::unordered_map<int, std::pair<double, int>> to_q;
    for (auto [v, w, f] : adj_q) {
        auto it = to_q.find(v);
        if (it == to_q.end() || w < it->second.first) to_q[v] = {w, f};
    }
    std::vector<double> d(N + 2, kInf);
    std::vector<int> parent(N + 2, -1), pface(N + 2, -1);
    std::vector<char> done(N + 2, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[P] = 0;
    pq.push({0, P});
    // Direct segment when p and q share a face within the hop radius.
    for (auto& rp : c.incident(p))
        for (auto& rq : c.incident(q))
            if (rp.face == rq.face && (rq.x - rp.x).norm() <= g.hop_radius()) {
                double w = c.face(rp.face).norm(Vec(Vec2(rq.x - rp.x)));
                if (w < d[Q]) d[Q] = w, parent[Q] = P, pface[Q] = rp.face;
            }
    if (d[Q] < kInf) pq.push({d[Q], Q});
    OracleResult res;
    auto relax = [&](int u, int v, double w, int f) {
        if (done[v] || d[u] + w >= d[v]) return;
        d[v] = d[u] + w;
        parent[v] = u;
        pface[v] = f;
        pq.push({d[v], v});
    };
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (done[u] || du > d[u]) continue;
        done[u] = 1;
        ++res.settled;
        if (u == Q) break;
        if (u == P) {
            for (auto [v, w, f] : adj_p) relax(P, v, w, f);
            continue;
        }
        for (auto& r : g.nodes()[u].reps) g.neighbors(r.face, r.x, [&](int v, double w, int f) { relax(u, v, w, f); });
        auto it = to_q.find(u);
        if (it != to_q.end()) relax(u, Q, it->second.first, it->second.second);
    }
    if (!done[Q]) throw UnreachableError("oracle graph does not connect the endpoints");
    res.distance_upper = d[Q];
    res.snap_error = std::max(g.snap_distance(p), g.snap_distance(q));
    std::vector<int> chain;
    for (int v = Q; v != -1; v = parent[v]) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        int v = chain[k];
        Point x = v == P ? p : v == Q ? q : g.nodes()[v].reps[0];
        res.path.push_back(x);
        if (k > 0) res.path_faces.push_back(pface[v]);
    }
    return res;
}

inline VertexPath oracle_path(const Complex& c, const OracleResult& r) {
    return make_vertex_path(c, r.path, r.path_faces, true);
}

// ---- geodesic enumeration ----------------------------------------------------------------

struct EnumConfig {
    int max_faces = 32;
    int max_nodes = 20000;
    double window = 0.05;     // relative length window above the minimum
    double local_tol = 1e-7;  // relative shortfall allowed by the local vertex test
    int multistart_seeds = 8;
};

struct EnumResult {
    std::vector<VertexPath> paths;  // sorted by length
    bool truncated = false;

    std::vector<double> lengths() const {
        std::vector<double> l;
        for (auto& p : paths) l.push_back(p.length());
        return l;
    }
};

// Every locally minimal broken line from p to q within the window of the
// shortest one, over face sequences of bounded length.
inline EnumResult enumerate_geodesics(const Complex& c, const Point& p, const Point& q, const EnumConfig& cfg = {}) {
    SearchConfig sc;
    sc.max_faces = cfg.max_faces;
    sc.max_nodes = cfg.max_nodes;
    sc.cluster_rel = cfg.window;
    sc.multistart = true;
    sc.multistart_seeds = cfg.multistart_seeds;
    auto r = search_paths(c, p, q, sc);
    EnumResult out;
    out.truncated = r.truncated;
    for (auto& cand : r.candidates) {
        if (local_geodesic_defect(c, cand.path) <= cfg.local_tol) out.paths.push_back(cand.path);
    }
    return out;
}

// ---- uniqueness scans ------------------------------------------------------------------------

struct ScanPair {
    Point a, b;
    std::vector<double> lengths;
};

struct ScanReport {
    int pairs = 0;
    int ambiguous = 0;
    int truncated = 0;
    std::vector<ScanPair> witnesses;  // ambiguous pairs, in sampling order

    json to_json() const {
        json w = json::array();
        for (auto& s : witnesses)
            w.push_back({{"a", {{"face", s.a.face}, {"x", s.a.x.x()}, {"y", s.a.x.y()}}},
                         {"b", {{"face", s.b.face}, {"x", s.b.x.x()}, {"y", s.b.x.y()}}},
                         {"lengths", s.lengths}});
        return json{{"pairs", pairs}, {"ambiguous", ambiguous}, {"truncated", truncated}, {"witnesses", w}};
    }
};

// Uniform point in the region of a random face (rejection in the clipped box).
inline Point sample_region(const Complex& c, const Region& region, Rng& rng) {
    std::vector<int> fs;
    for (int f = 0; f < c.face_count(); ++f)
        if (region.uses(f) && c.face(f).poly.clip_box(region.lo, region.hi).size() >= 3) fs.push_back(f);
    if (fs.empty()) throw InputError("region does not meet any face");
    for (;;) {
        int f = fs[rng.integer(0, int(fs.size()) - 1)];
        auto poly = c.face(f).poly.clip_box(region.lo, region.hi);
        Vec2 lo = poly[0], hi = poly[0];
        for (auto& v : poly) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
        for (int t = 0; t < 64; ++t) {
            Vec2 x(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
            if (c.face(f).poly.contains(x, 0)) return Point{f, x};
        }
    }
}

inline ScanReport uniqueness_scan(const Complex& c, const Region& region, double radius, int n_pairs,
                                  std::uint64_t seed, const EnumConfig& cfg = {}) {
    if (!region.bounded()) throw InputError("scan region must be bounded");
    Rng rng(seed);
    std::vector<std::pair<Point, Point>> pairs;
    for (int k = 0; k < n_pairs; ++k) {
        Point a = sample_region(c, region, rng);
        Point b = c.canonical(sample_ball(c, a, radius, rng));
        pairs.push_back({c.canonical(a), b});
    }
    std::vector<EnumResult> res(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        try {
            res[k] = enumerate_geodesics(c, pairs[k].first, pairs[k].second, cfg);
        } catch (const OutOfRangeError&) {
            res[k].truncated = true;
        }
    });
    ScanReport rep;
    rep.pairs = n_pairs;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (res[k].truncated) ++rep.truncated;
        if (res[k].paths.size() > 1) {
            ++rep.ambiguous;
            rep.witnesses.push_back({pairs[k].first, pairs[k].second, res[k].lengths()});
        }
    }
    return rep;
}

}  // namespace fpl
