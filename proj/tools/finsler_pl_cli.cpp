// finsler-pl: command-line front end for the library.
// Exit codes: 0 success, 1 domain verdict failure, 2 input or validation error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <finsler_pl/gallery.hpp>
#include <finsler_pl/saddle.hpp>

using namespace fpl;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "finsler-pl/1";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Complex load_complex(const std::string& path) {
    Complex c = Complex::from_json(read_json(path));
    c.require_valid();
    return c;
}

// "face_id:x,y"
Point parse_point(const Complex& c, const std::string& s) {
    auto colon = s.find(':'), comma = s.find(',');
    if (colon == std::string::npos || comma == std::string::npos || comma < colon)
        throw InputError("point '" + s + "' must look like face_id:x,y");
    try {
        std::size_t used = 0;
        int id = std::stoi(s.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("id");
        std::string xs = s.substr(colon + 1, comma - colon - 1), ys = s.substr(comma + 1);
        double x = std::stod(xs, &used);
        if (used != xs.size()) throw std::invalid_argument("x");
        double y = std::stod(ys, &used);
        if (used != ys.size()) throw std::invalid_argument("y");
        Point p = c.point(id, x, y);
        if (!c.contains(p)) throw InputError("point '" + s + "' lies outside face " + std::to_string(id));
        return p;
    } catch (const std::logic_error&) {
        throw InputError("point '" + s + "' must look like face_id:x,y");
    }
}

json point_json(const Complex& c, const Point& p) { return {{"face", c.face(p.face).id}, {"x", p.x.x()}, {"y", p.x.y()}}; }

Region parse_region(const std::vector<double>& r) {
    if (r.size() != 4) throw InputError("region needs x0 y0 x1 y1");
    Region reg;
    reg.lo = Vec2(r[0], r[1]);
    reg.hi = Vec2(r[2], r[3]);
    if (!(reg.lo.x() < reg.hi.x() && reg.lo.y() < reg.hi.y())) throw InputError("region box is empty");
    return reg;
}

std::vector<Point> load_points(const Complex& c, const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return points_from_csv(c, read_file(path));
    return points_from_json(c, read_json(path));
}

std::string csv_rows(const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream o;
    o.precision(17);
    o << header << '\n';
    for (auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
        o << '\n';
    }
    return o.str();
}

// Settings shared by every command; values come from defaults, then the
// config file named by FINSLER_PL_CONFIG, then flags.
struct Settings {
    int threads = 1;
    std::uint64_t seed = 1;
    std::string out;
    double tol = 1e-9;
    int max_iter = 100000;
    double h = 0.02;
    double hop = 0;
    double oracle_rtol = 0.02;
    double radius = 0.5;
    int pairs = 100;
    int max_faces = 32;

    void load(const json& j) {
        auto take = [&](const char* k, auto& v) {
            if (j.contains(k)) v = j.at(k).get<std::decay_t<decltype(v)>>();
        };
        try {
            take("threads", threads), take("seed", seed), take("out", out), take("tol", tol);
            take("max_iter", max_iter), take("h", h), take("hop", hop), take("oracle_rtol", oracle_rtol);
            take("radius", radius), take("pairs", pairs), take("max_faces", max_faces);
        } catch (const json::exception& e) {
            throw InputError(std::string("config: ") + e.what());
        }
    }
};

struct Output {
    const Settings& s;
    std::string command;

    fs::path dir() const {
        fs::path d(s.out);
        fs::create_directories(d);
        return d;
    }
    void file(const std::string& name, const std::string& text) const {
        if (!s.out.empty()) write_file(dir() / name, text);
    }
    void report(json j) const {
        j["schema"] = kSchema;
        j["command"] = command;
        std::string text = dump(j);
        file(command + ".json", text);
        std::cout << text;
    }
};

// ---- commands ----------------------------------------------------------------------------

int cmd_validate(const Output& out, const std::string& path) {
    Complex c = Complex::from_json(read_json(path));
    auto rep = c.validate();
    out.report({{"report", rep.to_json()}});
    return rep.valid ? 0 : 2;
}

Region box_around(const Point& a, const Point& b, double d) {
    Region r;
    double m = std::max(0.5, 0.5 * d);
    r.lo = a.x.cwiseMin(b.x) - Vec2(m, m);
    r.hi = a.x.cwiseMax(b.x) + Vec2(m, m);
    return r;
}

int cmd_distance(const Output& out, const Settings& s, const std::string& path, const std::string& from,
                 const std::string& to, bool check, const std::vector<double>& region) {
    Complex c = load_complex(path);
    Point a = parse_point(c, from), b = parse_point(c, to);
    SearchConfig sc;
    sc.max_faces = s.max_faces;
    auto r = search_paths(c, a, b, sc);
    if (r.candidates.empty()) throw UnreachableError("no face sequence reaches the target within the search budget");
    json j{{"from", point_json(c, a)},
           {"to", point_json(c, b)},
           {"distance", r.distance},
           {"minimizers", int(r.candidates.size())},
           {"truncated", r.truncated},
           {"path", path_to_json(c, r.path)}};
    out.file("path.csv", path_csv(c, r.path));
    bool ok = true;
    if (check) {
        Region reg = region.empty() ? box_around(a, b, r.distance) : parse_region(region);
        auto g = build_graph(c, reg, s.h, s.hop);
        auto o = oracle_distance(*g, a, b);
        bool upper = o.distance_upper >= r.distance - 1e-9;
        bool close = o.distance_upper <= r.distance * (1 + s.oracle_rtol) + 1e-12;
        ok = upper && close;
        j["oracle"] = {{"h", s.h},
                       {"region", reg.to_json()},
                       {"distance_upper", o.distance_upper},
                       {"snap_error", o.snap_error},
                       {"relative_gap", (o.distance_upper - r.distance) / std::max(r.distance, 1e-300)},
                       {"rtol", s.oracle_rtol},
                       {"agree", ok}};
    }
    out.report(j);
    return ok ? 0 : 1;
}

int cmd_shorten(const Output& out, const Settings& s, const std::string& cpath, const std::string& ppath,
                std::optional<double> rho, int subdivide) {
    Complex c = load_complex(cpath);
    require_smooth(c);
    auto pts = load_points(c, ppath);
    SearchConfig sc;
    sc.max_faces = s.max_faces;
    if (subdivide > 0) {
        json v = json::array();
        for (auto& p : pts) v.push_back({{"face", c.face(p.face).id}, {"coords", {p.x.x(), p.x.y()}}});
        pts = resample(c, path_from_json(c, json{{"vertices", v}}), subdivide);
    }
    AdmissibleSequence seq;
    if (rho) {
        seq = make_admissible(c, pts, *rho, sc);
    } else {
        RadiusConfig rc;
        rc.seed = s.seed;
        rc.search = sc;
        seq = make_admissible(c, pts, rc);
    }
    try {
        auto res = shorten_to_geodesic(c, seq, s.tol, s.max_iter, sc);
        json j = res.to_json();
        j["converged"] = true;
        j["rho"] = seq.rho;
        j["delta"] = res.sequence.delta();
        j["energy"] = res.sequence.energy();
        j["path"] = path_to_json(c, res.path);
        out.file("limit.csv", path_csv(c, res.path));
        out.file("log.csv", csv_rows("iteration,L,delta,E,displacement", res.log));
        out.report(j);
        return 0;
    } catch (const NonConvergenceError& e) {
        out.file("log.csv", csv_rows("iteration,L,delta,E,displacement", e.tail));
        out.report({{"converged", false}, {"message", e.what()}, {"tail", e.tail}});
        return 1;
    }
}

int cmd_scan(const Output& out, const Settings& s, const std::string& cpath, const std::vector<double>& region) {
    Complex c = load_complex(cpath);
    Region reg = region.empty() ? parse_region({-1, -1, 1, 1}) : parse_region(region);
    EnumConfig ec;
    ec.max_faces = s.max_faces;
    auto rep = uniqueness_scan(c, reg, s.radius, s.pairs, s.seed, ec);
    json j = rep.to_json();
    for (auto& w : j["witnesses"])
        for (const char* k : {"a", "b"}) w[k]["face"] = c.face(w[k]["face"].get<int>()).id;
    j["radius"] = s.radius;
    j["seed"] = s.seed;
    j["region"] = reg.to_json();
    j["ambiguity_found"] = rep.ambiguous > 0;
    out.report(j);
    return 0;
}

int cmd_oracle(const Output& out, const Settings& s, const std::string& cpath, const std::string& from,
               const std::string& to, const std::vector<double>& region) {
    Complex c = load_complex(cpath);
    Point a = parse_point(c, from), b = parse_point(c, to);
    Region reg;
    if (!region.empty()) {
        reg = parse_region(region);
    } else {
        reg = box_around(a, b, c.approx_distance(a, b));
    }
    auto g = build_graph(c, reg, s.h, s.hop);
    auto o = oracle_distance(*g, a, b);
    json j = o.to_json();
    j["h"] = s.h;
    j["region"] = reg.to_json();
    j["nodes"] = g->node_count();
    j["edges"] = g->edge_count();
    VertexPath p = oracle_path(c, o);
    if (!s.out.empty()) j["path_csv"] = "oracle_path.csv";
    out.file("oracle_path.csv", path_csv(c, p));
    out.report(j);
    return 0;
}

int cmd_saddle(const Output& out, const std::string& surface, const std::string& mesh) {
    if (surface.empty() == mesh.empty()) throw InputError("saddle needs exactly one of --surface or --mesh");
    if (!surface.empty()) {
        auto s = SaddleConeSurface::from_json(read_json(surface));
        s.validate();
        auto v = is_saddle_cone(s);
        out.report({{"kind", "cone"}, {"verdict", v.to_json()}});
        return v.saddle ? 0 : 1;
    }
    auto rep = is_saddle_surface(Mesh::from_json(read_json(mesh)));
    out.report({{"kind", "mesh"}, {"saddle", rep.failures == 0}, {"report", rep.to_json()}});
    return rep.failures == 0 ? 0 : 1;
}

struct GalleryArgs {
    std::string name;
    double beta_up = 0.5, beta_down = -0.5;
    double factor = 1.01, patch_angle = 0.35;
    int periods = 10;
    std::vector<double> offsets{0.05};
    double bridge_height = 1.0;
    double sharpness = 0.5;
    double fan_x = 0, fan_height = 1.0;
    int members = 11;
};

int cmd_gallery(const Output& out, const Settings& s, const GalleryArgs& a) {
    GalleryInstance inst;
    json measurement;
    if (a.name == "half-planes") {
        inst = build_glued_half_planes(a.beta_up, a.beta_down);
        ConvexityProbe probe;
        probe.seed = s.seed;
        auto rep = measure_convexity_failure(inst, probe);
        measurement = rep.to_json();
        std::vector<std::vector<double>> rows;
        for (auto& r : rep.rows) rows.push_back({r.anchor, r.step, r.g_minus, r.g_center, r.g_plus, r.margin});
        out.file("profile.csv", csv_rows("anchor,step,g_minus,g_center,g_plus,margin", rows));
    } else if (a.name == "belt") {
        inst = build_belt(a.factor, a.patch_angle);
        AsymptoticsConfig cfg;
        cfg.periods = a.periods;
        cfg.offsets = a.offsets;
        auto rep = measure_asymptotics(inst, cfg);
        measurement = rep.to_json();
        std::vector<std::vector<double>> rows;
        for (auto& r : rep.runs)
            for (std::size_t j = 0; j < r.deviations.size(); ++j) rows.push_back({r.offset, double(j), r.deviations[j]});
        out.file("deviations.csv", csv_rows("offset,period,deviation", rows));
    } else if (a.name == "double-belt") {
        inst = build_double_belt(a.factor, a.patch_angle, a.periods, a.bridge_height);
        const Complex& c = *inst.complex;
        int m = inst.parameters.at("bridge_period").get<int>();
        auto face = [&](int belt) { return c.face_index((belt * a.periods + m) * 3); };
        Point p{face(0), Vec2(0.5, -0.5)}, q{face(1), Vec2(0.5, -0.5)};
        measurement = {{"bridge_crossing_distance", dist(c, p, q)}, {"from", point_json(c, p)}, {"to", point_json(c, q)}};
    } else if (a.name == "flag") {
        inst = build_russian_flag(a.sharpness);
        double s0 = inst.parameters.at("half_strip").get<double>();
        FanConfig fc;
        fc.members = a.members;
        auto rep = geodesic_fan(inst, Point{0, Vec2(a.fan_x, s0 + a.fan_height)},
                                Point{2, Vec2(a.fan_x, -s0 - a.fan_height)}, fc);
        measurement = rep.to_json();
        out.file("fan.csv", rep.csv());
    } else {
        throw InputError("unknown gallery item '" + a.name + "' (half-planes, belt, double-belt, flag)");
    }
    out.file("complex.json", dump(inst.complex->to_json()));
    out.file("measurement.json", dump(measurement));
    json j = inst.to_json();
    j.erase("complex");
    j["measurement"] = measurement;
    out.report(j);
    return 0;
}

int cmd_export(const Output& out, const std::string& cpath, const std::string& ppath, const std::string& format) {
    Complex c = Complex::from_json(read_json(cpath));
    c.require_valid();
    if (ppath.empty()) {
        json j = c.to_json();
        out.file("complex.json", dump(j));
        out.report({{"complex", j}});
        return 0;
    }
    auto pts = load_points(c, ppath);
    json v = json::array();
    for (auto& p : pts) v.push_back({{"face", c.face(p.face).id}, {"coords", {p.x.x(), p.x.y()}}});
    VertexPath p = path_from_json(c, json{{"vertices", v}});
    if (format == "csv") {
        std::string text = path_csv(c, p);
        out.file("path.csv", text);
        out.report({{"format", "csv"}, {"csv", text}});
    } else {
        json j = path_to_json(c, p);
        out.file("path.json", dump(j));
        out.report({{"format", "json"}, {"path", j}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    try {
        if (const char* env = std::getenv("FINSLER_PL_CONFIG"); env && *env) s.load(read_json(env));
    } catch (const Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"Polyhedral Finsler spaces: validation, geodesics, oracles, saddle tests and gallery constructions"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    app.add_option("--threads", s.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", s.seed, "seed for every sampled artifact");
    app.add_option("--out", s.out, "output directory");

    std::string complex_path, path_path, from, to, surface, mesh, format = "json";
    std::vector<double> region;
    bool check_oracle = false;
    std::optional<double> rho;
    int subdivide = 0;
    GalleryArgs ga;

    auto add_complex = [&](CLI::App* sub) { sub->add_option("--complex", complex_path, "complex JSON")->required(); };
    auto add_region = [&](CLI::App* sub) {
        sub->add_option("--region", region, "box x0 y0 x1 y1 applied in every chart")->expected(4);
    };

    auto* validate = app.add_subcommand("validate", "validate a complex");
    add_complex(validate);

    auto* distance = app.add_subcommand("distance", "local distance and shortest path");
    add_complex(distance);
    distance->add_option("--from", from, "face_id:x,y")->required();
    distance->add_option("--to", to, "face_id:x,y")->required();
    distance->add_flag("--check-oracle", check_oracle, "compare with the graph oracle");
    distance->add_option("--h", s.h, "oracle lattice spacing");
    distance->add_option("--hop", s.hop, "oracle hop radius (default 4h)");
    distance->add_option("--oracle-rtol", s.oracle_rtol, "allowed relative excess of the oracle bound");
    distance->add_option("--max-faces", s.max_faces, "face sequence budget");
    add_region(distance);

    auto* shorten = app.add_subcommand("shorten", "midpoint shortening to a geodesic");
    add_complex(shorten);
    shorten->add_option("--path", path_path, "initial broken line (JSON or CSV)")->required();
    shorten->add_option("--tol", s.tol, "vertex displacement tolerance");
    shorten->add_option("--max-iter", s.max_iter, "iteration cap");
    shorten->add_option("--rho", rho, "uniqueness radius to use instead of the sampled estimate");
    shorten->add_option("--subdivide", subdivide, "resample to this many vertices first");
    shorten->add_option("--max-faces", s.max_faces, "face sequence budget");

    auto* scan = app.add_subcommand("scan", "sample pairs and look for several geodesics");
    add_complex(scan);
    scan->add_option("--radius", s.radius, "pair radius");
    scan->add_option("--pairs", s.pairs, "number of pairs");
    scan->add_option("--max-faces", s.max_faces, "face sequence budget");
    add_region(scan);

    auto* oracle = app.add_subcommand("oracle", "graph upper bound on the distance");
    add_complex(oracle);
    oracle->add_option("--from", from, "face_id:x,y")->required();
    oracle->add_option("--to", to, "face_id:x,y")->required();
    oracle->add_option("--h", s.h, "lattice spacing");
    oracle->add_option("--hop", s.hop, "hop radius (default 4h)");
    add_region(oracle);

    auto* saddle = app.add_subcommand("saddle", "saddle test for a cone surface or a mesh");
    saddle->add_option("--surface", surface, "cone surface JSON");
    saddle->add_option("--mesh", mesh, "mesh JSON with vertices and triangles");

    auto* gallery = app.add_subcommand("gallery", "build and measure a named construction");
    gallery->add_option("name", ga.name, "half-planes | belt | double-belt | flag")->required();
    gallery->add_option("--beta-up", ga.beta_up);
    gallery->add_option("--beta-down", ga.beta_down);
    gallery->add_option("--factor", ga.factor);
    gallery->add_option("--patch-angle", ga.patch_angle);
    gallery->add_option("--periods", ga.periods);
    gallery->add_option("--offsets", ga.offsets);
    gallery->add_option("--bridge-height", ga.bridge_height);
    gallery->add_option("--sharpness", ga.sharpness);
    gallery->add_option("--fan-x", ga.fan_x);
    gallery->add_option("--fan-height", ga.fan_height);
    gallery->add_option("--members", ga.members);

    auto* exp = app.add_subcommand("export", "re-serialize a complex or convert a path");
    add_complex(exp);
    exp->add_option("--path", path_path, "path JSON or CSV to convert");
    exp->add_option("--format", format, "path output format")->check(CLI::IsMember({"json", "csv"}));

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    parallelism() = s.threads;
    CLI::App* cmd = app.get_subcommands().front();
    Output out{s, cmd->get_name()};
    try {
        if (cmd == validate) return cmd_validate(out, complex_path);
        if (cmd == distance) return cmd_distance(out, s, complex_path, from, to, check_oracle, region);
        if (cmd == shorten) return cmd_shorten(out, s, complex_path, path_path, rho, subdivide);
        if (cmd == scan) return cmd_scan(out, s, complex_path, region);
        if (cmd == oracle) return cmd_oracle(out, s, complex_path, from, to, region);
        if (cmd == saddle) return cmd_saddle(out, surface, mesh);
        if (cmd == gallery) return cmd_gallery(out, s, ga);
        if (cmd == exp) return cmd_export(out, complex_path, path_path, format);
    } catch (const Error& e) {
        bool verdict = dynamic_cast<const NonConvergenceError*>(&e) || dynamic_cast<const UnreachableError*>(&e) ||
                       dynamic_cast<const NonUniqueMidpointError*>(&e);
        json j{{"schema", kSchema}, {"command", out.command}, {"error", e.kind()}, {"message", e.what()}};
        std::cout << dump(j);
        std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
        return verdict ? 1 : 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
