#pragma once
// Shared vocabulary: small fixed-capacity vectors, error types, tolerances,
// deterministic RNG and an index-ordered parallel loop.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fpl {

// Charts never exceed dimension 4, so vectors live on the stack.
constexpr int kMaxDim = 4;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

// ---- errors -----------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define FPL_ERROR(Name, Kind)                                              \
    struct Name : Error {                                                  \
        using Error::Error;                                                \
        const char* kind() const noexcept override { return Kind; }        \
    };

FPL_ERROR(InputError, "input")
FPL_ERROR(NonSmoothPointError, "non-smooth-point")
FPL_ERROR(UndefinedDerivativeError, "undefined-derivative")
FPL_ERROR(ValidationError, "validation")
FPL_ERROR(IncidenceError, "incidence")
FPL_ERROR(OutOfRangeError, "out-of-range")
FPL_ERROR(NonUniqueMidpointError, "non-unique-midpoint")
FPL_ERROR(UnreachableError, "unreachable")
FPL_ERROR(ResourceError, "resource")
FPL_ERROR(ConstructionError, "construction")

#undef FPL_ERROR

struct NonConvergenceError : Error {
    std::vector<std::vector<double>> tail;  // rows of (iteration, L, delta, E, displacement)
    NonConvergenceError(const std::string& what, std::vector<std::vector<double>> t)
        : Error(what), tail(std::move(t)) {}
    const char* kind() const noexcept override { return "non-convergence"; }
};

// ---- tolerances ---------------------------------------------------------------

struct Tolerances {
    double structural = 1e-10;  // gluing isometry, cycle consistency
    double metric = 1e-9;       // length comparisons
    double slack = 1e-12;       // point-in-polygon slack
    double cluster = 1e-6;      // relative length window for "equally short" minimizers
    double dedupe = 1e-6;       // geometric distance under which two paths are the same
};

inline Tolerances& default_tolerances() {
    static Tolerances t;
    return t;
}

// ---- deterministic RNG --------------------------------------------------------

// std::uniform_real_distribution is implementation-defined; this is not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) {  // inclusive
        auto span = std::uint64_t(hi - lo + 1);
        return lo + int(eng_() % span);
    }
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    Vec unit(int dim) {
        Vec v(dim);
        for (;;) {
            for (int i = 0; i < dim; ++i) v[i] = normal();
            double n = v.norm();
            if (n > 1e-8) return v / n;
        }
    }
    std::uint64_t next() { return eng_(); }
    Rng split(std::uint64_t stream) { return Rng(eng_() ^ (0x9E3779B97F4A7C15ull * (stream + 1))); }

private:
    std::mt19937_64 eng_;
};

// ---- parallelism --------------------------------------------------------------

inline int& parallelism() {
    static int n = 1;
    return n;
}

// Runs fn(i) for i in [0, n). Callers write results by index, so output order
// never depends on scheduling. The first exception (lowest index) is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0) {
    if (threads <= 0) threads = parallelism();
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t t = std::min<std::size_t>(threads, n);
    std::vector<std::exception_ptr> errs(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) {
                try {
                    fn(i);
                } catch (...) {
                    errs[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace fpl
