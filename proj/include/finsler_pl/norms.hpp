#pragma once
// Norm families on small charts. A Norm is an immutable shared handle, so
// copies are cheap and concurrent evaluation is safe.

#include "core.hpp"

#include <json.hpp>

#include <memory>
#include <sstream>

namespace fpl {

using json = nlohmann::json;

enum class Side { plus, minus };

class NormImpl {
public:
    virtual ~NormImpl() = default;
    virtual int dim() const = 0;
    virtual double eval(const Vec& v) const = 0;
    // Some element of the subdifferential at v; zero at v = 0. Never throws.
    virtual Vec subgradient(const Vec& v) const = 0;
    // True when the norm is differentiable at v != 0.
    virtual bool smooth_at(const Vec& v) const = 0;
    // One-sided derivative lim_{e->0+} (N(v + e w) - N(v)) / e.
    virtual double right_deriv(const Vec& v, const Vec& w) const { return subgradient(v).dot(w); }
    virtual bool smooth() const = 0;
    virtual std::string type() const = 0;
    virtual json to_json() const = 0;
};

class Norm {
public:
    Norm() = default;
    explicit Norm(std::shared_ptr<const NormImpl> impl) : impl_(std::move(impl)) {}

    int dim() const { return impl_->dim(); }
    bool smooth() const { return impl_->smooth(); }
    std::string type() const { return impl_->type(); }
    const NormImpl& impl() const { return *impl_; }
    explicit operator bool() const { return bool(impl_); }

    double eval(const Vec& v) const {
        check_dim(v);
        return impl_->eval(v);
    }
    double operator()(const Vec& v) const { return impl_->eval(v); }

    Vec subgradient(const Vec& v) const { return impl_->subgradient(v); }
    bool smooth_at(const Vec& v) const { return impl_->smooth_at(v); }

    Vec grad(const Vec& v) const {
        check_dim(v);
        if (v.norm() == 0.0) throw UndefinedDerivativeError("grad: norm is not differentiable at the origin");
        if (!impl_->smooth_at(v)) throw NonSmoothPointError("grad: " + type() + " norm has a corner at this direction");
        return impl_->subgradient(v);
    }

    double dir_deriv(const Vec& v, const Vec& w, Side side) const {
        check_dim(v);
        check_dim(w);
        if (v.norm() == 0.0) throw UndefinedDerivativeError("dir_deriv: undefined at the origin");
        if (side == Side::plus) return impl_->right_deriv(v, w);
        return -impl_->right_deriv(v, -w);
    }

    json to_json() const { return impl_->to_json(); }

private:
    void check_dim(const Vec& v) const {
        if (v.size() != impl_->dim())
            throw InputError("norm of dimension " + std::to_string(impl_->dim()) + " applied to vector of dimension " +
                             std::to_string(v.size()));
        if (!v.allFinite()) throw InputError("norm applied to a non-finite vector");
    }
    std::shared_ptr<const NormImpl> impl_;
};

namespace detail {

inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

inline Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError("matrix must be a non-empty array of rows");
    int r = int(j.size()), c = int(j[0].size());
    if (r > kMaxDim || c > kMaxDim || c == 0) throw InputError("matrix dimensions exceed the supported maximum of 4");
    Mat m(r, c);
    for (int i = 0; i < r; ++i) {
        if (!j[i].is_array() || int(j[i].size()) != c) throw InputError("ragged matrix");
        for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const json& j) {
    if (!j.is_array() || j.empty() || j.size() > kMaxDim) throw InputError("vector must be an array of 1..4 numbers");
    Vec v(int(j.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace detail

// ---- variants ----------------------------------------------------------------

class EuclideanScaledNorm final : public NormImpl {
public:
    EuclideanScaledNorm(int dim, double scale) : dim_(dim), scale_(scale) {
        if (dim < 1 || dim > kMaxDim) throw InputError("euclidean-scaled: dimension out of range");
        if (!(scale > 0) || !std::isfinite(scale)) throw InputError("euclidean-scaled: scale must be positive");
    }
    int dim() const override { return dim_; }
    double eval(const Vec& v) const override { return scale_ * v.norm(); }
    Vec subgradient(const Vec& v) const override {
        double n = v.norm();
        if (n == 0) return Vec::Zero(dim_);
        return (scale_ / n) * v;
    }
    bool smooth_at(const Vec&) const override { return true; }
    bool smooth() const override { return true; }
    std::string type() const override { return "euclidean-scaled"; }
    json to_json() const override { return {{"type", type()}, {"dim", dim_}, {"scale", scale_}}; }

private:
    int dim_;
    double scale_;
};

class EllipsoidalNorm final : public NormImpl {
public:
    explicit EllipsoidalNorm(const Mat& q) : q_(q) {
        if (q.rows() != q.cols() || q.rows() < 1) throw InputError("ellipsoidal: Q must be square");
        if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + q.cwiseAbs().maxCoeff()))
            throw InputError("ellipsoidal: Q must be symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> es(q);
        min_eig_ = es.eigenvalues().minCoeff();
        max_eig_ = es.eigenvalues().maxCoeff();
        if (!(min_eig_ > 0)) throw InputError("ellipsoidal: Q must be positive definite");
    }
    const Mat& q() const { return q_; }
    double condition() const { return max_eig_ / min_eig_; }
    int dim() const override { return int(q_.rows()); }
    double eval(const Vec& v) const override { return std::sqrt(std::max(0.0, v.dot(q_ * v))); }
    Vec subgradient(const Vec& v) const override {
        double n = eval(v);
        if (n == 0) return Vec::Zero(dim());
        return (q_ * v) / n;
    }
    bool smooth_at(const Vec&) const override { return true; }
    bool smooth() const override { return true; }
    std::string type() const override { return "ellipsoidal"; }
    json to_json() const override { return {{"type", type()}, {"Q", detail::mat_to_json(q_)}}; }

private:
    Mat q_;
    double min_eig_ = 0, max_eig_ = 0;
};

class LpNorm final : public NormImpl {
public:
    LpNorm(int dim, double p) : dim_(dim), p_(p) {
        if (dim < 1 || dim > kMaxDim) throw InputError("lp: dimension out of range");
        if (!(p > 1) || !std::isfinite(p)) throw InputError("lp: exponent must lie in (1, inf)");
    }
    double p() const { return p_; }
    int dim() const override { return dim_; }
    double eval(const Vec& v) const override {
        double m = v.cwiseAbs().maxCoeff();
        if (m == 0) return 0;
        double s = 0;
        for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(v[i]) / m, p_);
        return m * std::pow(s, 1.0 / p_);
    }
    Vec subgradient(const Vec& v) const override {
        double n = eval(v);
        Vec g = Vec::Zero(dim_);
        if (n == 0) return g;
        for (int i = 0; i < dim_; ++i) {
            double a = std::abs(v[i]) / n;
            g[i] = (v[i] < 0 ? -1.0 : 1.0) * (a == 0 ? 0.0 : std::pow(a, p_ - 1));
        }
        return g;
    }
    bool smooth_at(const Vec&) const override { return true; }
    bool smooth() const override { return true; }
    std::string type() const override { return "lp"; }
    json to_json() const override { return {{"type", type()}, {"dim", dim_}, {"p", p_}}; }

private:
    int dim_;
    double p_;
};

// Pointwise maximum of ellipsoidal norms. Strictly convex, with corners
// where the active component switches.
class MaxOfEllipsoidalNorm final : public NormImpl {
public:
    explicit MaxOfEllipsoidalNorm(std::vector<EllipsoidalNorm> parts) : parts_(std::move(parts)) {
        if (parts_.size() < 2) throw InputError("max-of-ellipsoidal: needs at least two components");
        for (auto& p : parts_)
            if (p.dim() != parts_[0].dim()) throw InputError("max-of-ellipsoidal: dimension mismatch");
    }
    const std::vector<EllipsoidalNorm>& parts() const { return parts_; }
    int dim() const override { return parts_[0].dim(); }
    double eval(const Vec& v) const override {
        double m = 0;
        for (auto& p : parts_) m = std::max(m, p.eval(v));
        return m;
    }
    Vec subgradient(const Vec& v) const override {
        int best = 0;
        double m = -1;
        for (int i = 0; i < int(parts_.size()); ++i) {
            double e = parts_[i].eval(v);
            if (e > m) m = e, best = i;
        }
        return parts_[best].subgradient(v);
    }
    bool smooth_at(const Vec& v) const override {
        auto act = active(v);
        Vec g0 = parts_[act[0]].subgradient(v);
        for (std::size_t i = 1; i < act.size(); ++i)
            if ((parts_[act[i]].subgradient(v) - g0).norm() > 1e-12) return false;
        return true;
    }
    double right_deriv(const Vec& v, const Vec& w) const override {
        double d = -kInf;
        for (int i : active(v)) d = std::max(d, parts_[i].subgradient(v).dot(w));
        return d;
    }
    bool smooth() const override { return false; }
    std::string type() const override { return "max-of-ellipsoidal"; }
    json to_json() const override {
        json c = json::array();
        for (auto& p : parts_) c.push_back(p.to_json());
        return {{"type", type()}, {"components", c}};
    }

private:
    std::vector<int> active(const Vec& v) const {
        double m = eval(v);
        std::vector<int> a;
        for (int i = 0; i < int(parts_.size()); ++i)
            if (parts_[i].eval(v) >= m * (1 - 1e-13)) a.push_back(i);
        return a;
    }
    std::vector<EllipsoidalNorm> parts_;
};

// Blends a base norm toward target * |v| inside a double cone of half-angle
// theta around +-u. Weight is the quintic smoothstep of 1 - angle/theta.
class ConePatchedNorm final : public NormImpl {
public:
    ConePatchedNorm(Norm base, Vec u, double theta, double target) : base_(std::move(base)), theta_(theta), target_(target) {
        if (!base_.smooth()) throw InputError("cone-patched: base norm must be smooth");
        if (u.size() != base_.dim()) throw InputError("cone-patched: direction dimension mismatch");
        if (!(theta > 0 && theta < M_PI / 2)) throw InputError("cone-patched: half-angle must lie in (0, pi/2)");
        if (!(target > 0)) throw InputError("cone-patched: target must be positive");
        if (u.norm() == 0) throw InputError("cone-patched: direction must be nonzero");
        u_raw_ = u;
        u_ = u / u.norm();
    }
    int dim() const override { return base_.dim(); }

    double weight(const Vec& v) const {
        double x = 1.0 - angle(v) / theta_;
        if (x <= 0) return 0;
        return x * x * x * (10 + x * (-15 + 6 * x));
    }

    double eval(const Vec& v) const override {
        double b = weight(v);
        double nb = base_(v);
        if (b == 0) return nb;
        return (1 - b) * nb + b * target_ * v.norm();
    }
    Vec subgradient(const Vec& v) const override {
        double r = v.norm();
        if (r == 0) return Vec::Zero(dim());
        double a = angle(v);
        double x = 1.0 - a / theta_;
        Vec gb = base_.subgradient(v);
        if (x <= 0) return gb;
        double b = x * x * x * (10 + x * (-15 + 6 * x));
        double db_dx = 30 * x * x * (1 - x) * (1 - x);
        Vec g = (1 - b) * gb + (b * target_ / r) * v;
        double s = std::sin(a);
        if (s > 1e-12 && db_dx != 0) {
            double c = v.dot(u_);
            double sg = c < 0 ? -1.0 : 1.0;
            // d(angle)/dv = -(sg / sin a) * (u / r - c v / r^3)
            Vec dang = -(sg / s) * (u_ / r - (c / (r * r * r)) * v);
            Vec db = (-db_dx / theta_) * dang;
            g += (target_ * r - base_(v)) * db;
        }
        return g;
    }
    bool smooth_at(const Vec&) const override { return true; }
    bool smooth() const override { return true; }
    std::string type() const override { return "cone-patched"; }
    json to_json() const override {
        return {{"type", type()},          {"base", base_.to_json()}, {"direction", detail::vec_to_json(u_raw_)},
                {"half_angle", theta_},    {"target", target_},       {"profile", "smoothstep5"}};
    }

private:
    double angle(const Vec& v) const {
        double r = v.norm();
        if (r == 0) return M_PI / 2;
        double c = std::min(1.0, std::abs(v.dot(u_)) / r);
        return std::acos(c);
    }
    Norm base_;
    Vec u_, u_raw_;
    double theta_, target_;
};

// w -> base(A w) for an injective linear map A.
class PullbackNorm final : public NormImpl {
public:
    PullbackNorm(Norm base, Mat a) : base_(std::move(base)), a_(std::move(a)) {
        if (a_.rows() != base_.dim()) throw InputError("pullback: matrix rows must match the base dimension");
        Eigen::FullPivLU<Mat> lu(a_);
        if (lu.rank() < a_.cols()) throw InputError("pullback: matrix must have full column rank");
    }
    const Mat& matrix() const { return a_; }
    const Norm& base() const { return base_; }
    int dim() const override { return int(a_.cols()); }
    double eval(const Vec& v) const override { return base_(a_ * v); }
    Vec subgradient(const Vec& v) const override { return a_.transpose() * base_.subgradient(a_ * v); }
    bool smooth_at(const Vec& v) const override { return base_.smooth_at(a_ * v); }
    double right_deriv(const Vec& v, const Vec& w) const override { return base_.impl().right_deriv(a_ * v, a_ * w); }
    bool smooth() const override { return base_.smooth(); }
    std::string type() const override { return "pullback"; }
    json to_json() const override {
        return {{"type", type()}, {"base", base_.to_json()}, {"matrix", detail::mat_to_json(a_)}};
    }

private:
    Norm base_;
    Mat a_;
};

// max_i |a_i . v|. Not strictly convex; exists so the verifier has a negative case.
class PolyhedralNorm final : public NormImpl {
public:
    explicit PolyhedralNorm(std::vector<Vec> f) : f_(std::move(f)) {
        if (f_.empty()) throw InputError("polyhedral: needs functionals");
    }
    int dim() const override { return int(f_[0].size()); }
    double eval(const Vec& v) const override {
        double m = 0;
        for (auto& a : f_) m = std::max(m, std::abs(a.dot(v)));
        return m;
    }
    Vec subgradient(const Vec& v) const override {
        double m = -1;
        Vec g = Vec::Zero(dim());
        for (auto& a : f_) {
            double d = a.dot(v);
            if (std::abs(d) > m) m = std::abs(d), g = d < 0 ? Vec(-a) : a;
        }
        return m == 0 ? Vec(Vec::Zero(dim())) : g;
    }
    bool smooth_at(const Vec& v) const override {
        double m = eval(v);
        int n = 0;
        for (auto& a : f_)
            if (std::abs(a.dot(v)) >= m * (1 - 1e-13)) ++n;
        return n == 1;
    }
    double right_deriv(const Vec& v, const Vec& w) const override {
        double m = eval(v), d = -kInf;
        for (auto& a : f_) {
            double s = a.dot(v);
            if (std::abs(s) >= m * (1 - 1e-13)) d = std::max(d, (s < 0 ? -1.0 : 1.0) * a.dot(w));
        }
        return d;
    }
    bool smooth() const override { return false; }
    std::string type() const override { return "polyhedral"; }
    json to_json() const override {
        json a = json::array();
        for (auto& v : f_) a.push_back(detail::vec_to_json(v));
        return {{"type", type()}, {"functionals", a}};
    }

private:
    std::vector<Vec> f_;
};

// ---- factories ----------------------------------------------------------------

inline Norm euclidean(int dim = 2, double scale = 1.0) {
    return Norm(std::make_shared<EuclideanScaledNorm>(dim, scale));
}
inline Norm ellipsoidal(const Mat& q) { return Norm(std::make_shared<EllipsoidalNorm>(q)); }
inline Norm lp(int dim, double p) { return Norm(std::make_shared<LpNorm>(dim, p)); }
inline Norm max_of_ellipsoidal(const std::vector<Mat>& qs) {
    std::vector<EllipsoidalNorm> parts;
    for (auto& q : qs) parts.emplace_back(q);
    return Norm(std::make_shared<MaxOfEllipsoidalNorm>(std::move(parts)));
}
inline Norm cone_patched(const Norm& base, const Vec& u, double theta, double target) {
    return Norm(std::make_shared<ConePatchedNorm>(base, u, theta, target));
}
inline Norm pullback(const Norm& base, const Mat& a) { return Norm(std::make_shared<PullbackNorm>(base, a)); }
inline Norm polyhedral(const std::vector<Vec>& f) { return Norm(std::make_shared<PolyhedralNorm>(f)); }

inline Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

// ---- free-function interface ---------------------------------------------------

inline double eval(const Norm& n, const Vec& v) { return n.eval(v); }
inline Vec grad(const Norm& n, const Vec& v) { return n.grad(v); }
inline double dir_deriv(const Norm& n, const Vec& v, const Vec& w, Side s) { return n.dir_deriv(v, w, s); }

// Basis of the kernel of grad(v). Not symmetric in general: w in v-perp does
// not imply v in w-perp.
inline std::vector<Vec> orth_complement_basis(const Norm& n, const Vec& v) {
    Vec g = n.grad(v);
    int d = n.dim();
    std::vector<Vec> basis;
    if (d == 1) return basis;
    // Householder-style completion: project coordinate axes onto ker g, keep independent ones.
    Mat m(d, d - 1);
    int k = 0;
    double gg = g.squaredNorm();
    for (int i = 0; i < d && k < d - 1; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1;
        Vec w = e - (g.dot(e) / gg) * g;
        for (int j = 0; j < k; ++j) w -= m.col(j).dot(w) * Vec(m.col(j));
        double wn = w.norm();
        if (wn > 1e-6) {
            m.col(k++) = w / wn;
        }
    }
    for (int j = 0; j < k; ++j) basis.push_back(m.col(j));
    return basis;
}

// ---- verification ---------------------------------------------------------------

struct NormReport {
    bool strictly_convex = true;
    bool smooth = true;
    double worst_midpoint_margin = kInf;  // min over unit pairs of 1 - N((u+w)/2)
    double worst_turn = kInf;             // min normalized turn of sampled unit-sphere sections
    double worst_gradient_error = 0;      // relative FD mismatch where smoothness is claimed
    double worst_euler_error = 0;
    int samples = 0;
    json to_json() const {
        return {{"strictly_convex", strictly_convex},
                {"smooth", smooth},
                {"worst_midpoint_margin", worst_midpoint_margin},
                {"worst_turn", worst_turn},
                {"worst_gradient_error", worst_gradient_error},
                {"worst_euler_error", worst_euler_error},
                {"samples", samples}};
    }
};

namespace detail {

// Minimum normalized turn along the unit-sphere section in the plane span(e1, e2).
// Strict convexity of the section requires every turn to be positive.
inline double section_turn(const Norm& n, const Vec& e1, const Vec& e2, int m) {
    std::vector<Vec2> pts(m);
    for (int j = 0; j < m; ++j) {
        double phi = 2 * M_PI * j / m;
        Vec v = std::cos(phi) * e1 + std::sin(phi) * e2;
        double r = 1.0 / n(v);
        pts[j] = Vec2(std::cos(phi) * r, std::sin(phi) * r);
    }
    double worst = kInf;
    for (int j = 0; j < m; ++j) {
        Vec2 a = pts[(j + 1) % m] - pts[j], b = pts[(j + 2) % m] - pts[(j + 1) % m];
        worst = std::min(worst, cross2(a, b) / (a.norm() * b.norm()));
    }
    return worst;
}

}  // namespace detail

inline NormReport verify_norm(const Norm& n, int sample_count, double tol = 1e-12, std::uint64_t seed = 1) {
    if (sample_count < 2) throw InputError("verify_norm: sample_count must be at least 2");
    NormReport r;
    r.samples = sample_count;
    Rng rng(seed);
    int d = n.dim();
    for (int s = 0; s < sample_count; ++s) {
        Vec u = rng.unit(d), w = rng.unit(d);
        u /= n(u);
        w /= n(w);
        if ((u - w).norm() < 1e-9) continue;
        double margin = 1.0 - n((u + w) / 2);
        r.worst_midpoint_margin = std::min(r.worst_midpoint_margin, margin);
        if (margin <= tol) r.strictly_convex = false;
    }
    // Dense planar sections catch localized flat or concave spots that random pairs miss.
    int sections = d == 2 ? 1 : 8;
    for (int s = 0; s < sections; ++s) {
        Vec e1(d), e2(d);
        if (d == 2) {
            e1 = vec2(1, 0);
            e2 = vec2(0, 1);
        } else {
            e1 = rng.unit(d);
            e2 = rng.unit(d);
            e2 -= e2.dot(e1) * e1;
            e2.normalize();
        }
        double t = detail::section_turn(n, e1, e2, 4096);
        r.worst_turn = std::min(r.worst_turn, t);
        if (!(t > 1e-13)) r.strictly_convex = false;
    }
    if (!n.smooth()) {
        r.smooth = false;
        r.worst_gradient_error = kInf;
        return r;
    }
    for (int s = 0; s < sample_count; ++s) {
        Vec v = rng.unit(d);
        Vec g = n.subgradient(v);
        double nv = n(v);
        double h = 1e-6 * nv;
        Vec fd(d);
        for (int i = 0; i < d; ++i) {
            Vec e = Vec::Zero(d);
            e[i] = h;
            fd[i] = (n(v + e) - n(v - e)) / (2 * h);
        }
        double err = (fd - g).norm() / std::max(1.0, g.norm());
        r.worst_gradient_error = std::max(r.worst_gradient_error, err);
        r.worst_euler_error = std::max(r.worst_euler_error, std::abs(g.dot(v) - nv) / nv);
        if (err > 1e-5) r.smooth = false;
    }
    return r;
}

// ---- JSON ---------------------------------------------------------------------------

inline Norm norm_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) throw InputError("norm description must be an object with a type");
    std::string t = j.at("type").get<std::string>();
    try {
        if (t == "euclidean-scaled" || t == "euclidean")
            return euclidean(j.value("dim", 2), j.value("scale", 1.0));
        if (t == "ellipsoidal") return ellipsoidal(detail::mat_from_json(j.at("Q")));
        if (t == "lp") return lp(j.value("dim", 2), j.at("p").get<double>());
        if (t == "max-of-ellipsoidal") {
            std::vector<Mat> qs;
            for (auto& c : j.at("components")) {
                if (c.value("type", "ellipsoidal") != "ellipsoidal")
                    throw InputError("max-of-ellipsoidal: components must be ellipsoidal");
                qs.push_back(detail::mat_from_json(c.at("Q")));
            }
            return max_of_ellipsoidal(qs);
        }
        if (t == "cone-patched") {
            if (j.value("profile", "smoothstep5") != "smoothstep5") throw InputError("cone-patched: unknown profile");
            return cone_patched(norm_from_json(j.at("base")), detail::vec_from_json(j.at("direction")),
                                j.at("half_angle").get<double>(), j.at("target").get<double>());
        }
        if (t == "pullback") return pullback(norm_from_json(j.at("base")), detail::mat_from_json(j.at("matrix")));
        if (t == "polyhedral") {
            std::vector<Vec> f;
            for (auto& a : j.at("functionals")) f.push_back(detail::vec_from_json(a));
            return polyhedral(f);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("norm description: ") + e.what());
    }
    throw InputError("unknown norm type '" + t + "'");
}

}  // namespace fpl
