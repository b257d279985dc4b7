#include "nullgeo/report.hpp"

#include "nullgeo/degcalc.hpp"
#include "nullgeo/foliation.hpp"
#include "nullgeo/kaehler.hpp"
#include "nullgeo/weyl.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <functional>
#include <atomic>
#include <map>
#include <mutex>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace nullgeo {

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
    }
    return "skipped";
}

bool VerificationReport::all_passed() const
{
    return std::none_of(entries.begin(), entries.end(), [](const IdentityEntry& e) { return e.verdict == Verdict::Fail; });
}

const IdentityEntry* VerificationReport::find(const std::string& id) const
{
    for (const auto& e : entries)
        if (e.id == id)
            return &e;
    return nullptr;
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {"hypersurface", "degcalc", "weyl", "foliation", "kaehler"};
    return names;
}

std::string spec_fingerprint(const nlohmann::json& spec)
{
    std::string text = spec.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return "sha256:" + os.str();
}

namespace {

// Running max/mean of one identity at one point.
struct Sample {
    double max = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    bool nan = false;
    std::map<std::string, double> details; // max |value| per key

    void detail(const std::string& key, double v)
    {
        double& slot = details[key];
        slot = std::max(slot, std::abs(v));
    }

    void add(double r)
    {
        if (!std::isfinite(r))
            nan = true;
        else
            max = std::max(max, r);
        sum += std::isfinite(r) ? r : 0.0;
        ++count;
    }
};

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// max-abs difference relative to max(1, max-abs of the reference).
double rel(const Mat& ref, const Mat& other) { return max_abs(ref - other) / std::max(1.0, max_abs(ref)); }

const std::vector<std::string> invariance_factors = {"0.1*x1^2", "0.2*sin(x2)", "0.05*x1*x2+0.1*x2"};

struct Context {
    const Geometry& geo;
    Tolerances tol;
    std::uint64_t seed = 1;
    std::vector<Vec> points;

    DegenerateMetric induced;
    TotallyGeodesicResult tg;

    std::optional<WeylStructure> weyl;
    std::string weyl_reason;
    std::vector<WeylStructure> rescaled;
    std::string invariance_reason;
    std::optional<AmbientManifold> amb_conf;

    std::optional<UmbilicalDetection> umb;
    std::string umb_reason;
    bool ew = false;
    double ew_worst = 0.0;

    std::vector<Leaf> leaves;
    std::vector<std::pair<std::size_t, Vec>> leaf_points;
    std::string leaf_reason;

    bool kaehler = false;
    TangentField theta0_j;
    std::vector<ScalarField> df;

    ScalarField test_function;
    TangentField test_field;

    explicit Context(const Geometry& g) : geo(g) {}
};

// Lazily computed per-point data shared by all identities at that point.
class ChartCache {
public:
    ChartCache(const Context& ctx, Vec u, std::size_t index) : ctx_(ctx), u_(std::move(u)), index_(index) {}

    const Context& ctx() const { return ctx_; }
    const Vec& u() const { return u_; }
    const Geometry& geo() const { return ctx_.geo; }
    const LightlikeHypersurface& hyp() const { return ctx_.geo.hypersurface; }
    const WeylStructure& D() const { return *ctx_.weyl; }
    const ConformalMember& cm() const { return ctx_.weyl->member(); }
    int dim() const { return hyp().chart_dim(); }

    void reseed(std::size_t identity, std::size_t point)
    {
        std::seed_seq s{static_cast<std::uint32_t>(ctx_.seed), static_cast<std::uint32_t>(ctx_.seed >> 32),
                        static_cast<std::uint32_t>(identity), static_cast<std::uint32_t>(point)};
        rng_.seed(s);
    }
    Vec random(int n)
    {
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        Vec v(n);
        for (int i = 0; i < n; ++i)
            v(i) = d(rng_);
        return v;
    }
    Vec random() { return random(dim()); }

    const InducedObjects& io() { return get(io_, [&] { return hyp().induced(u_); }); }
    const AdaptedFrame& frame() { return get(frame_, [&] { return hyp().frame(u_); }); }
    const std::vector<Mat>& dg() { return get(dg_, [&] { return hyp().induced_metric_partials(u_); }); }
    const PseudoInverseKit& kit() { return get(kit_, [&] { return make_kit(ctx_.induced, u_); }); }

    const WeylPoint& w() { return get(w_, [&] { return D().evaluate(u_); }); }
    const Curvature& Rd() { return get(rd_, [&] { return D().curvature_direct(u_); }); }
    const Curvature& Rg() { return get(rg_, [&] { return D().curvature_g(u_); }); }
    const Mat& ric_d() { return get(ric_d_, [&] { return WeylStructure::ricci_trace(Rd(), w()); }); }
    const Mat& ric_g() { return get(ric_g_, [&] { return Rg().ricci(); }); }
    double scal_d() { return WeylStructure::scalar_trace(ric_d(), w()); }
    double scal_g() { return WeylStructure::scalar_trace(ric_g(), w()); }
    const EinsteinWeylFit& fit()
    {
        return get(fit_, [&] {
            return fit_einstein_weyl(ric_d() + ric_d().transpose(), w().g, hyp().screen(u_));
        });
    }
    const Vec& dlambda() { return get(dl_, [&] { return umbilical_lambda_gradient(cm(), u_); }); }
    double xi_lambda() { return dlambda().dot(w().xi); }
    double lambda() { return umbilical_lambda(cm(), u_); }

    const TechnSides& techn() { return get(techn_, [&] { return lemma_techn(hyp(), u_); }); }
    const AlmostContactResiduals& contact()
    {
        return get(contact_, [&] {
            reseed(0xC0, index_);
            std::vector<Vec> vs;
            for (int k = 0; k < 5; ++k)
                vs.push_back(random());
            return almost_contact_residuals(hyp(), u_, vs);
        });
    }

private:
    template <class T, class F>
    const T& get(std::optional<T>& slot, F&& make)
    {
        if (!slot)
            slot = make();
        return *slot;
    }

    const Context& ctx_;
    Vec u_;
    std::mt19937_64 rng_;
    std::optional<InducedObjects> io_;
    std::optional<AdaptedFrame> frame_;
    std::optional<std::vector<Mat>> dg_;
    std::optional<PseudoInverseKit> kit_;
    std::optional<WeylPoint> w_;
    std::optional<Curvature> rd_, rg_;
    std::optional<Mat> ric_d_, ric_g_;
    std::optional<EinsteinWeylFit> fit_;
    std::optional<Vec> dl_;
    std::optional<TechnSides> techn_;
    std::optional<AlmostContactResiduals> contact_;
    std::size_t index_ = 0;
};

struct LeafCache {
    const Leaf& leaf;
    Vec y;
    ChartCache chart;

    LeafCache(const Context& ctx, const Leaf& l, Vec y_, std::size_t index)
        : leaf(l), y(std::move(y_)), chart(ctx, l.chart_point(y), index)
    {
    }

    const Mat& weyl_ricci() { return get(wr_, [&] { return leaf.weyl_ricci(y); }); }
    const EinsteinWeylFit& fit()
    {
        return get(fit_, [&] {
            return fit_einstein_weyl(weyl_ricci() + weyl_ricci().transpose(), leaf.g(y),
                                     Mat::Identity(leaf.dim(), leaf.dim()));
        });
    }

private:
    template <class T, class F>
    const T& get(std::optional<T>& slot, F&& make)
    {
        if (!slot)
            slot = make();
        return *slot;
    }
    std::optional<Mat> wr_;
    std::optional<EinsteinWeylFit> fit_;
};

enum class Tol { Algebraic, Derivative, Curvature, Fixed };

using Requirement = std::function<std::optional<std::string>(const Context&)>;

struct Identity {
    std::string id;
    std::string suite;
    std::string description;
    Tol tol = Tol::Algebraic;
    double fixed = 0.0;
    Requirement requires_;
    std::function<void(ChartCache&, Sample&)> chart;
    std::function<void(LeafCache&, Sample&)> leaf;
    std::size_t max_points = 0; // 0: every point
    std::string note;
    std::function<void(const Context&, IdentityEntry&)> finalize;
};

// ---- requirements ---------------------------------------------------------

std::optional<std::string> need_weyl(const Context& c)
{
    if (!c.weyl)
        return c.weyl_reason;
    return std::nullopt;
}

std::optional<std::string> need_ambient_f(const Context& c)
{
    if (auto r = need_weyl(c))
        return r;
    if (!c.amb_conf)
        return std::string("no extension of f to the ambient chart (conformal.ambient_f)");
    return std::nullopt;
}

std::optional<std::string> need_invariance(const Context& c)
{
    if (auto r = need_weyl(c))
        return r;
    if (c.rescaled.empty())
        return c.invariance_reason;
    return std::nullopt;
}

std::optional<std::string> need_ew(const Context& c)
{
    if (auto r = need_weyl(c))
        return r;
    if (!c.ew) {
        std::ostringstream os;
        os << "not Einstein-Weyl (relative fit residual " << std::setprecision(3) << c.ew_worst << ")";
        return os.str();
    }
    return std::nullopt;
}

std::optional<std::string> need_umbilical(const Context& c)
{
    if (auto r = need_weyl(c))
        return r;
    if (!c.umb || !c.umb->umbilical)
        return c.umb_reason;
    return std::nullopt;
}

std::optional<std::string> need_umbilical_ew(const Context& c)
{
    if (auto r = need_umbilical(c))
        return r;
    return need_ew(c);
}

std::optional<std::string> need_leaves(const Context& c)
{
    if (auto r = need_umbilical(c))
        return r;
    if (c.leaves.empty())
        return c.leaf_reason;
    return std::nullopt;
}

std::optional<std::string> need_leaves_ew(const Context& c)
{
    if (auto r = need_leaves(c))
        return r;
    return need_ew(c);
}

std::optional<std::string> need_kaehler(const Context& c)
{
    if (!c.kaehler)
        return std::string("no complex structure, or the screen is not built from it");
    return std::nullopt;
}

std::optional<std::string> need_kaehler_geodesic(const Context& c)
{
    if (auto r = need_kaehler(c))
        return r;
    if (!c.tg.totally_geodesic)
        return std::string("M is not totally geodesic");
    return std::nullopt;
}

// ---- registry -------------------------------------------------------------

class Registry {
public:
    Identity& add(std::string id, std::string suite, std::string description, Tol tol, double fixed = 0.0)
    {
        Identity i;
        i.id = std::move(id);
        i.suite = std::move(suite);
        i.description = std::move(description);
        i.tol = tol;
        i.fixed = fixed;
        // Curvature-tier identities differentiate the connection numerically; a
        // thinned subset of the points keeps 5D charts within budget.
        if (tol == Tol::Curvature)
            i.max_points = 60;
        items.push_back(std::move(i));
        return items.back();
    }
    std::vector<Identity> items;
};

// (∇_a g)(b, c) from the cached partials.
Mat covariant_metric(const std::vector<Mat>& dg, const Christoffel& gam, const Mat& g, int a)
{
    const int m = static_cast<int>(g.rows());
    Mat nab = dg[static_cast<std::size_t>(a)];
    for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d)
                nab(b, c) -= gam(d, a, b) * g(d, c) + gam(d, a, c) * g(b, d);
    return nab;
}

Mat quasi_orthonormal_frame(const AdaptedFrame& f)
{
    Mat frame(f.xi.size(), f.xi.size());
    frame.col(0) = f.xi;
    frame.rightCols(f.screen.cols()) = f.screen;
    return frame;
}

void add_hypersurface(Registry& r)
{
    r.add("eq1", "hypersurface", "g(N, xi) = 1", Tol::Algebraic).chart = [](ChartCache& c, Sample& s) {
        const AdaptedFrame& f = c.frame();
        s.add(std::abs(f.N.dot(f.gbar * f.xi_amb) - 1.0));
    };
    r.add("eq2", "hypersurface", "g(N, N) = g(N, W) = 0", Tol::Algebraic).chart = [](ChartCache& c, Sample& s) {
        const AdaptedFrame& f = c.frame();
        double v = std::abs(f.N.dot(f.gbar * f.N));
        if (f.screen_amb.cols() > 0)
            v = std::max(v, max_abs(f.N.transpose() * f.gbar * f.screen_amb));
        s.add(v);
    };
    r.add("eq17", "hypersurface", "B(X, xi) = 0", Tol::Algebraic).chart = [](ChartCache& c, Sample& s) {
        const InducedObjects& o = c.io();
        s.add((o.B * o.xi).norm() / std::max(1.0, o.B.norm()));
    };
    r.add("eq18", "hypersurface", "B(X, Y) = g(A*_xi X, Y)", Tol::Derivative).chart = [](ChartCache& c, Sample& s) {
        const InducedObjects& o = c.io();
        s.add(rel(o.B, o.g * o.A_star));
    };
    r.add("eq19", "hypersurface", "A*_xi xi = 0", Tol::Algebraic).chart = [](ChartCache& c, Sample& s) {
        const InducedObjects& o = c.io();
        s.add((o.A_star * o.xi).norm() / std::max(1.0, o.A_star.norm()));
    };
    r.add("eq20", "hypersurface", "(nabla_X g)(Y, Z) = B(X,Y) eta(Z) + B(X,Z) eta(Y)", Tol::Derivative).chart =
        [](ChartCache& c, Sample& s) {
            const InducedObjects& o = c.io();
            double worst = 0.0;
            for (int a = 0; a < c.dim(); ++a) {
                Mat nab = covariant_metric(c.dg(), o.connection, o.g, a);
                Mat rhs = o.B.row(a).transpose() * o.eta.transpose() + o.eta * o.B.row(a);
                worst = std::max(worst, max_abs(nab - rhs));
            }
            s.add(worst / std::max(1.0, max_abs(o.B)));
        };
    auto& thm2 = r.add("thm2", "hypersurface", "B = 0 implies nabla is metric", Tol::Derivative);
    thm2.chart = [](ChartCache& c, Sample& s) {
        const InducedObjects& o = c.io();
        double metricity = 0.0;
        for (int a = 0; a < c.dim(); ++a)
            metricity = std::max(metricity, max_abs(covariant_metric(c.dg(), o.connection, o.g, a)));
        s.detail("max_B", max_abs(o.B));
        s.detail("max_metricity", metricity);
        s.add(max_abs(o.B) <= c.ctx().tol.algebraic ? metricity : 0.0);
    };
    thm2.finalize = [](const Context& c, IdentityEntry& e) { e.details["totally_geodesic"] = c.tg.totally_geodesic; };
}

void add_degcalc(Registry& r)
{
    r.add("eq21", "degcalc", "flat is X -> g(X,.) + eta(X) eta and is invertible", Tol::Algebraic).chart =
        [](ChartCache& c, Sample& s) {
            const PseudoInverseKit& k = c.kit();
            for (int t = 0; t < 5; ++t) {
                Vec X = c.random();
                Vec fl = flat(k, X);
                s.add((fl - (k.g * X + k.eta.dot(X) * k.eta)).norm() + (sharp(k, fl) - X).norm());
            }
        };
    r.add("eq22", "degcalc", "associate metric g~ = g + eta (x) eta is nondegenerate", Tol::Algebraic).chart =
        [](ChartCache& c, Sample& s) {
            const PseudoInverseKit& k = c.kit();
            const AdaptedFrame& f = c.frame();
            const int m = c.dim();
            double v = max_abs(k.g_bracket * k.g_tilde - Mat::Identity(m, m));
            v = std::max(v, std::abs(k.xi.dot(k.g_tilde * k.xi) - 1.0));
            v = std::max(v, max_abs(f.screen.transpose() * (k.g_tilde - k.g) * f.screen));
            s.add(v);
        };
    r.add("eq23", "degcalc", "grad f = g^[ab] f_a d_b solves g~ grad = df", Tol::Algebraic).chart =
        [](ChartCache& c, Sample& s) {
            const Context& ctx = c.ctx();
            Vec df(c.dim());
            for (int i = 0; i < c.dim(); ++i)
                df(i) = ctx.test_function.exact_partial(i).eval(as_span(c.u()));
            Vec g = grad_field(ctx.induced, ctx.test_function)(c.u());
            s.add((c.kit().g_tilde * g - df).norm() / std::max(1.0, df.norm()));
        };
    r.add("eq24", "degcalc", "div X does not depend on the frame", Tol::Derivative).chart =
        [](ChartCache& c, Sample& s) {
            const Context& ctx = c.ctx();
            Mat frame = quasi_orthonormal_frame(c.frame());
            const int m = c.dim();
            Mat mix = Mat::Identity(m, m);
            for (int i = 0; i < m; ++i)
                mix.col(i) += 0.3 * c.random();
            double d1 = div(ctx.induced, ctx.test_field, c.u(), frame);
            double d2 = div(ctx.induced, ctx.test_field, c.u(), Mat(frame * mix));
            double d3 = div(ctx.induced, ctx.test_field, c.u(), Mat::Identity(m, m));
            s.add((std::abs(d1 - d2) + std::abs(d1 - d3)) / std::max(1.0, std::abs(d1)));
        };
    r.add("eq25", "degcalc", "Laplacian f = div grad f", Tol::Derivative).chart = [](ChartCache& c, Sample& s) {
        const Context& ctx = c.ctx();
        Mat frame = quasi_orthonormal_frame(c.frame());
        double lap = laplacian(ctx.induced, ctx.test_function, c.u(), frame);
        double dg = div(ctx.induced, grad_field(ctx.induced, ctx.test_function), c.u(), Mat::Identity(c.dim(), c.dim()));
        s.add(std::abs(lap - dg) / std::max(1.0, std::abs(lap)));
    };
    r.add("eq33", "degcalc", "omega(X) = g(omega#, X) + omega(xi) eta(X)", Tol::Algebraic).chart =
        [](ChartCache& c, Sample& s) {
            for (int t = 0; t < 10; ++t) {
                Vec w = c.random(), X = c.random();
                s.add(sharp_identity_residual(c.kit(), w, X));
            }
        };
}

void add_weyl(Registry& r)
{
    auto& hor = r.add("lemma2_i", "weyl", "theta_g is horizontal", Tol::Algebraic);
    hor.requires_ = need_weyl;
    hor.chart = [](ChartCache& c, Sample& s) { s.add(c.D().horizontality_residual(c.u())); };

    auto& eq26 = r.add("eq26", "weyl", "D is torsion free and Dg = -2 theta (x) g", Tol::Derivative);
    eq26.requires_ = need_weyl;
    eq26.chart = [](ChartCache& c, Sample& s) {
        Christoffel gD = c.D().connection(c.u());
        const WeylPoint& w = c.w();
        auto dg = c.cm().g_partials(c.u());
        const int m = c.dim();
        double torsion = 0.0, metric = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int d = 0; d < m; ++d) {
                    torsion = std::max(torsion, std::abs(gD(d, a, b) - gD(d, b, a)));
                    double v = dg[static_cast<std::size_t>(a)](b, d) + 2.0 * w.theta(a) * w.g(b, d);
                    for (int e = 0; e < m; ++e)
                        v -= gD(e, a, b) * w.g(e, d) + gD(e, a, d) * w.g(b, e);
                    metric = std::max(metric, std::abs(v));
                }
        s.detail("torsion", torsion);
        s.add(std::max(torsion, metric) / std::max(1.0, max_abs(w.g)));
    };

    auto& eq27 = r.add("eq27", "weyl", "D_X PY stays in the screen", Tol::Derivative);
    eq27.requires_ = need_weyl;
    eq27.chart = [](ChartCache& c, Sample& s) {
        Christoffel gD = c.D().connection(c.u());
        const WeylPoint& w = c.w();
        const ConformalMember& cm = c.cm();
        double worst = 0.0;
        for (int a = 0; a < c.dim(); ++a) {
            Vec ea = Vec::Unit(c.dim(), a);
            Mat dP = partial([&cm](const Vec& v) { return cm.P(v); }, c.u(), a);
            Mat DP = dP + gD.along(ea) * w.P;
            worst = std::max(worst, (w.eta.transpose() * DP).cwiseAbs().maxCoeff());
        }
        s.add(worst);
    };

    auto& eq37 = r.add("eq37", "weyl", "S(xi, PY) = C(xi, PY) + theta_g(Y), S(xi, xi) = 0", Tol::Algebraic);
    eq37.requires_ = need_weyl;
    eq37.chart = [](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        double v = std::abs(w.xi.dot(w.S * w.xi));
        Vec row = w.S.transpose() * w.xi;
        Vec expected = w.C.transpose() * w.xi + w.theta;
        v = std::max(v, max_abs(w.P.transpose() * row - w.P.transpose() * expected));
        v = std::max(v, max_abs(w.S - w.S.transpose()));
        s.add(v / std::max(1.0, max_abs(w.S)));
    };

    auto curvature40 = [](KSign sign) {
        return [sign](ChartCache& c, Sample& s) {
            const Curvature& Rd = c.Rd();
            Curvature Rf = c.D().curvature_formula(c.w(), c.Rg(), sign);
            for (int t = 0; t < 10; ++t) {
                Vec X = c.random(), Y = c.random(), Z = c.random();
                Vec a = Rd.apply(X, Y, Z), b = Rf.apply(X, Y, Z);
                s.add((a - b).norm() / std::max(1.0, a.norm()));
            }
        };
    };
    auto& eq40 = r.add("eq40", "weyl", "closed curvature form as printed vs the commutator", Tol::Curvature);
    eq40.requires_ = need_weyl;
    eq40.chart = curvature40(KSign::Literal);
    eq40.note = "printed sign of the xi-valued K term";
    auto& eq40c = r.add("eq40_corrected", "weyl", "closed curvature form with the derived sign vs the commutator",
                        Tol::Curvature);
    eq40c.requires_ = need_weyl;
    eq40c.chart = curvature40(KSign::Corrected);
    eq40c.note = "sign of the xi-valued K term as required by R = D_[X,Y] - [D_X, D_Y]";

    auto& eq44 = r.add("eq44", "weyl", "closed Ricci form vs the pseudo-inverse trace of R^D", Tol::Curvature);
    eq44.requires_ = need_weyl;
    eq44.chart = [](ChartCache& c, Sample& s) {
        Mat ric_f = c.D().ricci_formula(c.w(), c.ric_g());
        const Mat& ric_t = c.ric_d();
        for (int t = 0; t < 10; ++t) {
            Vec X = c.random(), Y = c.random();
            double a = X.dot(ric_t * Y), b = X.dot(ric_f * Y);
            s.add(scaled_diff(a, b));
        }
    };
    eq44.note = "S-terms read as [(D_X S)(xi,Y) - (D_xi S)(X,Y)] + g(X,Y)S(xi,theta#) - S(xi,X)S(xi,Y) + phi(X)S(xi,Y)";

    auto& eq42 = r.add("eq42", "weyl", "closed scalar form as printed vs the trace of Ric^D", Tol::Curvature);
    eq42.requires_ = need_weyl;
    eq42.max_points = 200;
    eq42.chart = [](ChartCache& c, Sample& s) {
        double sf = c.D().scalar_formula(c.w(), c.scal_g());
        s.detail("missing_terms", c.D().scalar_missing_terms(c.w()));
        s.add(scaled_diff(c.scal_d(), sf));
    };
    auto& eq42c = r.add("eq42_completed", "weyl",
                        "closed scalar form plus the xi-xi trace terms vs the trace of Ric^D", Tol::Curvature);
    eq42c.requires_ = need_weyl;
    eq42c.max_points = 200;
    eq42c.chart = [](ChartCache& c, Sample& s) {
        double sf = c.D().scalar_formula(c.w(), c.scal_g()) + c.D().scalar_missing_terms(c.w());
        s.add(scaled_diff(c.scal_d(), sf));
    };
    eq42c.note = "adds (n-1) eta([xi,theta#]) - eta([xi,omega#]) - 2 phi(omega#), omega = i_xi S";

    auto matcal = [](bool printed) {
        return [printed](ChartCache& c, Sample& s) {
            const WeylPoint& w = c.w();
            Christoffel k = c.D().K_antisymmetric(w);
            Mat W = c.hyp().screen(c.u());
            for (int t = 0; t < 5; ++t) {
                Vec X = W * c.random(static_cast<int>(W.cols()));
                Vec Y = W * c.random(static_cast<int>(W.cols()));
                Vec Z = W * c.random(static_cast<int>(W.cols()));
                double lhs = Z.dot(k.contract(X, Y));
                KHorizontalTerms terms = c.D().K_horizontal(w, *c.ctx().amb_conf, X, Y, Z);
                double rhs = printed ? terms.printed() : terms.derived();
                s.detail("curvature_term", terms.curvature);
                s.add(std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
            }
        };
    };
    auto& mk = r.add("matcalK", "weyl", "K antisymmetrization on the screen as printed", Tol::Curvature);
    mk.requires_ = need_ambient_f;
    mk.chart = matcal(true);
    mk.note = "+eta(Rbar(X,Y)Z) plus the C(X,Z)/C(Y,Z) terms, read as a covector evaluated on Z";
    auto& mkd = r.add("matcalK_derived", "weyl",
                      "K antisymmetrization: -eta(Rbar(X,Y)Z) + g(X,Z)C(Y,theta#) - g(Y,Z)C(X,theta#)", Tol::Curvature);
    mkd.requires_ = need_ambient_f;
    mkd.chart = matcal(false);

    auto& eq43 = r.add("eq43", "weyl", "Einstein-Weyl: Sym Ric^D = Lambda g on the screen", Tol::Curvature);
    eq43.requires_ = need_weyl;
    eq43.chart = [](ChartCache& c, Sample& s) {
        const EinsteinWeylFit& fit = c.fit();
        s.detail("lambda", fit.lambda);
        s.add(fit.residual / fit.scale);
    };
    eq43.note = "a condition on the data; a failed fit marks the fixture as not Einstein-Weyl";
    eq43.finalize = [](const Context&, IdentityEntry& e) {
        if (e.verdict == Verdict::Fail) {
            e.verdict = Verdict::Skipped;
            e.skipped_reason = "fixture is not Einstein-Weyl; the identities that assume it are skipped";
        }
    };

    auto& eq45 = r.add("eq45", "weyl", "Sym Ric^D = Sym Ric^g + calD(theta) + 2 g (...)", Tol::Curvature);
    eq45.requires_ = need_weyl;
    eq45.chart = [](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        const Mat& rd = c.ric_d();
        const Mat& rg = c.ric_g();
        double bracket = (1.0 - w.n) * w.theta_norm2 - w.delta_theta + w.xi.dot(w.S * w.theta_sharp);
        Mat sym = rg + rg.transpose() + c.D().calD(w) + 2.0 * bracket * w.g;
        s.add(rel(Mat(rd + rd.transpose()), sym));
    };

    auto& eq47 = r.add("eq47", "weyl", "Ric^g(X,Y) - Ric^g(Y,X) = 2 dphi(X,Y)", Tol::Curvature);
    eq47.requires_ = need_weyl;
    eq47.chart = [](ChartCache& c, Sample& s) {
        const ConformalMember& cm = c.cm();
        TangentField phi([&cm](const Vec& v) { return cm.phi(v); });
        const Mat& rg = c.ric_g();
        s.add(rel(Mat(rg - rg.transpose()), Mat(2.0 * exterior_derivative(phi, c.u()))));
    };

    auto& eq48 = r.add("eq48bis", "weyl", "Ric^g = dphi - calD(theta)/2 + Lambdabar g", Tol::Curvature);
    eq48.requires_ = need_ew;
    eq48.chart = [](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        const ConformalMember& cm = c.cm();
        TangentField phi([&cm](const Vec& v) { return cm.phi(v); });
        double bracket = (1.0 - w.n) * w.theta_norm2 - w.delta_theta + w.xi.dot(w.S * w.theta_sharp);
        double lambda_bar = 0.5 * c.fit().lambda - bracket;
        Mat rhs = exterior_derivative(phi, c.u()) - 0.5 * c.D().calD(w) + lambda_bar * w.g;
        s.add(rel(c.ric_g(), rhs));
    };

    auto& ci = r.add("conformal_invariance", "weyl",
                     "Ric^D unchanged under g -> exp(-2f')g, theta -> theta + df' for three horizontal f'",
                     Tol::Curvature);
    ci.requires_ = need_invariance;
    ci.max_points = 25;
    ci.chart = [](ChartCache& c, Sample& s) {
        const Mat& r1 = c.ric_d();
        for (const WeylStructure& D2 : c.ctx().rescaled) {
            Mat r2 = WeylStructure::ricci_trace(D2.curvature_direct(c.u()), D2.evaluate(c.u()));
            s.add(rel(r1, r2));
        }
    };
}

void add_foliation(Registry& r)
{
    auto& eq50 = r.add("eq50", "foliation", "C(X, PY) = lambda g(X, Y) on the screen", Tol::Derivative);
    eq50.requires_ = need_umbilical;
    eq50.chart = [](ChartCache& c, Sample& s) {
        UmbilicalFit fit = fit_umbilical(c.cm().C(c.u()), c.w().g, c.cm().frame(c.u()));
        s.detail("lambda", fit.lambda);
        s.detail("xi_row", fit.xi_row);
        s.add(std::max(fit.residual, fit.xi_row) / fit.scale);
    };

    auto& eq51 = r.add("eq51", "foliation", "S = lambda g + eta (x) theta + theta (x) eta", Tol::Algebraic);
    eq51.requires_ = need_umbilical;
    eq51.chart = [](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        Mat S51 = c.lambda() * w.g + w.eta * w.theta.transpose() + w.theta * w.eta.transpose();
        s.add(rel(w.S, S51));
    };

    auto& eq52 = r.add("eq52", "foliation", "S(xi, X) = theta_g(X)", Tol::Algebraic);
    eq52.requires_ = need_umbilical;
    eq52.chart = [](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        s.add((w.S * w.xi - w.theta).cwiseAbs().maxCoeff());
    };

    auto ds_scale = [](const WeylPoint& w) {
        double scale = 1.0;
        for (const Mat& m : w.DS)
            scale = std::max(scale, max_abs(m));
        return scale;
    };

    auto& eq53 = r.add("eq53", "foliation", "D^g S on an umbilical screen", Tol::Fixed, 1e-5);
    eq53.requires_ = need_umbilical;
    eq53.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        auto pred = umbilical_DS(w, c.dlambda());
        double worst = 0.0;
        for (std::size_t k = 0; k < pred.size(); ++k)
            worst = std::max(worst, max_abs(pred[k] - w.DS[k]));
        s.add(worst / ds_scale(w));
    };

    auto& eq54 = r.add("eq54", "foliation", "D^g S on TM x S(TM)", Tol::Fixed, 1e-5);
    eq54.requires_ = need_umbilical;
    eq54.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        const Vec& dl = c.dlambda();
        Vec theta_P = w.P.transpose() * w.theta;
        double worst = 0.0;
        for (int k = 0; k < c.dim(); ++k) {
            Mat lhs = w.DS[static_cast<std::size_t>(k)] * w.P;
            Vec Dk_theta_P = w.P.transpose() * w.D_theta.row(k).transpose();
            Mat rhs = dl(k) * w.g * w.P + w.D_eta.row(k).transpose() * theta_P.transpose() +
                      w.eta * Dk_theta_P.transpose();
            worst = std::max(worst, max_abs(lhs - rhs));
        }
        s.add(worst / ds_scale(w));
    };

    auto& eq54c = r.add("eq54_completed", "foliation", "D^g S on TM x S(TM) with the theta(X)(D_Z eta)(PY) term",
                        Tol::Fixed, 1e-5);
    eq54c.requires_ = need_umbilical;
    eq54c.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        const Vec& dl = c.dlambda();
        Vec theta_P = w.P.transpose() * w.theta;
        double worst = 0.0;
        for (int k = 0; k < c.dim(); ++k) {
            Mat lhs = w.DS[static_cast<std::size_t>(k)] * w.P;
            Vec Dk_theta_P = w.P.transpose() * w.D_theta.row(k).transpose();
            Vec Dk_eta_P = w.P.transpose() * w.D_eta.row(k).transpose();
            Mat rhs = dl(k) * w.g * w.P + w.D_eta.row(k).transpose() * theta_P.transpose() +
                      w.eta * Dk_theta_P.transpose() + w.theta * Dk_eta_P.transpose();
            worst = std::max(worst, max_abs(lhs - rhs));
        }
        s.add(worst / ds_scale(w));
    };
    eq54c.note = "the theta(X)(D_Z eta)(PY) term of the umbilical D^g S form, which the TM x S(TM) form drops";

    auto& eq55 = r.add("eq55", "foliation", "(D^g_X S)(xi, Y) = (D^g_X theta)(Y) - phi(X) theta(Y)", Tol::Fixed, 1e-5);
    eq55.requires_ = need_umbilical;
    eq55.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        Mat lhs(c.dim(), c.dim());
        for (int a = 0; a < c.dim(); ++a)
            lhs.row(a) = w.xi.transpose() * w.DS[static_cast<std::size_t>(a)];
        s.add(max_abs(lhs - umbilical_DS_xi(w)) / ds_scale(w));
    };

    auto& eq56 = r.add("eq56", "foliation", "D^g_xi S on an umbilical screen", Tol::Fixed, 1e-5);
    eq56.requires_ = need_umbilical;
    eq56.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        Mat lhs = Mat::Zero(c.dim(), c.dim());
        for (int e = 0; e < c.dim(); ++e)
            lhs += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
        s.add(max_abs(lhs - umbilical_D_xi_S(w, c.dlambda())) / ds_scale(w));
    };

    auto& eq57 = r.add("eq57", "foliation", "(D^g_xi theta)(X) = 0 for Einstein-Weyl", Tol::Derivative);
    eq57.requires_ = need_umbilical_ew;
    eq57.chart = [](ChartCache& c, Sample& s) { s.add(max_abs(D_xi_theta(c.w()))); };

    auto& eq58 = r.add("eq58", "foliation", "(D^g_xi S)(X, Y) = (xi lambda) g(X, Y) for Einstein-Weyl", Tol::Fixed, 1e-5);
    eq58.requires_ = need_umbilical_ew;
    eq58.chart = [ds_scale](ChartCache& c, Sample& s) {
        const WeylPoint& w = c.w();
        Mat lhs = Mat::Zero(c.dim(), c.dim());
        for (int e = 0; e < c.dim(); ++e)
            lhs += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
        s.add(max_abs(lhs - c.xi_lambda() * w.g) / ds_scale(w));
    };

    auto& eq59 = r.add("eq59", "foliation", "closed Ricci form for umbilical Einstein-Weyl", Tol::Curvature);
    eq59.requires_ = need_umbilical_ew;
    eq59.chart = [](ChartCache& c, Sample& s) {
        s.add(rel(c.ric_d(), umbilical_ricci(c.w(), c.ric_g(), c.xi_lambda())));
    };

    auto& eq60 = r.add("eq60", "foliation", "closed scalar form for umbilical Einstein-Weyl", Tol::Curvature);
    eq60.requires_ = need_umbilical_ew;
    eq60.chart = [](ChartCache& c, Sample& s) {
        s.detail("missing_terms", c.D().scalar_missing_terms(c.w()));
        s.add(scaled_diff(c.scal_d(), umbilical_scalar(c.w(), c.scal_g(), c.xi_lambda())));
    };
    auto& eq60c = r.add("eq60_completed", "foliation",
                        "closed scalar form for umbilical Einstein-Weyl plus the xi-xi trace terms", Tol::Curvature);
    eq60c.requires_ = need_umbilical_ew;
    eq60c.chart = [](ChartCache& c, Sample& s) {
        double sf = umbilical_scalar(c.w(), c.scal_g(), c.xi_lambda()) + c.D().scalar_missing_terms(c.w());
        s.add(scaled_diff(c.scal_d(), sf));
    };

    auto& eq61 = r.add("eq61", "foliation", "Ric^g = Ric^g' on the leaf", Tol::Curvature);
    eq61.requires_ = need_leaves;
    eq61.leaf = [](LeafCache& l, Sample& s) {
        Mat ric_leaf = l.leaf.metric().ricci(l.y);
        s.add(rel(ric_leaf, l.leaf.restrict_form(l.chart.ric_g())));
    };

    auto& eq63 = r.add("eq63", "foliation", "scal^g = scal^g' on the leaf", Tol::Curvature);
    eq63.requires_ = need_leaves;
    eq63.leaf = [](LeafCache& l, Sample& s) {
        s.add(scaled_diff(l.chart.scal_g(), l.leaf.metric().scalar_curvature(l.y)));
    };

    auto& eq64 = r.add("eq64", "foliation", "(D^g_X theta)(Y) = (nabla'_X theta)(Y) for horizontal X, Y",
                       Tol::Derivative);
    eq64.requires_ = need_leaves;
    eq64.leaf = [](LeafCache& l, Sample& s) {
        Mat a = l.leaf.restrict_form(l.chart.w().D_theta);
        s.add(rel(a, l.leaf.theta_covariant(l.y)));
    };

    auto& t3 = r.add("thm3a", "foliation", "the leaf Weyl structure is Einstein-Weyl", Tol::Curvature);
    t3.requires_ = need_leaves_ew;
    t3.leaf = [](LeafCache& l, Sample& s) {
        const EinsteinWeylFit& fit = l.fit();
        s.detail("lambda_leaf", fit.lambda);
        s.add(fit.residual / fit.scale);
    };

    auto& eq65 = r.add("eq65", "foliation", "(Lambda - Lambda')/2 = phi(theta#) + 2 xi(lambda)", Tol::Fixed, 1e-3);
    eq65.requires_ = need_leaves_ew;
    eq65.leaf = [](LeafCache& l, Sample& s) {
        double L = l.chart.fit().lambda, Lp = l.fit().lambda;
        const WeylPoint& w = l.chart.w();
        double lhs = 0.5 * (L - Lp);
        double rhs = w.phi.dot(w.theta_sharp) + 2.0 * l.chart.xi_lambda();
        s.detail("lhs", lhs);
        s.detail("rhs", rhs);
        s.add(std::abs(lhs - rhs) / std::max({1.0, std::abs(L), std::abs(Lp)}));
    };
    eq65.note = "both sides vanish when phi(theta#) = 0 and xi(lambda) = 0; see lhs/rhs details";

    auto& eq70 = r.add("eq70", "foliation", "Scal^D' = scal' + 2(n-1) delta theta - (n-1)(n-2)|theta#|^2", Tol::Curvature);
    eq70.requires_ = need_leaves;
    eq70.leaf = [](LeafCache& l, Sample& s) {
        const double n = l.leaf.dim();
        Vec ts = l.leaf.theta_sharp(l.y);
        double delta = -l.leaf.div_theta_sharp(l.y);
        double rhs = l.leaf.metric().scalar_curvature(l.y) + 2.0 * (n - 1) * delta -
                     (n - 1) * (n - 2) * ts.dot(l.leaf.g(l.y) * ts);
        s.add(scaled_diff(l.leaf.weyl_scalar(l.y), rhs));
    };
    eq70.note = "delta is the codifferential -div of the cited Riemannian formula";

    auto& eq73 = r.add("eq73", "foliation",
                       "Scal^D|_M' = Scal^D' - 4(n-1) delta' theta + (3-2n) phi(theta#) - n xi(lambda)", Tol::Curvature);
    eq73.requires_ = need_leaves_ew;
    eq73.leaf = [](LeafCache& l, Sample& s) {
        const double n = l.leaf.dim();
        const WeylPoint& w = l.chart.w();
        double div = l.leaf.div_theta_sharp(l.y);
        double rest = l.leaf.weyl_scalar(l.y) + (3.0 - 2.0 * n) * w.phi.dot(w.theta_sharp) - n * l.chart.xi_lambda();
        double lhs = l.chart.scal_d();
        s.detail("residual_with_codifferential", scaled_diff(lhs, rest + 4.0 * (n - 1) * div));
        s.detail("residual_without_delta_term", scaled_diff(lhs, rest));
        s.add(scaled_diff(lhs, rest - 4.0 * (n - 1) * div));
    };
    eq73.note = "delta' = div as in the closed scalar form";

    auto& eq73d = r.add("eq73_derived", "foliation", "Scal^D|_M' = Scal^D' + (3-2n) phi(theta#) - n xi(lambda)",
                        Tol::Curvature);
    eq73d.requires_ = need_leaves_ew;
    eq73d.leaf = [](LeafCache& l, Sample& s) {
        const double n = l.leaf.dim();
        const WeylPoint& w = l.chart.w();
        double rhs = l.leaf.weyl_scalar(l.y) + (3.0 - 2.0 * n) * w.phi.dot(w.theta_sharp) - n * l.chart.xi_lambda();
        s.add(scaled_diff(l.chart.scal_d(), rhs));
    };
    eq73d.note = "the same relation with the delta' theta term removed";
}

void add_kaehler(Registry& r)
{
    struct C {
        const char* id;
        const char* desc;
        std::function<double(const AlmostContactResiduals&)> pick;
    };
    const std::vector<C> algebraic = {
        {"eq75", "S(TM) = (J TM-perp + J tr(TM)) orthogonal to a J-invariant D0",
         [](const AlmostContactResiduals& a) { return a.screen_split; }},
        {"eq78", "theta0 = g0(., V), so theta0# = V", [](const AlmostContactResiduals& a) { return a.theta0_sharp; }},
        {"eq80", "X = sigma X + theta0(X) U", [](const AlmostContactResiduals& a) { return a.decomposition; }},
        {"eq81", "J X = F X + theta0(X) N with F = J o sigma",
         [](const AlmostContactResiduals& a) { return std::max(a.J_split, a.F_sigma); }},
        {"eq82", "F^2 = -I + theta0 (x) U, theta0(U) = 1, FU = 0, U and V null",
         [](const AlmostContactResiduals& a) {
             return std::max({a.F_squared, a.theta0_U, a.F_U, a.isotropy});
         }},
    };
    for (const C& item : algebraic) {
        auto& e = r.add(item.id, "kaehler", item.desc, Tol::Algebraic);
        e.requires_ = need_kaehler;
        e.chart = [pick = item.pick](ChartCache& c, Sample& s) { s.add(pick(c.contact())); };
    }
    auto& eq79 = r.add("eq79", "kaehler", "theta_g(xi) = 0 for theta_g = theta0 + df", Tol::Algebraic);
    eq79.requires_ = need_kaehler;
    eq79.chart = [](ChartCache& c, Sample& s) {
        Vec th = c.ctx().theta0_j(c.u());
        Vec df(c.dim());
        for (int i = 0; i < c.dim(); ++i)
            df(i) = c.ctx().df[static_cast<std::size_t>(i)].eval(as_span(c.u()));
        Vec xi = c.hyp().xi(c.u());
        s.add(std::max(std::abs(th.dot(xi)), std::abs((th + df).dot(xi))));
    };
    // eq79 goes between eq78 and eq80
    std::rotate(r.items.end() - 4, r.items.end() - 1, r.items.end());

    auto scale_of = [](const TechnSides& t) { return std::max(1.0, max_abs(t.lhs_i)); };

    auto& ti = r.add("techn_i", "kaehler", "(D_X theta0)(Y) = theta0(Y) phi(X) - B(X, FY)", Tol::Fixed, 1e-5);
    ti.requires_ = need_kaehler;
    ti.chart = [scale_of](ChartCache& c, Sample& s) {
        const TechnSides& t = c.techn();
        s.add(max_abs(t.lhs_i - t.rhs_i) / scale_of(t));
    };
    auto& tii = r.add("techn_ii", "kaehler", "(D_X F)Y = theta0(Y) A_N X - B(X, Y) U", Tol::Fixed, 1e-5);
    tii.requires_ = need_kaehler;
    tii.chart = [](ChartCache& c, Sample& s) {
        const TechnSides& t = c.techn();
        double worst = 0.0, scale = 1.0;
        for (std::size_t a = 0; a < t.lhs_ii.size(); ++a) {
            worst = std::max(worst, max_abs(t.lhs_ii[a] - t.rhs_ii[a]));
            scale = std::max(scale, max_abs(t.lhs_ii[a]));
        }
        s.add(worst / scale);
    };
    auto& tiii = r.add("techn_iii", "kaehler", "phi(X) = -theta0(D_X U)", Tol::Fixed, 1e-5);
    tiii.requires_ = need_kaehler;
    tiii.chart = [](ChartCache& c, Sample& s) {
        const TechnSides& t = c.techn();
        s.add(max_abs(t.lhs_iii - t.rhs_iii) / std::max(1.0, max_abs(t.lhs_iii)));
    };
    tiii.note = "the statement omits the argument U of D_X; the proof's form -theta0(D_X U) is evaluated";
    auto& tiv = r.add("techn_iv", "kaehler", "D_X theta0# = F(A*_xi X) + phi(X) theta0#", Tol::Fixed, 1e-5);
    tiv.requires_ = need_kaehler;
    tiv.chart = [](ChartCache& c, Sample& s) {
        const TechnSides& t = c.techn();
        s.add(max_abs(t.lhs_iv - t.rhs_iv) / std::max(1.0, max_abs(t.lhs_iv)));
    };
    auto& co = r.add("coro1", "kaehler", "totally geodesic: D_X theta0 = phi(X) theta0, D_X theta0# = phi(X) theta0#",
                     Tol::Fixed, 1e-5);
    co.requires_ = need_kaehler_geodesic;
    co.chart = [](ChartCache& c, Sample& s) {
        const TechnSides& t = c.techn();
        double a = max_abs(t.lhs_i - t.rhs_coro_i) / std::max(1.0, max_abs(t.lhs_i));
        double b = max_abs(t.lhs_iv - t.rhs_coro_ii) / std::max(1.0, max_abs(t.lhs_iv));
        s.add(std::max(a, b));
    };

    auto& t4 = r.add("thm4", "kaehler", "d theta0 = (phi ^ theta0)/2, closed iff phi and theta0 are proportional",
                     Tol::Fixed, 1e-5);
    t4.requires_ = need_kaehler_geodesic;
    t4.chart = [](ChartCache& c, Sample& s) {
        Mat d = exterior_derivative(c.ctx().theta0_j, c.u());
        Mat w = half_wedge(c.hyp().phi(c.u()), c.ctx().theta0_j(c.u()));
        s.add(max_abs(d - w));
    };
    t4.finalize = [](const Context& ctx, IdentityEntry& e) {
        ClosednessResult r = closedness(ctx.geo.hypersurface, ctx.points, e.tolerance);
        e.details["closed"] = r.closed;
        e.details["max_d_theta0"] = r.max_d_theta0;
        e.details["proportionality_defect"] = r.defect;
        e.details["biconditional"] = r.biconditional;
        if (e.verdict == Verdict::Pass && !r.biconditional)
            e.verdict = Verdict::Fail;
    };
}

const std::vector<Identity>& registry()
{
    static const std::vector<Identity> items = [] {
        Registry r;
        add_hypersurface(r);
        add_degcalc(r);
        add_weyl(r);
        add_foliation(r);
        add_kaehler(r);
        return r.items;
    }();
    return items;
}

// ---- setup ----------------------------------------------------------------

std::string format_g(double v)
{
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

ScalarField make_test_function(int m)
{
    return ScalarField::parse("x0*x1+cos(x" + std::to_string(m - 1) + ")", m);
}

TangentField make_test_field(int m)
{
    std::vector<ScalarField> comps;
    for (int i = 0; i < m; ++i) {
        std::string a = "x" + std::to_string((i + 1) % m), b = "x" + std::to_string((i + 2) % m);
        comps.push_back(ScalarField::parse(a + "*" + b + "+sin(x" + std::to_string(i) + ")", m));
    }
    return TangentField::from_exprs(std::move(comps));
}

std::vector<Vec> thin(const std::vector<Vec>& pts, std::size_t target)
{
    std::size_t stride = std::max<std::size_t>(1, pts.size() / std::max<std::size_t>(1, target));
    std::vector<Vec> out;
    for (std::size_t i = 0; i < pts.size(); i += stride)
        out.push_back(pts[i]);
    return out;
}

void setup(Context& ctx, const RunOptions& opt)
{
    const Geometry& geo = ctx.geo;
    const LightlikeHypersurface& hyp = geo.hypersurface;
    const int m = hyp.chart_dim();
    ctx.tol = geo.spec.tolerances;
    if (opt.tol_curvature)
        ctx.tol.curvature = *opt.tol_curvature;
    GridSpec grid = geo.spec.grid;
    if (opt.seed)
        grid.seed = *opt.seed;
    ctx.seed = grid.seed;
    ctx.points = sample_points(grid, opt.points);

    // rank, signature and screen checks at every sample point
    for (const Vec& u : ctx.points) {
        geo.ambient.validate_at(hyp.embedding().point(u));
        hyp.frame(u);
    }

    ctx.induced = induced_structure(hyp);
    ctx.test_function = make_test_function(m);
    ctx.test_field = make_test_field(m);
    ctx.tg = check_totally_geodesic(hyp, ctx.points, ctx.tol.algebraic);
    for (int i = 0; i < m; ++i)
        ctx.df.push_back(geo.f.exact_partial(i));

    ctx.kaehler = geo.spec.screen_from_complex_structure && geo.ambient.has_complex_structure();
    if (ctx.kaehler)
        ctx.theta0_j = almost_contact_form(hyp);

    if (!hyp.has_screen()) {
        ctx.weyl_reason = "no screen distribution";
    } else if (!ctx.tg.totally_geodesic) {
        ctx.weyl_reason = "M is not totally geodesic (max |B| " + format_g(ctx.tg.max_B) + ")";
    } else {
        WeylStructure D(ConformalMember(hyp, geo.f), geo.theta0);
        double worst = 0.0;
        for (const Vec& u : ctx.points)
            worst = std::max(worst, D.horizontality_residual(u));
        if (worst > ctx.tol.algebraic)
            ctx.weyl_reason = "theta_g is not horizontal (residual " + format_g(worst) + ")";
        else
            ctx.weyl = std::move(D);
    }
    if (!ctx.weyl)
        return;

    const WeylStructure& D = *ctx.weyl;
    if (geo.ambient_f)
        ctx.amb_conf = conformal_ambient(geo.ambient, *geo.ambient_f);

    for (const auto& text : invariance_factors) {
        ScalarField f2 = ScalarField::parse(text, m);
        double worst = 0.0;
        for (const Vec& u : ctx.points) {
            double d = 0.0;
            Vec xi = hyp.xi(u);
            for (int i = 0; i < m; ++i)
                d += f2.exact_partial(i).eval(as_span(u)) * xi(i);
            worst = std::max(worst, std::abs(d));
        }
        if (worst > 1e-12) {
            ctx.rescaled.clear();
            ctx.invariance_reason = "test factor " + text + " is not horizontal on this chart";
            break;
        }
        ctx.rescaled.push_back(D.rescaled(f2));
    }

    ctx.ew_worst = 0.0;
    for (const Vec& u : thin(ctx.points, 20)) {
        WeylPoint w = D.evaluate(u);
        Mat ric = WeylStructure::ricci_trace(D.curvature_direct(u), w);
        EinsteinWeylFit fit = fit_einstein_weyl(ric + ric.transpose(), w.g, hyp.screen(u));
        ctx.ew_worst = std::max(ctx.ew_worst, fit.residual / fit.scale);
    }
    ctx.ew = ctx.ew_worst <= ctx.tol.curvature;

    ctx.umb = detect_umbilical(D.member(), ctx.points, ctx.tol.derivative);
    if (!ctx.umb->umbilical) {
        ctx.umb_reason = "screen is not totally umbilical (relative residual " + format_g(ctx.umb->max_residual) + ")";
        return;
    }
    // C(xi, PY) = lambda g(xi, Y) = 0 is part of the condition
    if (ctx.umb->max_xi_row > ctx.tol.derivative) {
        ctx.umb->umbilical = false;
        ctx.umb_reason = "C(xi, W) does not vanish (max " + format_g(ctx.umb->max_xi_row) + ")";
        return;
    }
    if (!geo.spec.leaf) {
        ctx.leaf_reason = "the spec names no leaf coordinate";
        return;
    }
    for (double value : geo.spec.leaf->values)
        ctx.leaves.emplace_back(D, geo.spec.leaf->coordinate, value);
    for (std::size_t k = 0; k < ctx.leaves.size(); ++k) {
        auto pts = thin(ctx.leaves[k].sample(grid, 5), 40 / ctx.leaves.size());
        for (Vec& y : pts)
            ctx.leaf_points.emplace_back(k, std::move(y));
    }
    double tangency = 0.0;
    for (const auto& [k, y] : ctx.leaf_points)
        tangency = std::max(tangency, ctx.leaves[k].screen_tangency_residual(y));
    if (tangency > ctx.tol.derivative) {
        ctx.leaves.clear();
        ctx.leaf_points.clear();
        ctx.leaf_reason = "the leaves are not tangent to the screen (max |eta(d_y)| " + format_g(tangency) + ")";
    }
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body)
{
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next++;
                if (i >= n)
                    return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!error)
                        error = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

double tolerance_of(const Identity& id, const Tolerances& tol)
{
    switch (id.tol) {
    case Tol::Algebraic: return tol.algebraic;
    case Tol::Derivative: return tol.derivative;
    case Tol::Curvature: return tol.curvature;
    case Tol::Fixed: return id.fixed;
    }
    return tol.algebraic;
}

nlohmann::json finite_or_null(double v)
{
    if (std::isfinite(v))
        return v;
    return nullptr;
}

} // namespace

std::vector<std::pair<std::string, std::string>> identity_registry()
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const Identity& i : registry())
        out.emplace_back(i.id, i.suite);
    return out;
}

VerificationReport run_verification(const GeometrySpec& spec, const nlohmann::json& spec_json, const RunOptions& opt)
{
    auto start = std::chrono::steady_clock::now();
    if (opt.suite != "all" &&
        std::find(suite_names().begin(), suite_names().end(), opt.suite) == suite_names().end())
        throw SpecError("unknown suite: " + opt.suite);

    Geometry geo = build_geometry(spec);
    Context ctx(geo);
    setup(ctx, opt);

    std::vector<const Identity*> selected;
    for (const Identity& i : registry())
        if (opt.suite == "all" || opt.suite == i.suite)
            selected.push_back(&i);

    std::vector<std::optional<std::string>> reasons;
    for (const Identity* i : selected)
        reasons.push_back(i->requires_ ? i->requires_(ctx) : std::nullopt);

    auto active = [&](std::size_t j, std::size_t i, std::size_t n) {
        if (reasons[j])
            return false;
        std::size_t cap = selected[j]->max_points;
        if (cap == 0 || cap >= n)
            return true;
        // exactly cap points, evenly spread over the index range
        return (i + 1) * cap / n > i * cap / n;
    };

    const std::size_t N = ctx.points.size(), L = ctx.leaf_points.size(), J = selected.size();
    std::vector<std::vector<Sample>> chart(J, std::vector<Sample>(N)), leaf(J, std::vector<Sample>(L));
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());

    parallel_for(N, threads, [&](std::size_t i) {
        ChartCache cache(ctx, ctx.points[i], i);
        for (std::size_t j = 0; j < J; ++j)
            if (selected[j]->chart && active(j, i, N)) {
                cache.reseed(j, i);
                selected[j]->chart(cache, chart[j][i]);
            }
    });
    parallel_for(L, threads, [&](std::size_t i) {
        const auto& [k, y] = ctx.leaf_points[i];
        LeafCache cache(ctx, ctx.leaves[k], y, i);
        for (std::size_t j = 0; j < J; ++j)
            if (selected[j]->leaf && active(j, i, L)) {
                cache.chart.reseed(j, i);
                selected[j]->leaf(cache, leaf[j][i]);
            }
    });

    VerificationReport report;
    report.spec_id = spec.id;
    report.fingerprint = spec_fingerprint(spec_json);
    report.suites = opt.suite == "all" ? suite_names() : std::vector<std::string>{opt.suite};
    report.chart_points = N;
    report.random_points = opt.points;
    report.seed = ctx.seed;
    report.tolerances = ctx.tol;

    for (std::size_t j = 0; j < J; ++j) {
        const Identity& id = *selected[j];
        IdentityEntry e;
        e.id = id.id;
        e.suite = id.suite;
        e.description = id.description;
        e.tolerance = tolerance_of(id, ctx.tol);
        if (!id.note.empty())
            e.note = id.note;
        Sample total;
        for (const Sample& s : id.chart ? chart[j] : leaf[j]) {
            total.max = std::max(total.max, s.max);
            total.sum += s.sum;
            total.count += s.count;
            total.nan = total.nan || s.nan;
            for (const auto& [key, v] : s.details)
                total.detail(key, v);
        }
        if (reasons[j]) {
            e.verdict = Verdict::Skipped;
            e.skipped_reason = reasons[j];
        } else if (total.count == 0) {
            e.verdict = Verdict::Skipped;
            e.skipped_reason = "no sample points";
        } else {
            e.max_residual = total.nan ? std::numeric_limits<double>::quiet_NaN() : total.max;
            e.mean_residual = total.sum / static_cast<double>(total.count);
            e.samples = total.count;
            e.verdict = !total.nan && total.max <= e.tolerance ? Verdict::Pass : Verdict::Fail;
            for (const auto& [key, v] : total.details)
                e.details["max_abs_" + key] = v;
            if (id.finalize)
                id.finalize(ctx, e);
        }
        report.entries.push_back(std::move(e));
    }
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::json to_json(const VerificationReport& r)
{
    nlohmann::json j;
    j["schema"] = 1;
    j["tool"] = "nullgeo";
    j["version"] = tool_version;
    j["spec"] = {{"id", r.spec_id}, {"fingerprint", r.fingerprint}};
    j["suites"] = r.suites;
    j["sampling"] = {{"points", r.chart_points}, {"random_points", r.random_points}, {"seed", r.seed}};
    j["tolerances"] = {{"algebraic", r.tolerances.algebraic},
                       {"derivative", r.tolerances.derivative},
                       {"curvature", r.tolerances.curvature}};
    j["elapsed_seconds"] = r.elapsed_seconds;
    nlohmann::json ids = nlohmann::json::array();
    std::size_t pass = 0, fail = 0, skipped = 0;
    for (const auto& e : r.entries) {
        nlohmann::json x;
        x["id"] = e.id;
        x["suite"] = e.suite;
        x["description"] = e.description;
        x["verdict"] = to_string(e.verdict);
        x["max_residual"] = finite_or_null(e.max_residual);
        x["mean_residual"] = finite_or_null(e.mean_residual);
        x["samples"] = e.samples;
        x["tolerance"] = e.tolerance;
        if (e.skipped_reason)
            x["skipped_reason"] = *e.skipped_reason;
        if (e.note)
            x["note"] = *e.note;
        if (!e.details.empty())
            x["details"] = e.details;
        ids.push_back(std::move(x));
        (e.verdict == Verdict::Pass ? pass : e.verdict == Verdict::Fail ? fail : skipped)++;
    }
    j["identities"] = std::move(ids);
    j["summary"] = {{"pass", pass}, {"fail", fail}, {"skipped", skipped}};
    return j;
}

std::string to_text(const VerificationReport& r)
{
    std::ostringstream os;
    os << "nullgeo " << tool_version << "  spec " << r.spec_id << "  " << r.fingerprint.substr(0, 19) << "\n";
    os << "points " << r.chart_points << " (" << r.random_points << " random, seed " << r.seed << ")\n";
    for (const auto& e : r.entries) {
        std::string v = to_string(e.verdict);
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        os << std::left << std::setw(8) << v << std::setw(22) << e.id;
        if (e.verdict == Verdict::Skipped) {
            os << e.skipped_reason.value_or("") << "\n";
            continue;
        }
        os << "max " << std::setw(10) << format_g(e.max_residual) << " tol " << std::setw(8) << format_g(e.tolerance)
           << " n " << std::setw(6) << e.samples << e.description << "\n";
    }
    std::size_t fail = 0;
    for (const auto& e : r.entries)
        fail += e.verdict == Verdict::Fail;
    os << (fail ? std::to_string(fail) + " failed" : std::string("all passed")) << "\n";
    return os.str();
}

} // namespace nullgeo
