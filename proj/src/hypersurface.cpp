#include "nullgeo/hypersurface.hpp"

#include <sstream>

namespace nullgeo {

// ---------------------------------------------------------------- fields

TangentField TangentField::from_exprs(std::vector<ScalarField> components)
{
    std::vector<ScalarField> d;
    int m = components.empty() ? 0 : components.front().dim();
    for (const auto& c : components)
        for (int a = 0; a < m; ++a)
            d.push_back(c.exact_partial(a));
    int k = static_cast<int>(components.size());
    auto value = [components, k](const Vec& u) {
        Vec v(k);
        for (int c = 0; c < k; ++c)
            v(c) = components[static_cast<std::size_t>(c)].eval(as_span(u));
        return v;
    };
    auto jac = [d, k, m](const Vec& u) {
        Mat j(k, m);
        for (int c = 0; c < k; ++c)
            for (int a = 0; a < m; ++a)
                j(c, a) = d[static_cast<std::size_t>(c * m + a)].eval(as_span(u));
        return j;
    };
    return TangentField(value, jac);
}

TangentField TangentField::constant(Vec v)
{
    return TangentField([v](const Vec&) { return v; },
                        [v](const Vec& u) { return Mat(Mat::Zero(v.size(), u.size())); });
}

Mat TangentField::jacobian(const Vec& u) const
{
    if (jacobian_)
        return jacobian_(u);
    Vec v0 = value_(u);
    Mat j(v0.size(), u.size());
    for (int a = 0; a < u.size(); ++a)
        j.col(a) = partial(value_, u, a);
    return j;
}

Vec lie_bracket(const TangentField& X, const TangentField& Y, const Vec& u)
{
    return Y.jacobian(u) * X(u) - X.jacobian(u) * Y(u);
}

// ---------------------------------------------------------------- embedding

Embedding::Embedding(std::vector<ScalarField> components) : f_(std::move(components))
{
    if (f_.empty())
        throw std::invalid_argument("embedding has no components");
    m_ = f_.front().dim();
    for (const auto& f : f_) {
        if (f.dim() != m_)
            throw std::invalid_argument("embedding components disagree on chart dimension");
        for (int a = 0; a < m_; ++a)
            df_.push_back(f.exact_partial(a));
    }
    for (const auto& d : df_)
        for (int b = 0; b < m_; ++b)
            ddf_.push_back(d.exact_partial(b));
}

Vec Embedding::point(const Vec& u) const
{
    Vec x(ambient_dim());
    for (int A = 0; A < ambient_dim(); ++A)
        x(A) = f_[static_cast<std::size_t>(A)].eval(as_span(u));
    return x;
}

Mat Embedding::jacobian(const Vec& u) const
{
    Mat j(ambient_dim(), m_);
    for (int A = 0; A < ambient_dim(); ++A)
        for (int a = 0; a < m_; ++a)
            j(A, a) = df_[static_cast<std::size_t>(A * m_ + a)].eval(as_span(u));
    return j;
}

std::vector<Mat> Embedding::hessian(const Vec& u) const
{
    std::vector<Mat> h;
    for (int A = 0; A < ambient_dim(); ++A) {
        Mat m(m_, m_);
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b)
                m(a, b) = ddf_[static_cast<std::size_t>((A * m_ + a) * m_ + b)].eval(as_span(u));
        h.push_back(m);
    }
    return h;
}

// ---------------------------------------------------------------- free helpers

Vec radical_generator(const Mat& g, double rank_tol)
{
    Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    int m = static_cast<int>(g.rows());
    double smax = s(0);
    int kernel = 0;
    for (int i = 0; i < m; ++i)
        if (s(i) <= rank_tol * smax)
            ++kernel;
    if (kernel != 1) {
        std::ostringstream os;
        os << "radical has dimension " << kernel << ", expected 1";
        throw NotLightlikeError(os.str());
    }
    Vec xi = svd.matrixV().col(m - 1);
    for (int i = 0; i < m; ++i) {
        if (std::abs(xi(i)) > 1e-12) {
            if (xi(i) < 0)
                xi = -xi;
            break;
        }
    }
    return xi;
}

Vec solve_transversal(const Mat& gbar, const Vec& xi_amb, const Mat& screen_amb)
{
    const int d = static_cast<int>(gbar.rows());
    const int n = static_cast<int>(screen_amb.cols());
    if (n + 2 != d)
        throw std::invalid_argument("screen must have ambient_dim - 2 vectors");
    Mat gram = screen_amb.transpose() * gbar * screen_amb;
    Eigen::FullPivLU<Mat> glu(gram);
    glu.setThreshold(1e-10);
    if (glu.rank() < n)
        throw GeometryError("screen Gram matrix is singular");
    // Rows: ḡ(V, W_i) = 0, ḡ(V, ξ) = 1, <ξ, V>_euclid = 0. The last row only
    // fixes the free multiple of ξ, which drops out of N below.
    Mat A(d, d);
    Vec rhs = Vec::Zero(d);
    A.topRows(n) = (gbar * screen_amb).transpose();
    A.row(n) = (gbar * xi_amb).transpose();
    A.row(n + 1) = xi_amb.transpose();
    rhs(n) = 1.0;
    Eigen::FullPivLU<Mat> lu(A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw GeometryError("transversal system is singular (degenerate screen)");
    Vec V = lu.solve(rhs);
    return V - 0.5 * V.dot(gbar * V) * xi_amb;
}

// ---------------------------------------------------------------- hypersurface

LightlikeHypersurface::LightlikeHypersurface(AmbientManifold ambient, Embedding embedding,
                                             std::optional<TangentField> xi, std::vector<TangentField> screen)
    : amb_(std::move(ambient)), emb_(std::move(embedding)), screen_(std::move(screen))
{
    if (emb_.ambient_dim() != amb_.dim())
        throw std::invalid_argument("embedding target dimension does not match the ambient manifold");
    if (!screen_.empty() && static_cast<int>(screen_.size()) != n())
        throw std::invalid_argument("screen must have chart_dim - 1 fields");
    if (xi) {
        xi_ = std::move(*xi);
        xi_given_ = true;
    } else {
        // Captures copies so the field stays valid when the hypersurface moves.
        AmbientManifold amb = amb_;
        Embedding emb = emb_;
        xi_ = TangentField([amb, emb](const Vec& u) {
            Mat j = emb.jacobian(u);
            return radical_generator(j.transpose() * amb.metric(emb.point(u)) * j);
        });
    }
}

LightlikeHypersurface LightlikeHypersurface::with_screen(std::vector<TangentField> screen) const
{
    LightlikeHypersurface h = *this;
    if (static_cast<int>(screen.size()) != n())
        throw std::invalid_argument("screen must have chart_dim - 1 fields");
    h.screen_ = std::move(screen);
    return h;
}

Mat LightlikeHypersurface::induced_metric(const Vec& u) const
{
    Mat j = emb_.jacobian(u);
    Mat g = j.transpose() * amb_.metric(emb_.point(u)) * j;
    Vec s = singular_values(g);
    int rank = numerical_rank(g);
    if (rank != n()) {
        std::ostringstream os;
        os << "not lightlike: rank " << rank << " != n = " << n() << " at u = (" << u.transpose()
           << "), singular values (" << s.transpose() << ")";
        throw NotLightlikeError(os.str());
    }
    return g;
}

std::vector<Mat> LightlikeHypersurface::induced_metric_partials(const Vec& u) const
{
    Mat j = emb_.jacobian(u);
    auto h = emb_.hessian(u);
    Vec x = emb_.point(u);
    Mat gb = amb_.metric(x);
    auto dgb = amb_.metric_partials(x);
    const int m = chart_dim(), d = amb_.dim();
    std::vector<Mat> out;
    for (int a = 0; a < m; ++a) {
        Mat ha(d, m); // column b = ∂_a ∂_b of the embedding
        for (int A = 0; A < d; ++A)
            ha.row(A) = h[static_cast<std::size_t>(A)].row(a);
        Mat dga = Mat::Zero(d, d);
        for (int A = 0; A < d; ++A)
            dga += j(A, a) * dgb[static_cast<std::size_t>(A)];
        out.push_back(ha.transpose() * gb * j + j.transpose() * gb * ha + j.transpose() * dga * j);
    }
    return out;
}

Mat LightlikeHypersurface::screen(const Vec& u) const
{
    if (screen_.empty())
        throw std::logic_error("hypersurface has no screen");
    Mat w(chart_dim(), n());
    for (int i = 0; i < n(); ++i)
        w.col(i) = screen_[static_cast<std::size_t>(i)](u);
    return w;
}

AdaptedFrame LightlikeHypersurface::frame(const Vec& u) const
{
    AdaptedFrame f;
    f.u = u;
    f.x = emb_.point(u);
    f.jac = emb_.jacobian(u);
    f.gbar = amb_.metric(f.x);
    f.g = induced_metric(u);
    f.xi = xi_(u);
    if (xi_given_) {
        double scale = std::max(1.0, f.g.norm()) * std::max(1.0, f.xi.norm());
        if ((f.g * f.xi).norm() > 1e-8 * scale || f.xi.norm() == 0.0)
            throw GeometryError("supplied xi is not in the radical of g");
    }
    f.xi_amb = f.jac * f.xi;
    f.screen = screen(u);
    f.screen_amb = f.jac * f.screen;
    f.N = solve_transversal(f.gbar, f.xi_amb, f.screen_amb);
    f.eta = f.jac.transpose() * f.gbar * f.N;
    return f;
}

Vec LightlikeHypersurface::transversal(const Vec& u) const { return frame(u).N; }

Vec LightlikeHypersurface::eta(const Vec& u) const { return frame(u).eta; }

std::pair<Vec, double> LightlikeHypersurface::decompose(const AdaptedFrame& f, const Vec& v) const
{
    double beta = v.dot(f.gbar * f.xi_amb);
    Vec c = f.jac.colPivHouseholderQr().solve(v - beta * f.N);
    return {c, beta};
}

namespace {

// ∇̄_{∂a} ∂b along the embedding, in ambient components.
std::vector<std::vector<Vec>> ambient_hessian(const AmbientManifold& amb, const Embedding& emb, const Vec& u)
{
    Mat j = emb.jacobian(u);
    auto h = emb.hessian(u);
    Christoffel gam = amb.christoffel(emb.point(u));
    const int m = emb.chart_dim(), d = amb.dim();
    std::vector<std::vector<Vec>> v(static_cast<std::size_t>(m), std::vector<Vec>(static_cast<std::size_t>(m)));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            Vec hv(d);
            for (int A = 0; A < d; ++A)
                hv(A) = h[static_cast<std::size_t>(A)](a, b);
            v[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = hv + gam.contract(j.col(a), j.col(b));
        }
    return v;
}

} // namespace

Mat LightlikeHypersurface::second_fundamental_form(const Vec& u) const
{
    Mat j = emb_.jacobian(u);
    Mat gb = amb_.metric(emb_.point(u));
    Vec xi_amb = j * xi_(u);
    auto v = ambient_hessian(amb_, emb_, u);
    const int m = chart_dim();
    Mat B(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            B(a, b) = v[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].dot(gb * xi_amb);
    return B;
}

Christoffel LightlikeHypersurface::connection(const Vec& u) const
{
    AdaptedFrame f = frame(u);
    auto v = ambient_hessian(amb_, emb_, u);
    const int m = chart_dim();
    Christoffel gam(m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            Vec c = decompose(f, v[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]).first;
            for (int k = 0; k < m; ++k)
                gam(k, a, b) = c(k);
        }
    return gam;
}

Vec LightlikeHypersurface::ambient_derivative_N(const Vec& u, const Vec& X) const
{
    auto nfun = [this](const Vec& p) { return transversal(p); };
    const int m = chart_dim();
    Vec dn = Vec::Zero(amb_.dim());
    for (int a = 0; a < m; ++a)
        if (X(a) != 0.0)
            dn += X(a) * partial(nfun, u, a);
    Vec x = emb_.point(u);
    return dn + amb_.christoffel(x).contract(emb_.jacobian(u) * X, transversal(u));
}

Vec LightlikeHypersurface::covariant_derivative(const Vec& u, const Vec& X, const TangentField& Y) const
{
    return Y.jacobian(u) * X + connection(u).contract(X, Y(u));
}

Vec LightlikeHypersurface::tau(const Vec& u) const
{
    AdaptedFrame f = frame(u);
    const int m = chart_dim();
    Vec t(m);
    for (int a = 0; a < m; ++a)
        t(a) = decompose(f, ambient_derivative_N(u, Vec::Unit(m, a))).second;
    return t;
}

Mat LightlikeHypersurface::shape_operator_N(const Vec& u) const
{
    AdaptedFrame f = frame(u);
    const int m = chart_dim();
    Mat A(m, m);
    for (int a = 0; a < m; ++a)
        A.col(a) = -decompose(f, ambient_derivative_N(u, Vec::Unit(m, a))).first;
    return A;
}

Mat LightlikeHypersurface::screen_projection(const Vec& u) const
{
    AdaptedFrame f = frame(u);
    return Mat::Identity(chart_dim(), chart_dim()) - f.xi * f.eta.transpose();
}

Vec LightlikeHypersurface::phi(const Vec& u) const
{
    Vec e = eta(u);
    const int m = chart_dim();
    Vec p(m);
    for (int a = 0; a < m; ++a)
        p(a) = e.dot(covariant_derivative(u, Vec::Unit(m, a), xi_));
    return p;
}

Mat LightlikeHypersurface::shape_operator_xi(const Vec& u) const
{
    Mat P = screen_projection(u);
    const int m = chart_dim();
    Mat A(m, m);
    for (int a = 0; a < m; ++a)
        A.col(a) = -P * covariant_derivative(u, Vec::Unit(m, a), xi_);
    return A;
}

Mat LightlikeHypersurface::screen_form_C(const Vec& u) const
{
    Vec e = eta(u);
    Vec p = phi(u);
    Christoffel gam = connection(u);
    const int m = chart_dim();
    auto efun = [this](const Vec& q) { return eta(q); };
    Mat de(m, m); // de(a, b) = ∂_a η_b
    for (int a = 0; a < m; ++a)
        de.row(a) = partial(efun, u, a).transpose();
    Mat C(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            for (int c = 0; c < m; ++c)
                s += e(c) * gam(c, a, b);
            C(a, b) = s - de(a, b) - e(b) * p(a);
        }
    return C;
}

InducedObjects LightlikeHypersurface::induced(const Vec& u) const
{
    InducedObjects o;
    AdaptedFrame f = frame(u);
    o.g = f.g;
    o.eta = f.eta;
    o.xi = f.xi;
    o.connection = connection(u);
    o.B = second_fundamental_form(u);
    o.C = screen_form_C(u);
    o.tau = tau(u);
    o.phi = phi(u);
    o.A_N = shape_operator_N(u);
    o.A_star = shape_operator_xi(u);
    o.P = Mat::Identity(chart_dim(), chart_dim()) - f.xi * f.eta.transpose();
    return o;
}

double LightlikeHypersurface::screen_integrability_residual(const Vec& u) const
{
    Vec e = eta(u);
    double worst = 0.0;
    for (int i = 0; i < n(); ++i)
        for (int j = i + 1; j < n(); ++j)
            worst = std::max(worst, std::abs(e.dot(lie_bracket(screen_[static_cast<std::size_t>(i)],
                                                               screen_[static_cast<std::size_t>(j)], u))));
    return worst;
}

std::vector<TangentField> gram_schmidt_screen(const LightlikeHypersurface& base, const Vec& u_ref)
{
    Vec xi0 = base.xi(u_ref);
    int drop = 0;
    xi0.cwiseAbs().maxCoeff(&drop);
    const int m = base.chart_dim();
    auto basis = std::make_shared<const LightlikeHypersurface>(base);
    std::vector<TangentField> out;
    for (int i = 0; i < m - 1; ++i) {
        out.emplace_back([basis, drop, i, m](const Vec& u) {
            Mat g = basis->induced_metric(u);
            std::vector<Vec> w;
            for (int k = 0; k < m; ++k) {
                if (k == drop)
                    continue;
                Vec v = Vec::Unit(m, k);
                for (const Vec& q : w)
                    v -= (q.dot(g * v)) * q;
                double nrm = v.dot(g * v);
                if (nrm <= 0.0)
                    throw GeometryError("coordinate vectors do not span a Riemannian screen");
                w.push_back(v / std::sqrt(nrm));
                if (static_cast<int>(w.size()) == i + 1)
                    break;
            }
            return w.back();
        });
    }
    return out;
}

TotallyGeodesicResult check_totally_geodesic(const LightlikeHypersurface& hyp, const std::vector<Vec>& grid,
                                             double tol)
{
    TotallyGeodesicResult r;
    const int m = hyp.chart_dim();
    for (const Vec& u : grid) {
        r.max_B = std::max(r.max_B, hyp.second_fundamental_form(u).cwiseAbs().maxCoeff());
        if (!hyp.has_screen())
            continue;
        Mat g = hyp.induced_metric(u);
        auto dg = hyp.induced_metric_partials(u);
        Christoffel gam = hyp.connection(u);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) {
                    double s = dg[static_cast<std::size_t>(a)](b, c);
                    for (int d = 0; d < m; ++d)
                        s -= gam(d, a, b) * g(d, c) + gam(d, a, c) * g(b, d);
                    r.max_metricity = std::max(r.max_metricity, std::abs(s));
                }
    }
    r.totally_geodesic = r.max_B <= tol;
    return r;
}

} // namespace nullgeo
