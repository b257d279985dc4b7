#include "nullgeo/weyl.hpp"

namespace nullgeo {

namespace {

/// Column a is D_{∂a} Y for a connection with coefficients `gam`.
Mat covariant_jacobian(const Christoffel& gam, const Mat& partials, const Vec& Y)
{
    const int m = gam.dim();
    Mat out = partials;
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                out(c, a) += gam(c, a, b) * Y(b);
    return out;
}

/// Column a is ∂_a of a vector-valued function.
template <class F>
Mat numeric_jacobian(F&& f, const Vec& u)
{
    Vec v0 = f(u);
    Mat out(v0.size(), u.size());
    for (int a = 0; a < u.size(); ++a)
        out.col(a) = partial(f, u, a);
    return out;
}

/// (D_a T)(b, c) for a symmetric-index bilinear form T with coordinate derivative dT.
Mat covariant_form(const Christoffel& gam, const Mat& dT, const Mat& T, int a)
{
    Mat L = gam.along(Vec::Unit(gam.dim(), a));
    return dT - L.transpose() * T - T * L;
}

/// Inverse Gram matrix of a frame with respect to g̃.
Mat frame_bracket(const Mat& frame, const Mat& g_tilde)
{
    return (frame.transpose() * g_tilde * frame).inverse();
}

/// Σ G^{αβ} g̃(D_{F_α} V, F_β) given the covariant jacobian of V.
double frame_divergence(const Mat& cov_jac, const WeylPoint& w)
{
    Mat G = frame_bracket(w.frame, w.g_tilde);
    Mat Q = (cov_jac * w.frame).transpose() * w.g_tilde * w.frame;
    return (G * Q).trace();
}

} // namespace

Vec Curvature::apply(const Vec& X, const Vec& Y, const Vec& Z) const
{
    Vec out = Vec::Zero(m_);
    for (int d = 0; d < m_; ++d)
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b)
                for (int c = 0; c < m_; ++c)
                    out(d) += (*this)(d, a, b, c) * X(a) * Y(b) * Z(c);
    return out;
}

Mat Curvature::ricci() const
{
    Mat ric = Mat::Zero(m_, m_);
    for (int a = 0; a < m_; ++a)
        for (int c = 0; c < m_; ++c)
            for (int b = 0; b < m_; ++b)
                ric(a, c) += (*this)(b, a, b, c);
    return ric;
}

double Curvature::max_abs() const
{
    double m = 0.0;
    for (double v : data_)
        m = std::max(m, std::abs(v));
    return m;
}

Curvature Curvature::operator-(const Curvature& o) const
{
    Curvature out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i)
        out.data_[i] -= o.data_[i];
    return out;
}

Curvature curvature_of(const std::function<Christoffel(const Vec&)>& connection, const Vec& u, FdOptions opt)
{
    const int m = static_cast<int>(u.size());
    Christoffel gam = connection(u);
    std::vector<Christoffel> dgam;
    for (int e = 0; e < m; ++e)
        dgam.push_back(partial(connection, u, e, opt));
    Curvature R(m);
    for (int d = 0; d < m; ++d)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) {
                    double r = dgam[static_cast<std::size_t>(a)](d, b, c) - dgam[static_cast<std::size_t>(b)](d, a, c);
                    for (int e = 0; e < m; ++e)
                        r += gam(d, a, e) * gam(e, b, c) - gam(d, b, e) * gam(e, a, c);
                    R(d, a, b, c) = -r;
                }
    return R;
}

// ---------------------------------------------------------------- member

ConformalMember::ConformalMember(LightlikeHypersurface hyp, ScalarField f) : hyp_(std::move(hyp)), f_(std::move(f))
{
    if (!hyp_.has_screen())
        throw std::invalid_argument("conformal member needs a screen distribution");
    const int m = hyp_.chart_dim();
    if (f_.dim() != m)
        throw std::invalid_argument("conformal factor chart dimension mismatch");
    for (int a = 0; a < m; ++a)
        df_.push_back(f_.exact_partial(a));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            ddf_.push_back(df_[static_cast<std::size_t>(a)].exact_partial(b));
}

Mat ConformalMember::g(const Vec& u) const
{
    return std::exp(-2.0 * f_.eval(as_span(u))) * hyp_.induced_metric(u);
}

std::vector<Mat> ConformalMember::g_partials(const Vec& u) const
{
    Mat g0 = hyp_.induced_metric(u);
    auto dg0 = hyp_.induced_metric_partials(u);
    Vec d = df(u);
    double s = std::exp(-2.0 * f_.eval(as_span(u)));
    std::vector<Mat> out;
    for (int a = 0; a < dim(); ++a)
        out.push_back(s * (dg0[static_cast<std::size_t>(a)] - 2.0 * d(a) * g0));
    return out;
}

Vec ConformalMember::df(const Vec& u) const
{
    Vec d(dim());
    for (int a = 0; a < dim(); ++a)
        d(a) = df_[static_cast<std::size_t>(a)].eval(as_span(u));
    return d;
}

Mat ConformalMember::hessian_f(const Vec& u) const
{
    Mat h(dim(), dim());
    for (int a = 0; a < dim(); ++a)
        for (int b = 0; b < dim(); ++b)
            h(a, b) = ddf_[static_cast<std::size_t>(a * dim() + b)].eval(as_span(u));
    return h;
}

Christoffel ConformalMember::connection(const Vec& u) const
{
    const int m = dim();
    Christoffel gam = hyp_.connection(u);
    Mat g0 = hyp_.induced_metric(u);
    Vec d = df(u);
    PseudoInverseKit kit = make_kit(g0, hyp_.eta(u), hyp_.xi(u));
    Vec grad_f = grad(kit, d);
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double delta = 0.0;
                if (c == b)
                    delta -= d(a);
                if (c == a)
                    delta -= d(b);
                gam(c, a, b) += delta + g0(a, b) * grad_f(c);
            }
    return gam;
}

Vec ConformalMember::phi(const Vec& u) const
{
    Christoffel gam = connection(u);
    Vec xi = hyp_.xi(u);
    Mat dxi = covariant_jacobian(gam, hyp_.xi_field().jacobian(u), xi);
    return dxi.transpose() * hyp_.eta(u);
}

Mat ConformalMember::C(const Vec& u) const
{
    const int m = dim();
    Christoffel gam = connection(u);
    Vec eta = hyp_.eta(u);
    Mat deta = numeric_jacobian([this](const Vec& v) { return hyp_.eta(v); }, u); // (c, a) = ∂_a η_c
    Mat D_eta(m, m);                                                               // (a, c) = (D_a η)_c
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) {
            double s = deta(c, a);
            for (int e = 0; e < m; ++e)
                s -= gam(e, a, c) * eta(e);
            D_eta(a, c) = s;
        }
    return -D_eta * P(u);
}

Mat ConformalMember::frame(const Vec& u) const
{
    Mat W = hyp_.screen(u);
    Mat F(dim(), dim());
    F.col(0) = hyp_.xi(u);
    F.rightCols(n()) = W;
    return F;
}

DegenerateMetric ConformalMember::structure() const
{
    auto self = std::make_shared<ConformalMember>(*this);
    DegenerateMetric m;
    m.g = [self](const Vec& u) { return self->g(u); };
    m.eta = [self](const Vec& u) { return self->eta(u); };
    m.xi = [self](const Vec& u) { return self->xi(u); };
    m.connection = [self](const Vec& u) { return self->connection(u); };
    return m;
}

// ---------------------------------------------------------------- weyl

WeylStructure::WeylStructure(ConformalMember member, TangentField theta0)
    : member_(std::move(member)), theta0_(std::move(theta0))
{
}

Vec WeylStructure::theta(const Vec& u) const { return theta0_(u) + member_.df(u); }

Mat WeylStructure::theta_jacobian(const Vec& u) const
{
    return theta0_.jacobian(u).transpose() + member_.hessian_f(u);
}

Vec WeylStructure::theta_sharp(const Vec& u) const
{
    return sharp(make_kit(member_.g(u), member_.eta(u), member_.xi(u)), theta(u));
}

Mat WeylStructure::S(const Vec& u) const
{
    Mat M = member_.C(u);
    Vec eta = member_.eta(u);
    Vec xi = member_.xi(u);
    Vec th = theta(u);
    return M + eta * th.transpose() + (M.transpose() * xi + th) * eta.transpose();
}

Christoffel WeylStructure::connection(const Vec& u) const
{
    const int m = dim();
    Christoffel gam = member_.connection(u);
    Mat g = member_.g(u);
    Vec xi = member_.xi(u);
    Vec th = theta(u);
    Vec ts = sharp(make_kit(g, member_.eta(u), xi), th);
    Mat s = S(u);
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double t = -g(a, b) * ts(c) - s(a, b) * xi(c);
                if (c == b)
                    t += th(a);
                if (c == a)
                    t += th(b);
                gam(c, a, b) += t;
            }
    return gam;
}

WeylPoint WeylStructure::evaluate(const Vec& u) const
{
    const int m = dim();
    WeylPoint w;
    w.u = u;
    w.n = n();
    w.g = member_.g(u);
    w.eta = member_.eta(u);
    w.xi = member_.xi(u);
    PseudoInverseKit kit = make_kit(w.g, w.eta, w.xi);
    w.g_tilde = kit.g_tilde;
    w.g_bracket = kit.g_bracket;
    w.P = member_.P(u);
    w.frame = member_.frame(u);
    w.gamma_g = member_.connection(u);
    w.gamma_D = connection(u);

    w.theta = theta(u);
    Mat J = theta_jacobian(u);
    w.dtheta = 0.5 * (J - J.transpose());
    w.D_theta = J;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                w.D_theta(a, b) -= w.gamma_g(c, a, b) * w.theta(c);

    w.theta_sharp = sharp(kit, w.theta);
    w.D_theta_sharp = covariant_jacobian(
        w.gamma_g, numeric_jacobian([this](const Vec& v) { return theta_sharp(v); }, u), w.theta_sharp);
    w.theta_norm2 = w.theta_sharp.dot(w.g * w.theta_sharp);
    w.delta_theta = frame_divergence(w.D_theta_sharp, w);

    Mat deta = numeric_jacobian([this](const Vec& v) { return member_.eta(v); }, u);
    w.D_eta = deta.transpose();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                w.D_eta(a, b) -= w.gamma_g(c, a, b) * w.eta(c);
    w.phi = member_.phi(u);
    w.C = member_.C(u);
    w.S = S(u);
    auto Sfn = [this](const Vec& v) { return S(v); };
    for (int a = 0; a < m; ++a)
        w.DS.push_back(covariant_form(w.gamma_g, partial(Sfn, u, a), w.S, a));
    return w;
}

Curvature WeylStructure::curvature_direct(const Vec& u) const
{
    return curvature_of([this](const Vec& v) { return connection(v); }, u);
}

Curvature WeylStructure::curvature_g(const Vec& u) const
{
    return curvature_of([this](const Vec& v) { return member_.connection(v); }, u);
}

Christoffel WeylStructure::K_antisymmetric(const WeylPoint& w) const
{
    const int m = dim();
    Vec s_theta = w.S * w.theta_sharp;
    Vec s_xi = w.S * w.xi;
    auto K = [&](int a, int b, int c) {
        return w.DS[static_cast<std::size_t>(a)](b, c) + s_theta(b) * w.g(a, c) + s_xi(b) * w.S(a, c) +
               w.phi(a) * w.S(b, c);
    };
    Christoffel k(m);
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                k(c, a, b) = K(a, b, c) - K(b, a, c);
    return k;
}

Curvature WeylStructure::curvature_formula(const WeylPoint& w, const Curvature& Rg, KSign sign) const
{
    const int m = dim();
    std::vector<Vec> A;
    for (int a = 0; a < m; ++a)
        A.push_back(w.D_theta_sharp.col(a) - w.theta(a) * w.theta_sharp +
                    0.5 * w.theta_norm2 * Vec::Unit(m, a));
    // (U ∧ V)(Z) = g(U, Z)V - g(V, Z)U
    auto wedge = [&](const Vec& U, const Vec& V, const Vec& Z) -> Vec {
        return U.dot(w.g * Z) * V - V.dot(w.g * Z) * U;
    };
    Christoffel k = K_antisymmetric(w);
    const double s = sign == KSign::Corrected ? 1.0 : -1.0;
    Curvature R(m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                Vec ea = Vec::Unit(m, a), eb = Vec::Unit(m, b), ec = Vec::Unit(m, c);
                Vec v = -2.0 * w.dtheta(a, b) * ec + wedge(A[static_cast<std::size_t>(b)], ea, ec) -
                        wedge(A[static_cast<std::size_t>(a)], eb, ec) + s * k(c, a, b) * w.xi;
                for (int d = 0; d < m; ++d)
                    R(d, a, b, c) = Rg(d, a, b, c) + v(d);
            }
    return R;
}

Mat WeylStructure::ricci_trace(const Curvature& R, const WeylPoint& w)
{
    const int m = R.dim();
    Mat G = frame_bracket(w.frame, w.g_tilde);
    Mat ric = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c)
            for (int al = 0; al < m; ++al) {
                Vec r = R.apply(Vec::Unit(m, a), w.frame.col(al), Vec::Unit(m, c));
                for (int be = 0; be < m; ++be)
                    ric(a, c) += G(al, be) * r.dot(w.g_tilde * w.frame.col(be));
            }
    return ric;
}

Mat WeylStructure::ricci_formula(const WeylPoint& w, const Mat& ric_g) const
{
    const int m = dim();
    const double n1 = static_cast<double>(w.n) - 1.0;
    Vec s_xi = w.S * w.xi;
    Mat D_xi_S = Mat::Zero(m, m);
    for (int e = 0; e < m; ++e)
        D_xi_S += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
    const double s_xi_theta = s_xi.dot(w.theta_sharp);
    Mat ric(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double DS_xi = w.xi.dot(w.DS[static_cast<std::size_t>(a)].col(b));
            ric(a, b) = ric_g(a, b) - 2.0 * w.dtheta(a, b) - n1 * w.D_theta(a, b) + n1 * w.theta(a) * w.theta(b) -
                        n1 * w.g(a, b) * w.theta_norm2 - w.g(a, b) * w.delta_theta +
                        (DS_xi - D_xi_S(a, b)) + w.g(a, b) * s_xi_theta - s_xi(a) * s_xi(b) + w.phi(a) * s_xi(b);
        }
    return ric;
}

double WeylStructure::scalar_trace(const Mat& ric, const WeylPoint& w)
{
    Mat G = frame_bracket(w.frame, w.g_tilde);
    return (G * (w.frame.transpose() * ric * w.frame)).trace();
}

double WeylStructure::scalar_formula(const WeylPoint& w, double scal_g) const
{
    const int m = dim();
    const double nn = static_cast<double>(w.n);
    PseudoInverseKit kit = make_kit(w.g, w.eta, w.xi);
    auto omega_sharp = [this](const Vec& v) {
        PseudoInverseKit k = make_kit(member_.g(v), member_.eta(v), member_.xi(v));
        return sharp(k, S(v) * member_.xi(v));
    };
    Vec os = omega_sharp(w.u);
    Mat D_os = covariant_jacobian(w.gamma_g, numeric_jacobian(omega_sharp, w.u), os);
    double div_omega = frame_divergence(D_os, w);

    Mat D_xi_S = Mat::Zero(m, m);
    for (int e = 0; e < m; ++e)
        D_xi_S += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
    double tr_D_xi_S = scalar_trace(D_xi_S, w);

    Vec s_xi = w.S * w.xi;
    Vec phi_sharp = sharp(kit, w.phi);
    return scal_g - (nn - 1.0) * (nn - 1.0) * w.theta_norm2 + (1.0 - 2.0 * nn) * w.delta_theta +
           (nn - 1.0) * w.phi.dot(w.theta_sharp) + div_omega - tr_D_xi_S + nn * s_xi.dot(w.theta_sharp) -
           os.dot(w.g * os) + phi_sharp.dot(w.g * os);
}

Mat WeylStructure::calD(const WeylPoint& w) const
{
    const int m = dim();
    const double n1 = 1.0 - static_cast<double>(w.n);
    Vec s_xi = w.S * w.xi;
    Mat D_xi_S = Mat::Zero(m, m);
    for (int e = 0; e < m; ++e)
        D_xi_S += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
    Mat out(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double dsa = w.xi.dot(w.DS[static_cast<std::size_t>(a)].col(b));
            double dsb = w.xi.dot(w.DS[static_cast<std::size_t>(b)].col(a));
            out(a, b) = n1 * (w.D_theta(a, b) + w.D_theta(b, a) - 2.0 * w.theta(a) * w.theta(b)) + (dsa + dsb) +
                        (w.phi(a) * s_xi(b) + w.phi(b) * s_xi(a)) - 2.0 * (D_xi_S(a, b) + s_xi(a) * s_xi(b));
        }
    return out;
}

double WeylStructure::horizontality_residual(const Vec& u) const
{
    Vec xi = member_.xi(u);
    return std::abs(theta(u).dot(xi)) + std::abs(member_.df(u).dot(xi));
}

double WeylStructure::scalar_missing_terms(const WeylPoint& w) const
{
    const ConformalMember& cm = member_;
    TangentField ts([this](const Vec& v) { return theta_sharp(v); });
    TangentField os([this, &cm](const Vec& v) { return sharp(make_kit(cm.g(v), cm.eta(v), cm.xi(v)), S(v) * cm.xi(v)); });
    const TangentField& xi = cm.hypersurface().xi_field();
    return (w.n - 1.0) * w.eta.dot(lie_bracket(xi, ts, w.u)) - w.eta.dot(lie_bracket(xi, os, w.u)) -
           2.0 * w.phi.dot(os(w.u));
}

KHorizontalTerms WeylStructure::K_horizontal(const WeylPoint& w, const AmbientManifold& rescaled_ambient, const Vec& X,
                                             const Vec& Y, const Vec& Z) const
{
    const LightlikeHypersurface& hyp = member_.hypersurface();
    AdaptedFrame fr = hyp.frame(w.u);
    Vec r = rescaled_ambient.riemann(fr.x, fr.jac * X, fr.jac * Y, fr.jac * Z);
    KHorizontalTerms t;
    t.curvature = fr.N.dot(fr.gbar * r);
    // C(U, V) = Uᵀ C V for V in the screen
    auto C = [&](const Vec& U, const Vec& V) { return U.dot(w.C * V); };
    auto g = [&](const Vec& U, const Vec& V) { return U.dot(w.g * V); };
    t.theta_sharp = g(X, Z) * C(Y, w.theta_sharp) - g(Y, Z) * C(X, w.theta_sharp);
    t.cc = C(X, Z) * C(w.xi, Y) - C(Y, Z) * C(w.xi, X);
    t.theta_c = w.theta.dot(Y) * C(X, Z) - w.theta.dot(X) * C(Y, Z);
    return t;
}

AmbientManifold conformal_ambient(const AmbientManifold& amb, const ScalarField& fbar)
{
    const int d = amb.dim();
    ScalarField scale = exp(ScalarField::constant(-2.0, d) * fbar);
    std::vector<std::vector<ScalarField>> rows(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            rows[static_cast<std::size_t>(a)].push_back(fbar.is_zero() ? amb.component(a, b) : scale * amb.component(a, b));
    return AmbientManifold(std::move(rows), amb.index());
}

double extension_residual(const LightlikeHypersurface& hyp, const ScalarField& f, const ScalarField& fbar,
                          const Vec& u)
{
    Vec x = hyp.embedding().point(u);
    Vec N = hyp.transversal(u);
    double dN = 0.0;
    for (int A = 0; A < x.size(); ++A)
        dN += N(A) * fbar.exact_partial(A).eval(as_span(x));
    return std::abs(fbar.eval(as_span(x)) - f.eval(as_span(u))) + std::abs(dN);
}

EinsteinWeylFit fit_einstein_weyl(const Mat& sym_ricci, const Mat& g, const Mat& screen)
{
    Mat Ss = screen.transpose() * sym_ricci * screen;
    Mat gs = screen.transpose() * g * screen;
    EinsteinWeylFit fit;
    double denom = gs.squaredNorm();
    fit.lambda = denom > 0.0 ? (Ss.array() * gs.array()).sum() / denom : 0.0;
    fit.residual = (Ss - fit.lambda * gs).norm();
    fit.scale = std::max(1.0, Ss.norm());
    return fit;
}

Mat exterior_derivative(const TangentField& omega, const Vec& u)
{
    Mat J = omega.jacobian(u); // (c, a) = ∂_a ω_c
    return 0.5 * (J.transpose() - J);
}

} // namespace nullgeo
