#include "nullgeo/kaehler.hpp"

#include "nullgeo/weyl.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <sstream>

namespace nullgeo {

namespace {

// Tangent chart components of an ambient vector already ḡ-orthogonal to ξ.
Vec tangent_part(const Mat& jac, const Vec& v) { return jac.colPivHouseholderQr().solve(v); }

// Remove the components of v along span{vectors} with respect to ḡ.
Vec project_out(const Mat& gbar, const Mat& span, const Vec& v)
{
    Mat gram = span.transpose() * gbar * span;
    Vec coef = gram.fullPivLu().solve(span.transpose() * gbar * v);
    return v - span * coef;
}

struct ComplexScreenBuilder {
    LightlikeHypersurface base;
    std::vector<int> d0_coords;
    std::uint64_t id = next_builder_id();

    static std::uint64_t next_builder_id()
    {
        static std::atomic<std::uint64_t> counter{0};
        return ++counter;
    }

    Mat plane(const Mat& j, const Vec& xi_amb, const Vec& N) const
    {
        Mat p(xi_amb.size(), 4);
        p << xi_amb, N, j * xi_amb, j * N;
        return p;
    }

    Mat d0_ambient(const Mat& gbar, const Mat& jac, const Mat& plane4, const std::vector<int>& coords) const
    {
        Mat d(jac.rows(), static_cast<int>(coords.size()));
        for (std::size_t k = 0; k < coords.size(); ++k)
            d.col(static_cast<int>(k)) = project_out(gbar, plane4, jac.col(coords[k]));
        return d;
    }

    // N for the screen of coordinate vectors away from ξ.
    Vec provisional_N(const Vec& u) const
    {
        Vec x = base.embedding().point(u);
        Mat jac = base.embedding().jacobian(u);
        Vec xi = base.xi(u);
        const int m = base.chart_dim();
        int drop = 0;
        xi.cwiseAbs().maxCoeff(&drop);
        Mat w0(m, m - 1);
        for (int k = 0, col = 0; k < m; ++k)
            if (k != drop)
                w0.col(col++) = Vec::Unit(m, k);
        return solve_transversal(base.ambient().metric(x), jac * xi, jac * w0);
    }

    // Screen in chart components and the final N.
    std::pair<Mat, Vec> solve(const Vec& u) const
    {
        const AmbientManifold& amb = base.ambient();
        Vec x = base.embedding().point(u);
        Mat jac = base.embedding().jacobian(u);
        Mat gbar = amb.metric(x);
        Mat J = amb.complex_structure(x);
        Vec xi = base.xi(u);
        Vec xi_amb = jac * xi;
        const int m = base.chart_dim(), n = base.n();

        Vec N = provisional_N(u);

        Mat screen(m, n);
        double change = 0.0;
        for (int it = 0; it < 50; ++it) {
            Mat p4 = plane(J, xi_amb, N);
            Vec jn = J * N;
            Vec jn_t = jn - jn.dot(gbar * xi_amb) * N; // remove the transversal part
            screen.col(0) = tangent_part(jac, J * xi_amb);
            screen.col(1) = tangent_part(jac, jn_t);
            Mat d0 = d0_ambient(gbar, jac, p4, d0_coords);
            for (int k = 0; k < d0.cols(); ++k)
                screen.col(2 + k) = tangent_part(jac, d0.col(k));
            Vec next = solve_transversal(gbar, xi_amb, jac * screen);
            change = (next - N).norm();
            N = next;
            if (change <= 1e-15 * std::max(1.0, N.norm()))
                return {screen, N};
        }
        if (change > 1e-10 * std::max(1.0, N.norm())) {
            std::ostringstream os;
            os << "complex screen iteration did not converge in 50 steps (last change " << change << ")";
            throw NumericalError(os.str());
        }
        return {screen, N};
    }
};

// The screen fields are evaluated n at a time at the same point, and the
// frame is rebuilt many times per point, so recent solves are kept per thread.
Mat cached_solve(const std::shared_ptr<ComplexScreenBuilder>& builder, const Vec& u)
{
    struct Entry {
        std::uint64_t owner = 0;
        Vec u;
        Mat screen;
    };
    thread_local std::array<Entry, 16> cache;
    thread_local std::size_t next = 0;
    for (const Entry& e : cache)
        if (e.owner == builder->id && e.u.size() == u.size() && e.u == u)
            return e.screen;
    Entry& e = cache[next];
    next = (next + 1) % cache.size();
    e.screen = builder->solve(u).first;
    e.u = u;
    e.owner = builder->id;
    return e.screen;
}

} // namespace

std::vector<TangentField> complex_screen(const LightlikeHypersurface& base, const Vec& u_ref)
{
    if (!base.ambient().has_complex_structure())
        throw GeometryError("ambient manifold has no complex structure");
    const int m = base.chart_dim(), n = base.n();
    if (n < 2)
        throw GeometryError("complex screen needs n >= 2");
    auto builder = std::make_shared<ComplexScreenBuilder>(ComplexScreenBuilder{base, {}, ComplexScreenBuilder::next_builder_id()});

    // Choose the coordinate vectors spanning D0 at the reference point, using
    // the provisional N; the choice only needs to be generic.
    if (n > 2) {
        Vec N = builder->provisional_N(u_ref);
        const AmbientManifold& amb = base.ambient();
        Vec x = base.embedding().point(u_ref);
        Mat jac = base.embedding().jacobian(u_ref);
        Mat gbar = amb.metric(x);
        Mat J = amb.complex_structure(x);
        Vec xi_amb = jac * base.xi(u_ref);
        std::vector<int> all(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a)
            all[static_cast<std::size_t>(a)] = a;
        Mat cand = builder->d0_ambient(gbar, jac, builder->plane(J, xi_amb, N), all);
        Eigen::ColPivHouseholderQR<Mat> qr(cand);
        auto perm = qr.colsPermutation().indices();
        for (int k = 0; k < n - 2; ++k)
            builder->d0_coords.push_back(perm(k));
        std::sort(builder->d0_coords.begin(), builder->d0_coords.end());
    }

    std::vector<TangentField> out;
    for (int i = 0; i < n; ++i)
        out.emplace_back([builder, i](const Vec& u) -> Vec { return cached_solve(builder, u).col(i); });
    return out;
}

AlmostContactPack almost_contact(const LightlikeHypersurface& hyp, const Vec& u)
{
    AdaptedFrame f = hyp.frame(u);
    Mat J = hyp.ambient().complex_structure(f.x);
    AlmostContactPack p;
    p.U_amb = -J * f.N;
    p.V_amb = -J * f.xi_amb;
    p.U = hyp.decompose(f, p.U_amb).first;
    p.V = hyp.decompose(f, p.V_amb).first;
    p.theta0 = f.g * p.V;
    const int m = hyp.chart_dim();
    p.F.resize(m, m);
    for (int a = 0; a < m; ++a)
        p.F.col(a) = hyp.decompose(f, J * f.jac.col(a)).first;
    p.sigma = Mat::Identity(m, m) - p.U * p.theta0.transpose();
    const int k = hyp.n() - 2;
    p.D0.resize(m, k);
    for (int i = 0; i < k; ++i)
        p.D0.col(i) = f.screen.col(2 + i);
    return p;
}

TangentField almost_contact_form(const LightlikeHypersurface& hyp)
{
    auto h = std::make_shared<const LightlikeHypersurface>(hyp);
    return TangentField([h](const Vec& u) { return almost_contact(*h, u).theta0; });
}

} // namespace nullgeo

namespace nullgeo {

namespace {

template <class F>
Mat cols_of_partials(F&& f, const Vec& u)
{
    Vec v0 = f(u);
    Mat out(v0.size(), u.size());
    for (int a = 0; a < u.size(); ++a)
        out.col(a) = partial(f, u, a);
    return out;
}

} // namespace

AlmostContactResiduals almost_contact_residuals(const LightlikeHypersurface& hyp, const Vec& u,
                                                const std::vector<Vec>& vectors)
{
    AdaptedFrame f = hyp.frame(u);
    AlmostContactPack p = almost_contact(hyp, u);
    Mat J = hyp.ambient().complex_structure(f.x);
    const int m = hyp.chart_dim();
    AlmostContactResiduals r;
    r.isotropy = std::abs(p.U_amb.dot(f.gbar * p.U_amb)) + std::abs(p.V_amb.dot(f.gbar * p.V_amb));
    r.theta0_U = std::abs(p.theta0.dot(p.U) - 1.0);
    r.F_U = (p.F * p.U).norm();
    Mat gt = f.g + f.eta * f.eta.transpose();
    r.theta0_sharp = (gt.ldlt().solve(p.theta0) - p.V).norm();
    r.horizontal = std::abs(p.theta0.dot(f.xi));

    std::vector<Vec> xs = vectors;
    for (int a = 0; a < m; ++a)
        xs.push_back(Vec::Unit(m, a));
    for (const Vec& X : xs) {
        double t = p.theta0.dot(X);
        r.decomposition = std::max(r.decomposition, (X - p.sigma * X - t * p.U).norm());
        r.J_split = std::max(r.J_split, (J * f.jac * X - f.jac * p.F * X - t * f.N).norm());
        r.F_sigma = std::max(r.F_sigma, (J * f.jac * (p.sigma * X) - f.jac * p.F * X).norm());
        r.F_squared = std::max(r.F_squared, (p.F * (p.F * X) + X - t * p.U).norm());
    }

    // J̄ξ and J̄N lie in the screen: no N component and no ξ component
    auto screen_part = [&](const Vec& v) {
        auto [c, beta] = hyp.decompose(f, v);
        return std::abs(beta) + std::abs(f.eta.dot(c));
    };
    double split = screen_part(J * f.xi_amb) + screen_part(J * f.N);
    if (p.D0.cols() > 0) {
        Mat D0_amb = f.jac * p.D0;
        split += (D0_amb.transpose() * f.gbar * p.U_amb).cwiseAbs().maxCoeff();
        split += (D0_amb.transpose() * f.gbar * p.V_amb).cwiseAbs().maxCoeff();
        // J̄D0 ⊂ D0: least-squares residual of J̄ D0 in the span of D0
        Mat JD0 = J * D0_amb;
        Mat coeff = D0_amb.colPivHouseholderQr().solve(JD0);
        split += (D0_amb * coeff - JD0).cwiseAbs().maxCoeff();
    }
    r.screen_split = split;
    return r;
}

TechnSides lemma_techn(const LightlikeHypersurface& hyp, const Vec& u)
{
    const int m = hyp.chart_dim();
    InducedObjects io = hyp.induced(u);
    AlmostContactPack p = almost_contact(hyp, u);
    const Christoffel& gam = io.connection;
    TechnSides s;
    s.max_B = io.B.cwiseAbs().maxCoeff();

    auto theta0 = [&hyp](const Vec& v) { return almost_contact(hyp, v).theta0; };
    Mat dth = cols_of_partials(theta0, u); // (b, a) = ∂_a θ0_b
    s.lhs_i.resize(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double v = dth(b, a);
            for (int c = 0; c < m; ++c)
                v -= gam(c, a, b) * p.theta0(c);
            s.lhs_i(a, b) = v;
        }
    s.rhs_coro_i = io.phi * p.theta0.transpose();
    s.rhs_i = s.rhs_coro_i - io.B * p.F;

    for (int a = 0; a < m; ++a) {
        Mat dF = partial([&hyp](const Vec& v) { return almost_contact(hyp, v).F; }, u, a);
        Mat G = gam.along(Vec::Unit(m, a));
        s.lhs_ii.push_back(dF + G * p.F - p.F * G);
        Mat rhs(m, m);
        for (int b = 0; b < m; ++b)
            rhs.col(b) = p.theta0(b) * io.A_N.col(a) - io.B(a, b) * p.U;
        s.rhs_ii.push_back(rhs);
    }

    Mat dU = cols_of_partials([&hyp](const Vec& v) { return almost_contact(hyp, v).U; }, u);
    Mat DU = dU;
    Mat dV = cols_of_partials([&hyp](const Vec& v) { return almost_contact(hyp, v).V; }, u);
    Mat DV = dV;
    for (int a = 0; a < m; ++a) {
        Mat G = gam.along(Vec::Unit(m, a));
        DU.col(a) += G * p.U;
        DV.col(a) += G * p.V;
    }
    s.lhs_iii = io.phi;
    s.rhs_iii = -(DU.transpose() * p.theta0);
    s.lhs_iv = DV;
    s.rhs_coro_ii = p.V * io.phi.transpose();
    s.rhs_iv = p.F * io.A_star + s.rhs_coro_ii;
    return s;
}

Mat half_wedge(const Vec& alpha, const Vec& beta)
{
    return 0.5 * (alpha * beta.transpose() - beta * alpha.transpose());
}

ClosednessResult closedness(const LightlikeHypersurface& hyp, const std::vector<Vec>& grid, double tol)
{
    TangentField theta0 = almost_contact_form(hyp);
    ClosednessResult r;
    for (const Vec& u : grid) {
        Mat d = exterior_derivative(theta0, u);
        Vec phi = hyp.phi(u);
        Vec th = theta0(u);
        Mat w = half_wedge(phi, th);
        r.max_d_theta0 = std::max(r.max_d_theta0, d.cwiseAbs().maxCoeff());
        r.dual_residual = std::max(r.dual_residual, (d - w).cwiseAbs().maxCoeff());
        r.defect = std::max(r.defect, 2.0 * w.cwiseAbs().maxCoeff() / std::max(1.0, phi.norm() * th.norm()));
    }
    r.closed = r.max_d_theta0 <= tol;
    r.biconditional = r.closed == (r.defect <= tol);
    return r;
}

} // namespace nullgeo
