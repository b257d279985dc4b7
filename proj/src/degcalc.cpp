#include "nullgeo/degcalc.hpp"

#include <memory>

namespace nullgeo {

DegenerateMetric induced_structure(const LightlikeHypersurface& hyp)
{
    auto h = std::make_shared<const LightlikeHypersurface>(hyp);
    return {[h](const Vec& u) { return h->induced_metric(u); }, [h](const Vec& u) { return h->eta(u); },
            [h](const Vec& u) { return h->xi(u); }, [h](const Vec& u) { return h->connection(u); }};
}

PseudoInverseKit make_kit(const Mat& g, const Vec& eta, const Vec& xi)
{
    PseudoInverseKit k;
    k.g = g;
    k.eta = eta;
    k.xi = xi;
    k.g_tilde = g + eta * eta.transpose();
    Eigen::FullPivLU<Mat> lu(k.g_tilde);
    if (!lu.isInvertible())
        throw GeometryError("associate metric g + eta eta is singular");
    k.g_bracket = lu.inverse();
    return k;
}

PseudoInverseKit make_kit(const DegenerateMetric& m, const Vec& u) { return make_kit(m.g(u), m.eta(u), m.xi(u)); }

Vec flat(const PseudoInverseKit& kit, const Vec& X) { return kit.g * X + kit.eta.dot(X) * kit.eta; }

Vec sharp(const PseudoInverseKit& kit, const Vec& omega) { return kit.g_bracket * omega; }

double sharp_identity_residual(const PseudoInverseKit& kit, const Vec& omega, const Vec& X)
{
    Vec s = sharp(kit, omega);
    return std::abs(omega.dot(X) - s.dot(kit.g * X) - omega.dot(kit.xi) * kit.eta.dot(X));
}

Vec grad(const PseudoInverseKit& kit, const Vec& df) { return kit.g_bracket * df; }

TangentField grad_field(const DegenerateMetric& m, const ScalarField& f)
{
    std::vector<ScalarField> df;
    for (int a = 0; a < f.dim(); ++a)
        df.push_back(f.exact_partial(a));
    return TangentField([m, df](const Vec& u) {
        Vec d(static_cast<int>(df.size()));
        for (std::size_t a = 0; a < df.size(); ++a)
            d(static_cast<int>(a)) = df[a].eval(as_span(u));
        return grad(make_kit(m, u), d);
    });
}

double div(const DegenerateMetric& m, const TangentField& X, const Vec& u, const Mat& frame)
{
    PseudoInverseKit kit = make_kit(m, u);
    // column a: ∇_{∂a} X = ∂_a X + Γ(∂a, X)
    Mat nabla = X.jacobian(u);
    Christoffel gam = m.connection(u);
    Vec x = X(u);
    for (int a = 0; a < u.size(); ++a)
        nabla.col(a) += gam.contract(Vec::Unit(u.size(), a), x);
    Mat gt_frame = frame.transpose() * kit.g_tilde * frame;
    Mat bracket = gt_frame.inverse();
    Mat pairing = frame.transpose() * kit.g_tilde * nabla * frame; // (β, α) = g̃(∇_{X_α} X, X_β)
    double s = 0.0;
    for (int a = 0; a < frame.cols(); ++a)
        for (int b = 0; b < frame.cols(); ++b)
            s += bracket(a, b) * pairing(b, a);
    return s;
}

double div(const DegenerateMetric& m, const TangentField& X, const Vec& u, const LightlikeHypersurface& hyp)
{
    AdaptedFrame f = hyp.frame(u);
    Mat frame(u.size(), u.size());
    frame.col(0) = f.xi;
    frame.rightCols(u.size() - 1) = f.screen;
    return div(m, X, u, frame);
}

double laplacian(const DegenerateMetric& m, const ScalarField& f, const Vec& u, const Mat& frame)
{
    return div(m, grad_field(m, f), u, frame);
}

} // namespace nullgeo
