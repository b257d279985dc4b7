#include "nullgeo/foliation.hpp"

#include <string>

namespace nullgeo {

UmbilicalFit fit_umbilical(const Mat& C, const Mat& g, const Mat& frame)
{
    const int n = static_cast<int>(frame.cols()) - 1;
    Mat W = frame.rightCols(n);
    Vec xi = frame.col(0);
    Mat Cs = W.transpose() * C * W;
    Mat gs = W.transpose() * g * W;
    UmbilicalFit fit;
    fit.lambda = (gs.inverse() * Cs).trace() / n;
    fit.residual = (Cs - fit.lambda * gs).norm();
    fit.xi_row = (xi.transpose() * C * W).cwiseAbs().maxCoeff();
    fit.scale = std::max(1.0, Cs.norm());
    return fit;
}

double umbilical_lambda(const ConformalMember& cm, const Vec& u)
{
    return fit_umbilical(cm.C(u), cm.g(u), cm.frame(u)).lambda;
}

Vec umbilical_lambda_gradient(const ConformalMember& cm, const Vec& u)
{
    Vec d(u.size());
    for (int a = 0; a < u.size(); ++a)
        d(a) = partial([&cm](const Vec& v) { return umbilical_lambda(cm, v); }, u, a);
    return d;
}

UmbilicalDetection detect_umbilical(const ConformalMember& cm, const std::vector<Vec>& grid, double tol)
{
    UmbilicalDetection out;
    out.umbilical = true;
    for (const Vec& u : grid) {
        UmbilicalFit fit = fit_umbilical(cm.C(u), cm.g(u), cm.frame(u));
        out.lambda.push_back(fit.lambda);
        out.max_residual = std::max(out.max_residual, fit.residual / fit.scale);
        out.max_xi_row = std::max(out.max_xi_row, fit.xi_row);
        if (fit.residual > tol * fit.scale)
            out.umbilical = false;
    }
    return out;
}

std::vector<Mat> umbilical_DS(const WeylPoint& w, const Vec& dlambda)
{
    std::vector<Mat> out;
    const auto m = w.g.rows();
    for (int c = 0; c < m; ++c) {
        Vec De = w.D_eta.row(c).transpose();
        Vec Dt = w.D_theta.row(c).transpose();
        out.push_back(dlambda(c) * w.g + w.theta * De.transpose() + De * w.theta.transpose() +
                      w.eta * Dt.transpose() + Dt * w.eta.transpose());
    }
    return out;
}

Mat umbilical_DS_xi(const WeylPoint& w) { return w.D_theta - w.phi * w.theta.transpose(); }

Vec D_xi_theta(const WeylPoint& w) { return w.D_theta.transpose() * w.xi; }

Mat umbilical_D_xi_S(const WeylPoint& w, const Vec& dlambda)
{
    Vec dxt = D_xi_theta(w);
    return dlambda.dot(w.xi) * w.g + dxt * w.eta.transpose() + w.eta * dxt.transpose();
}

Mat umbilical_ricci(const WeylPoint& w, const Mat& ric_g, double xi_lambda)
{
    const double n2 = 2.0 - w.n;
    return ric_g - 2.0 * w.dtheta + n2 * w.D_theta - n2 * w.theta * w.theta.transpose() +
           (n2 * w.theta_norm2 - w.delta_theta - xi_lambda) * w.g;
}

double umbilical_scalar(const WeylPoint& w, double scal_g, double xi_lambda)
{
    const double n = w.n;
    return scal_g + (2.0 - n) * (n - 1.0) * w.theta_norm2 + 2.0 * (1.0 - n) * w.delta_theta +
           n * w.phi.dot(w.theta_sharp) - n * xi_lambda;
}

// ---------------------------------------------------------------- leaf

namespace {

std::vector<ScalarField> leaf_map(int m, int k, double value)
{
    std::vector<ScalarField> args;
    const int n = m - 1;
    int j = 0;
    for (int a = 0; a < m; ++a)
        args.push_back(a == k ? ScalarField::constant(value, n) : ScalarField::coordinate(j++, n));
    return args;
}

std::shared_ptr<AmbientManifold> leaf_metric(const ConformalMember& cm, int k, double value)
{
    const LightlikeHypersurface& hyp = cm.hypersurface();
    const AmbientManifold& amb = hyp.ambient();
    const int m = hyp.chart_dim();
    const int n = m - 1;
    const int d = amb.dim();
    auto args = leaf_map(m, k, value);
    std::vector<ScalarField> F;
    for (const auto& c : hyp.embedding().components())
        F.push_back(c.compose(args));
    std::vector<std::vector<ScalarField>> dF(static_cast<std::size_t>(d));
    for (int A = 0; A < d; ++A)
        for (int i = 0; i < n; ++i)
            dF[static_cast<std::size_t>(A)].push_back(F[static_cast<std::size_t>(A)].exact_partial(i));
    ScalarField scale = exp(ScalarField::constant(-2.0, n) * cm.f().compose(args));
    const bool unscaled = cm.f().is_zero();
    std::vector<std::vector<ScalarField>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ScalarField s = ScalarField::constant(0.0, n);
            for (int A = 0; A < d; ++A)
                for (int B = 0; B < d; ++B) {
                    if (amb.component(A, B).is_zero())
                        continue;
                    const ScalarField& a = dF[static_cast<std::size_t>(A)][static_cast<std::size_t>(i)];
                    const ScalarField& b = dF[static_cast<std::size_t>(B)][static_cast<std::size_t>(j)];
                    if (a.is_zero() || b.is_zero())
                        continue;
                    s = s + a * b * amb.component(A, B).compose(F);
                }
            rows[static_cast<std::size_t>(i)].push_back(unscaled ? s : scale * s);
        }
    return std::make_shared<AmbientManifold>(std::move(rows), 0);
}

} // namespace

Leaf::Leaf(const WeylStructure& weyl, int coordinate, double value)
    : weyl_(weyl), k_(coordinate), value_(value), n_(weyl.dim() - 1)
{
    if (k_ < 0 || k_ >= weyl.dim())
        throw GeometryError("leaf coordinate " + std::to_string(k_) + " out of range");
    metric_ = leaf_metric(weyl.member(), k_, value_);
}

Vec Leaf::chart_point(const Vec& y) const
{
    Vec u(n_ + 1);
    int j = 0;
    for (int a = 0; a <= n_; ++a)
        u(a) = a == k_ ? value_ : y(j++);
    return u;
}

Vec Leaf::leaf_point(const Vec& u) const
{
    Vec y(n_);
    int j = 0;
    for (int a = 0; a <= n_; ++a)
        if (a != k_)
            y(j++) = u(a);
    return y;
}

Mat Leaf::restrict_form(const Mat& form) const
{
    Mat out(n_, n_);
    for (int i = 0, a = 0; a <= n_; ++a) {
        if (a == k_)
            continue;
        for (int j = 0, b = 0; b <= n_; ++b) {
            if (b == k_)
                continue;
            out(i, j++) = form(a, b);
        }
        ++i;
    }
    return out;
}

Vec Leaf::restrict_form(const Vec& covector) const { return leaf_point(covector); }

double Leaf::screen_tangency_residual(const Vec& y) const
{
    return restrict_form(weyl_.member().eta(chart_point(y))).cwiseAbs().maxCoeff();
}

Vec Leaf::theta(const Vec& y) const { return restrict_form(weyl_.theta(chart_point(y))); }

Vec Leaf::theta_sharp(const Vec& y) const { return g(y).ldlt().solve(theta(y)); }

Mat Leaf::theta_covariant(const Vec& y) const
{
    Christoffel gam = metric_->christoffel(y);
    Vec th = theta(y);
    Mat out(n_, n_);
    for (int i = 0; i < n_; ++i) {
        Vec d = partial([this](const Vec& v) { return theta(v); }, y, i);
        for (int j = 0; j < n_; ++j) {
            double s = d(j);
            for (int c = 0; c < n_; ++c)
                s -= gam(c, i, j) * th(c);
            out(i, j) = s;
        }
    }
    return out;
}

double Leaf::div_theta_sharp(const Vec& y) const
{
    return (g(y).inverse() * theta_covariant(y)).trace();
}

Christoffel Leaf::weyl_connection(const Vec& y) const
{
    Christoffel gam = metric_->christoffel(y);
    Mat gy = g(y);
    Vec th = theta(y);
    Vec ts = gy.ldlt().solve(th);
    for (int c = 0; c < n_; ++c)
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) {
                double t = -gy(a, b) * ts(c);
                if (c == b)
                    t += th(a);
                if (c == a)
                    t += th(b);
                gam(c, a, b) += t;
            }
    return gam;
}

Curvature Leaf::weyl_curvature(const Vec& y) const
{
    return curvature_of([this](const Vec& v) { return weyl_connection(v); }, y);
}

Mat Leaf::weyl_ricci(const Vec& y) const { return weyl_curvature(y).ricci(); }

double Leaf::weyl_scalar(const Vec& y) const { return (g(y).inverse() * weyl_ricci(y)).trace(); }

std::vector<Vec> Leaf::sample(const GridSpec& grid, int extra) const
{
    GridSpec leaf_grid = grid;
    leaf_grid.ranges.erase(leaf_grid.ranges.begin() + k_);
    return sample_points(leaf_grid, extra);
}

} // namespace nullgeo
