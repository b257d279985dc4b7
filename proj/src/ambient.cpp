#include "nullgeo/ambient.hpp"

#include <string>

namespace nullgeo {

namespace {

Mat eval_matrix(const std::vector<ScalarField>& f, int rows, int cols, const Vec& x, std::size_t offset = 0)
{
    Mat m(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b)
            m(a, b) = f[offset + static_cast<std::size_t>(a * cols + b)].eval(as_span(x));
    return m;
}

} // namespace

AmbientManifold::AmbientManifold(std::vector<std::vector<ScalarField>> metric, int index,
                                 std::optional<std::vector<std::vector<ScalarField>>> complex_structure)
    : dim_(static_cast<int>(metric.size())), index_(index)
{
    for (const auto& row : metric) {
        if (static_cast<int>(row.size()) != dim_)
            throw std::invalid_argument("metric must be square");
        for (const auto& f : row) {
            if (f.dim() != dim_)
                throw std::invalid_argument("metric component chart dimension mismatch");
            g_.push_back(f);
        }
    }
    for (int c = 0; c < dim_; ++c)
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                dg_.push_back(g_[idx(a, b)].exact_partial(c));
    for (int d = 0; d < dim_; ++d)
        for (int c = 0; c < dim_; ++c)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    ddg_.push_back(dg_[static_cast<std::size_t>((c * dim_ + a) * dim_ + b)].exact_partial(d));
    if (complex_structure) {
        if (static_cast<int>(complex_structure->size()) != dim_)
            throw std::invalid_argument("complex structure must be dim x dim");
        has_j_ = true;
        for (const auto& row : *complex_structure) {
            if (static_cast<int>(row.size()) != dim_)
                throw std::invalid_argument("complex structure must be dim x dim");
            for (const auto& f : row)
                j_.push_back(f);
        }
        for (int c = 0; c < dim_; ++c)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    dj_.push_back(j_[idx(a, b)].exact_partial(c));
    }
}

Mat AmbientManifold::metric(const Vec& x) const { return eval_matrix(g_, dim_, dim_, x); }

std::vector<Mat> AmbientManifold::metric_partials(const Vec& x) const
{
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(dim_));
    for (int c = 0; c < dim_; ++c)
        out.push_back(eval_matrix(dg_, dim_, dim_, x, static_cast<std::size_t>(c * dim_ * dim_)));
    return out;
}

Christoffel AmbientManifold::christoffel(const Vec& x) const
{
    Mat g = metric(x);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible())
        throw NumericalError("singular ambient metric");
    Mat ginv = lu.inverse();
    auto dg = metric_partials(x);
    Christoffel gam(dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            for (int c = 0; c < dim_; ++c) {
                double s = 0.0;
                for (int d = 0; d < dim_; ++d)
                    s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
                gam(a, b, c) = 0.5 * s;
            }
    return gam;
}

std::vector<Christoffel> AmbientManifold::christoffel_partials(const Vec& x) const
{
    Mat g = metric(x);
    Mat ginv = g.inverse();
    auto dg = metric_partials(x);
    std::vector<Christoffel> out;
    for (int e = 0; e < dim_; ++e) {
        Mat dginv = -ginv * dg[e] * ginv;
        auto ddg = [&](int c, int a, int b) {
            return ddg_[static_cast<std::size_t>(((e * dim_ + c) * dim_ + a) * dim_ + b)].eval(as_span(x));
        };
        Christoffel d(dim_);
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                for (int c = 0; c < dim_; ++c) {
                    double s = 0.0;
                    for (int k = 0; k < dim_; ++k) {
                        double first = dg[b](k, c) + dg[c](k, b) - dg[k](b, c);
                        double second = ddg(b, k, c) + ddg(c, k, b) - ddg(k, b, c);
                        s += dginv(a, k) * first + ginv(a, k) * second;
                    }
                    d(a, b, c) = 0.5 * s;
                }
        out.push_back(std::move(d));
    }
    return out;
}

Vec AmbientManifold::riemann(const Vec& x, const Vec& X, const Vec& Y, const Vec& Z) const
{
    Christoffel gam = christoffel(x);
    auto dgam = christoffel_partials(x);
    Vec out = Vec::Zero(dim_);
    for (int d = 0; d < dim_; ++d)
        for (int c = 0; c < dim_; ++c)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b) {
                    double r = dgam[static_cast<std::size_t>(a)](d, b, c) - dgam[static_cast<std::size_t>(b)](d, a, c);
                    for (int e = 0; e < dim_; ++e)
                        r += gam(d, a, e) * gam(e, b, c) - gam(d, b, e) * gam(e, a, c);
                    out(d) -= r * X(a) * Y(b) * Z(c);
                }
    return out;
}

Mat AmbientManifold::ricci(const Vec& x) const
{
    Mat ric = Mat::Zero(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            for (int c = 0; c < dim_; ++c)
                ric(a, b) += riemann(x, Vec::Unit(dim_, a), Vec::Unit(dim_, c), Vec::Unit(dim_, b))(c);
    return ric;
}

double AmbientManifold::scalar_curvature(const Vec& x) const
{
    return (metric(x).inverse() * ricci(x)).trace();
}

double AmbientManifold::metricity_residual(const Vec& x) const
{
    Mat g = metric(x);
    auto dg = metric_partials(x);
    Christoffel gam = christoffel(x);
    double worst = 0.0;
    for (int c = 0; c < dim_; ++c)
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b) {
                double r = dg[c](a, b);
                for (int e = 0; e < dim_; ++e)
                    r -= gam(e, c, a) * g(e, b) + gam(e, c, b) * g(a, e);
                worst = std::max(worst, std::abs(r));
            }
    return worst;
}

Mat AmbientManifold::complex_structure(const Vec& x) const
{
    if (!has_j_)
        throw std::logic_error("ambient manifold has no complex structure");
    return eval_matrix(j_, dim_, dim_, x);
}

Vec AmbientManifold::complex_structure_derivative(const Vec& x, const Vec& X, const Vec& Y) const
{
    Mat j = complex_structure(x);
    Christoffel gam = christoffel(x);
    Mat dj = Mat::Zero(dim_, dim_);
    for (int c = 0; c < dim_; ++c)
        dj += X(c) * eval_matrix(dj_, dim_, dim_, x, static_cast<std::size_t>(c * dim_ * dim_));
    Mat gx = gam.along(X);
    // (∇_X J) = X(J) + [Γ_X, J]
    return (dj + gx * j - j * gx) * Y;
}

void AmbientManifold::validate_at(const Vec& x) const
{
    Mat g = metric(x);
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw GeometryError("ambient metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    int negatives = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= 1e-12 * scale)
            throw GeometryError("ambient metric is degenerate");
        if (ev(i) < 0.0)
            ++negatives;
    }
    if (negatives != index_)
        throw GeometryError("ambient metric index " + std::to_string(negatives) +
                             " does not match declared index " + std::to_string(index_));
}

} // namespace nullgeo
