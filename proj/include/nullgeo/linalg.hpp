#pragma once

// Dense linear algebra aliases and the small tensor helpers shared by every
// geometry module. Components are always taken in the chart basis unless a
// function says otherwise.

#include "nullgeo/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace nullgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vec& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Connection coefficients: conn(c, a, b) = Γ^c_{ab}, meaning ∇_{∂a} ∂b = Γ^c_{ab} ∂c.
class Christoffel {
public:
    Christoffel() = default;
    explicit Christoffel(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

    int dim() const noexcept { return dim_; }
    double& operator()(int c, int a, int b) { return data_[idx(c, a, b)]; }
    double operator()(int c, int a, int b) const { return data_[idx(c, a, b)]; }

    /// Γ(X, Y)^c = Γ^c_{ab} X^a Y^b
    Vec contract(const Vec& x, const Vec& y) const
    {
        Vec out = Vec::Zero(dim_);
        for (int c = 0; c < dim_; ++c)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    out(c) += (*this)(c, a, b) * x(a) * y(b);
        return out;
    }

    /// Matrix M with M(c, b) = Γ^c_{ab} X^a (the map Y -> Γ(X, Y)).
    Mat along(const Vec& x) const
    {
        Mat m = Mat::Zero(dim_, dim_);
        for (int c = 0; c < dim_; ++c)
            for (int a = 0; a < dim_; ++a)
                for (int b = 0; b < dim_; ++b)
                    m(c, b) += (*this)(c, a, b) * x(a);
        return m;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    Christoffel& operator+=(const Christoffel& o)
    {
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }
    Christoffel& operator-=(const Christoffel& o)
    {
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }
    Christoffel& operator*=(double s)
    {
        for (double& v : data_)
            v *= s;
        return *this;
    }
    friend Christoffel operator+(Christoffel a, const Christoffel& b) { return a += b; }
    friend Christoffel operator-(Christoffel a, const Christoffel& b) { return a -= b; }
    friend Christoffel operator*(Christoffel a, double s) { return a *= s; }
    friend Christoffel operator*(double s, Christoffel a) { return a *= s; }

private:
    std::size_t idx(int c, int a, int b) const
    {
        return static_cast<std::size_t>((c * dim_ + a) * dim_ + b);
    }
    int dim_ = 0;
    std::vector<double> data_;
};

/// Step sizes for differentiating pointwise-computed quantities.
struct FdOptions {
    double h = 1e-3;
    bool richardson = true;
};

/// Central difference of f along coordinate i, with one Richardson step:
/// (4 D(h/2) - D(h)) / 3. T must support +, - and scalar *.
template <class F>
auto partial(F&& f, const Vec& u, int i, FdOptions opt = {}) -> decltype(f(u))
{
    using T = decltype(f(u));
    auto central = [&](double h) -> T {
        Vec up = u, um = u;
        up(i) += h;
        um(i) -= h;
        return (f(up) - f(um)) * (1.0 / (2.0 * h));
    };
    if (!opt.richardson)
        return central(opt.h);
    T d1 = central(opt.h);
    T d2 = central(0.5 * opt.h);
    return T((d2 * 4.0 - d1) * (1.0 / 3.0));
}

/// Singular values in descending order.
inline Vec singular_values(const Mat& m)
{
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues();
}

/// Numerical rank with a scale-free threshold: sigma <= rel_tol * sigma_max counts as zero.
inline int numerical_rank(const Mat& m, double rel_tol = 1e-9)
{
    Vec s = singular_values(m);
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++r;
    return r;
}

/// Residual helper: |a - b| / max(1, |a|, |b|).
inline double scaled_diff(double a, double b)
{
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double scaled_diff(const Vec& a, const Vec& b)
{
    return (a - b).norm() / std::max({1.0, a.norm(), b.norm()});
}

} // namespace nullgeo
