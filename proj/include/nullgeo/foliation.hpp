#pragma once

#include "nullgeo/geometry.hpp"
#include "nullgeo/weyl.hpp"

#include <memory>

namespace nullgeo {

/// λ fitted from C(X,PY) = λ g(X,Y) on the screen block of the frame {ξ, W}.
struct UmbilicalFit {
    double lambda = 0.0;
    double residual = 0.0; // ‖C_s - λ g_s‖ over screen pairs
    double xi_row = 0.0;   // max |C(ξ, W_i)|, which the identity also forces to vanish
    double scale = 1.0;
};

UmbilicalFit fit_umbilical(const Mat& C, const Mat& g, const Mat& frame);

double umbilical_lambda(const ConformalMember& cm, const Vec& u);
/// ∂_a λ by differences of the fitted λ.
Vec umbilical_lambda_gradient(const ConformalMember& cm, const Vec& u);

struct UmbilicalDetection {
    bool umbilical = false;
    std::vector<double> lambda;
    double max_residual = 0.0;
    double max_xi_row = 0.0;
};

/// Umbilical iff the screen-block residual is within tol (relative) at every point.
UmbilicalDetection detect_umbilical(const ConformalMember& cm, const std::vector<Vec>& grid, double tol);

/// Covariant derivative of S predicted for an umbilical screen:
/// out[c](a, b) = (D^g_{∂c} S)(∂a, ∂b).
std::vector<Mat> umbilical_DS(const WeylPoint& w, const Vec& dlambda);
/// (D^g_X θ)(Y) - φ(X)θ(Y), to compare with (D^g_X S)(ξ, Y).
Mat umbilical_DS_xi(const WeylPoint& w);
/// (ξλ) g + (D^g_ξ θ) ⊗ η + η ⊗ (D^g_ξ θ), to compare with D^g_ξ S.
Mat umbilical_D_xi_S(const WeylPoint& w, const Vec& dlambda);
/// (D^g_ξ θ)(∂a)
Vec D_xi_theta(const WeylPoint& w);
/// Closed Ricci form for an Einstein-Weyl umbilical screen.
Mat umbilical_ricci(const WeylPoint& w, const Mat& ric_g, double xi_lambda);
/// Closed scalar form for an Einstein-Weyl umbilical screen.
double umbilical_scalar(const WeylPoint& w, double scal_g, double xi_lambda);

/// A leaf of the screen foliation: the level set {u_k = value} of a chart
/// coordinate, with its Riemannian metric g' = g|_{M'} and θ' = θ_g|_{M'}.
class Leaf {
public:
    /// Throws GeometryError when the coordinate is out of range.
    Leaf(const WeylStructure& weyl, int coordinate, double value);

    int dim() const noexcept { return n_; }
    int coordinate() const noexcept { return k_; }
    double value() const noexcept { return value_; }
    const AmbientManifold& metric() const noexcept { return *metric_; }

    /// Chart point of M for leaf coordinates y.
    Vec chart_point(const Vec& y) const;
    /// Leaf coordinates of a chart point (drops coordinate k).
    Vec leaf_point(const Vec& u) const;
    /// Rows/columns of M's chart that the leaf coordinates correspond to.
    Mat restrict_form(const Mat& form_on_M) const;
    Vec restrict_form(const Vec& covector_on_M) const;

    /// max_i |η(∂_{y_i})|: the leaf is tangent to the screen iff this is zero.
    double screen_tangency_residual(const Vec& y) const;

    Mat g(const Vec& y) const { return metric_->metric(y); }
    Vec theta(const Vec& y) const;
    Vec theta_sharp(const Vec& y) const;
    /// (∇'_{∂i} θ')(∂j)
    Mat theta_covariant(const Vec& y) const;
    /// ∇'_i θ'^i
    double div_theta_sharp(const Vec& y) const;
    /// Levi-Civita of g' plus θ'(X)Y + θ'(Y)X - g'(X,Y)θ'♯.
    Christoffel weyl_connection(const Vec& y) const;
    Curvature weyl_curvature(const Vec& y) const;
    Mat weyl_ricci(const Vec& y) const;
    double weyl_scalar(const Vec& y) const;

    /// Leaf sample grid from the spec ranges with coordinate k removed.
    std::vector<Vec> sample(const GridSpec& grid, int extra) const;

private:
    WeylStructure weyl_;
    int k_;
    double value_;
    int n_;
    std::shared_ptr<AmbientManifold> metric_;
};

} // namespace nullgeo
