#pragma once

#include "nullgeo/degcalc.hpp"
#include "nullgeo/hypersurface.hpp"

#include <functional>

namespace nullgeo {

/// Four-index curvature components: R(∂a, ∂b)∂c = Σ_d r(d, a, b, c) ∂d,
/// with R(X,Y) = D_[X,Y] - [D_X, D_Y].
class Curvature {
public:
    Curvature() = default;
    explicit Curvature(int dim) : m_(dim), data_(static_cast<std::size_t>(dim * dim * dim * dim), 0.0) {}

    int dim() const noexcept { return m_; }
    double& operator()(int d, int a, int b, int c) { return data_[idx(d, a, b, c)]; }
    double operator()(int d, int a, int b, int c) const { return data_[idx(d, a, b, c)]; }

    Vec apply(const Vec& X, const Vec& Y, const Vec& Z) const;
    /// tr(Z -> R(∂a, Z)∂c)
    Mat ricci() const;
    double max_abs() const;
    Curvature operator-(const Curvature& o) const;

private:
    std::size_t idx(int d, int a, int b, int c) const
    {
        return static_cast<std::size_t>(((d * m_ + a) * m_ + b) * m_ + c);
    }
    int m_ = 0;
    std::vector<double> data_;
};

/// Curvature of a connection field by differentiating its coefficients.
Curvature curvature_of(const std::function<Christoffel(const Vec&)>& connection, const Vec& u, FdOptions opt = {});

/// g = e^{-2f} g0 on a totally geodesic lightlike hypersurface, with the
/// torsion-free g-compatible connection D^g obtained from ∇ by the conformal
/// change formula (the extension of f with N(f̄) = 0).
class ConformalMember {
public:
    ConformalMember(LightlikeHypersurface hyp, ScalarField f);

    const LightlikeHypersurface& hypersurface() const noexcept { return hyp_; }
    const ScalarField& f() const noexcept { return f_; }
    int dim() const noexcept { return hyp_.chart_dim(); }
    int n() const noexcept { return hyp_.n(); }

    Mat g(const Vec& u) const;
    /// result[a](b, c) = ∂_a g_bc
    std::vector<Mat> g_partials(const Vec& u) const;
    Vec eta(const Vec& u) const { return hyp_.eta(u); }
    Vec xi(const Vec& u) const { return hyp_.xi(u); }
    Vec df(const Vec& u) const;
    Mat hessian_f(const Vec& u) const;
    Christoffel connection(const Vec& u) const;
    /// φ_g(X) = η(D^g_X ξ)
    Vec phi(const Vec& u) const;
    /// C(∂a, P∂b) = η(D^g_{∂a} P∂b)
    Mat C(const Vec& u) const;
    Mat P(const Vec& u) const { return hyp_.screen_projection(u); }
    /// Quasi-orthonormal frame columns {ξ, W_1..W_n}.
    Mat frame(const Vec& u) const;

    DegenerateMetric structure() const;

    /// A member of the same class: f + f2.
    ConformalMember rescaled(const ScalarField& f2) const { return ConformalMember(hyp_, f_ + f2); }

private:
    LightlikeHypersurface hyp_;
    ScalarField f_;
    std::vector<ScalarField> df_;
    std::vector<ScalarField> ddf_;
};

/// Everything the closed-form curvature expressions need at one point.
/// Components are in M's chart; derivatives of tensors are D^g-covariant.
struct WeylPoint {
    Vec u;
    int n = 0;
    Mat g, g_tilde, g_bracket;
    Vec eta, xi;
    Mat P;
    Mat frame;
    Christoffel gamma_g, gamma_D;
    Vec theta;             // θ_g
    Mat dtheta;            // dθ(∂a, ∂b) = ½(∂a θ_b - ∂b θ_a)
    Mat D_theta;           // (D^g_{∂a} θ)(∂b)
    Vec theta_sharp;
    Mat D_theta_sharp;     // column a: D^g_{∂a} θ♯
    double theta_norm2 = 0; // |θ♯|²_g
    double delta_theta = 0; // div θ♯
    Mat D_eta; // (D^g_{∂a} η)(∂b)
    Vec phi;
    Mat C;
    Mat S;
    std::vector<Mat> DS; // DS[a](b, c) = (D^g_{∂a} S)(∂b, ∂c)
};

/// Pieces of (K(X,Y) - K(Y,X))(Z) for screen vectors X, Y, Z.
struct KHorizontalTerms {
    double curvature = 0;   // η(R̄(X,Y)Z)
    double theta_sharp = 0; // g(X,Z)C(Y,θ♯) - g(Y,Z)C(X,θ♯)
    double cc = 0;          // C(X,Z)C(ξ,Y) - C(Y,Z)C(ξ,X)
    double theta_c = 0;     // θ(Y)C(X,Z) - θ(X)C(Y,Z)

    /// The sum as printed in the source.
    double printed() const { return curvature + theta_sharp + cc + theta_c; }
    /// What the Codazzi equation of the screen gives under R = D_[X,Y] - [D_X, D_Y].
    double derived() const { return -curvature + theta_sharp; }
};

/// Which sign to use in front of the ξ-valued term of the curvature formula.
enum class KSign { Corrected, Literal };

/// The Weyl screen structure determined by (g, θ_g) through the connection
/// D = D^g + θ(X)Y + θ(Y)X - g(X,Y)θ♯ - S(X,Y)ξ.
class WeylStructure {
public:
    WeylStructure(ConformalMember member, TangentField theta0);

    const ConformalMember& member() const noexcept { return member_; }
    const TangentField& theta0() const noexcept { return theta0_; }
    int dim() const noexcept { return member_.dim(); }
    int n() const noexcept { return member_.n(); }

    /// Same D seen from g' = e^{-2 f2} g, with θ_{g'} = θ_g + d f2.
    WeylStructure rescaled(const ScalarField& f2) const { return WeylStructure(member_.rescaled(f2), theta0_); }

    Vec theta(const Vec& u) const;
    /// (a, b) = ∂_a θ_b
    Mat theta_jacobian(const Vec& u) const;
    Vec theta_sharp(const Vec& u) const;
    Mat S(const Vec& u) const;
    Christoffel connection(const Vec& u) const;

    WeylPoint evaluate(const Vec& u) const;

    /// R^D by differentiating the connection coefficients.
    Curvature curvature_direct(const Vec& u) const;
    /// R^g likewise.
    Curvature curvature_g(const Vec& u) const;

    /// Closed form of R^D from R^g, θ, S and φ.
    Curvature curvature_formula(const WeylPoint& w, const Curvature& Rg, KSign sign = KSign::Corrected) const;
    /// k(c, a, b) = (K(∂a,∂b) - K(∂b,∂a))(∂c)
    Christoffel K_antisymmetric(const WeylPoint& w) const;

    /// Ricci of R^D by the pseudo-inverse trace in the frame {ξ, W_i}.
    static Mat ricci_trace(const Curvature& R, const WeylPoint& w);
    /// Closed form of Ric^D from Ric^g.
    Mat ricci_formula(const WeylPoint& w, const Mat& ric_g) const;
    /// g^[αβ] Ric(X_α, X_β)
    static double scalar_trace(const Mat& ric, const WeylPoint& w);
    /// Closed form of Scal^D_g; differentiates i_ξ S around w.u.
    double scalar_formula(const WeylPoint& w, double scal_g) const;

    /// Terms the trace of the closed Ricci form produces beyond the closed
    /// scalar form: (n-1)η([ξ,θ♯]) - η([ξ,ω♯]) - 2φ(ω♯), with ω = i_ξ S.
    double scalar_missing_terms(const WeylPoint& w) const;

    /// Terms of the horizontal K antisymmetrization, evaluated on Z.
    /// `rescaled_ambient` carries e^{-2f̄} ḡ.
    KHorizontalTerms K_horizontal(const WeylPoint& w, const AmbientManifold& rescaled_ambient, const Vec& X,
                                  const Vec& Y, const Vec& Z) const;

    /// 𝒟(θ)(X, Y)
    Mat calD(const WeylPoint& w) const;

    /// |θ_g(ξ)| + |ξ(f)|
    double horizontality_residual(const Vec& u) const;

private:
    ConformalMember member_;
    TangentField theta0_;
};

/// The ambient metric e^{-2 fbar} ḡ.
AmbientManifold conformal_ambient(const AmbientManifold& amb, const ScalarField& fbar);

/// |f̄(x(u)) - f(u)| + |N(f̄)|
double extension_residual(const LightlikeHypersurface& hyp, const ScalarField& f, const ScalarField& fbar,
                          const Vec& u);

/// Least-squares Einstein-Weyl fit of Sym Ric^D = Λ g over screen components.
struct EinsteinWeylFit {
    double lambda = 0.0;   // Λ
    double residual = 0.0; // ‖Sym - Λ g‖ over the screen block
    double scale = 1.0;    // max(1, ‖Sym‖)
};

EinsteinWeylFit fit_einstein_weyl(const Mat& sym_ricci, const Mat& g, const Mat& screen);

/// Exterior derivative of a covector field: ½(∂a ω_b - ∂b ω_a).
Mat exterior_derivative(const TangentField& omega, const Vec& u);

} // namespace nullgeo
