#pragma once

#include "nullgeo/ambient.hpp"
#include "nullgeo/expr.hpp"
#include "nullgeo/linalg.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace nullgeo {

/// A vector field on a chart, given by its components. The Jacobian is
/// exact for expression fields and numeric otherwise.
class TangentField {
public:
    using ValueFn = std::function<Vec(const Vec&)>;
    using JacobianFn = std::function<Mat(const Vec&)>;

    TangentField() = default;
    explicit TangentField(ValueFn value, JacobianFn jacobian = {})
        : value_(std::move(value)), jacobian_(std::move(jacobian))
    {
    }

    static TangentField from_exprs(std::vector<ScalarField> components);
    static TangentField constant(Vec v);

    Vec operator()(const Vec& u) const { return value_(u); }
    /// jac(c, a) = ∂_a X^c
    Mat jacobian(const Vec& u) const;
    explicit operator bool() const { return static_cast<bool>(value_); }

private:
    ValueFn value_;
    JacobianFn jacobian_;
};

/// [X, Y]^c = X^a ∂_a Y^c - Y^a ∂_a X^c
Vec lie_bracket(const TangentField& X, const TangentField& Y, const Vec& u);

/// The inclusion of the (n+1)-dimensional chart of M into the ambient chart.
class Embedding {
public:
    explicit Embedding(std::vector<ScalarField> components);

    int chart_dim() const noexcept { return m_; }
    int ambient_dim() const noexcept { return static_cast<int>(f_.size()); }

    Vec point(const Vec& u) const;
    /// (ambient_dim x chart_dim), column a is ∂_a of the embedding.
    Mat jacobian(const Vec& u) const;
    /// result[A](a, b) = ∂_a ∂_b of ambient component A.
    std::vector<Mat> hessian(const Vec& u) const;

    const std::vector<ScalarField>& components() const noexcept { return f_; }

private:
    int m_;
    std::vector<ScalarField> f_;
    std::vector<ScalarField> df_;  // [A][a]
    std::vector<ScalarField> ddf_; // [A][a][b]
};

/// Everything about the normalization at one point of M.
struct AdaptedFrame {
    Vec u;          // chart point on M
    Vec x;          // ambient point
    Mat jac;        // embedding Jacobian
    Mat gbar;       // ambient metric at x
    Mat g;          // induced metric
    Vec xi;         // radical generator, chart components
    Vec xi_amb;     // jac * xi
    Mat screen;     // chart components, one column per W_i
    Mat screen_amb; // jac * screen
    Vec N;          // transversal, ambient components
    Vec eta;        // η_a = ḡ(N, ∂_a)
};

/// Pointwise Gauss-Weingarten data, all in the coordinate basis of M.
/// Bilinear forms are stored as matrices F(a, b) = F(∂_a, ∂_b); operators
/// act on chart component vectors.
struct InducedObjects {
    Mat g;
    Vec eta;
    Vec xi;
    Christoffel connection; // ∇
    Mat B;                  // B(X, Y) = ḡ(∇̄_X Y, ξ)
    Mat C;                  // C(X, PY) = η(∇_X PY)
    Vec tau;                // τ(X) = ḡ(∇̄_X N, ξ)
    Vec phi;                // ∇_X ξ = -A⋆_ξ X + φ(X) ξ
    Mat A_N;                // ∇̄_X N = -A_N X + τ(X) N
    Mat A_star;             // A⋆_ξ
    Mat P;                  // projection onto the screen along ξ
};

/// A lightlike hypersurface with a chosen radical generator and screen.
class LightlikeHypersurface {
public:
    /// An empty `xi` selects the unit euclidean kernel vector of g at each point.
    /// The screen may be left empty to get a hypersurface on which only
    /// screen-independent quantities (g, ξ, B) are available.
    LightlikeHypersurface(AmbientManifold ambient, Embedding embedding, std::optional<TangentField> xi,
                          std::vector<TangentField> screen);

    LightlikeHypersurface with_screen(std::vector<TangentField> screen) const;

    const AmbientManifold& ambient() const noexcept { return amb_; }
    const Embedding& embedding() const noexcept { return emb_; }
    int chart_dim() const noexcept { return emb_.chart_dim(); }
    /// Screen rank n.
    int n() const noexcept { return emb_.chart_dim() - 1; }
    bool has_screen() const noexcept { return !screen_.empty(); }
    const std::vector<TangentField>& screen_fields() const noexcept { return screen_; }
    /// ξ as a field, user-supplied or kernel-based.
    const TangentField& xi_field() const noexcept { return xi_; }

    /// Pullback metric; throws NotLightlikeError unless the rank is exactly n.
    Mat induced_metric(const Vec& u) const;
    /// Exact partials of g: result[a](b, c) = ∂_a g_bc.
    std::vector<Mat> induced_metric_partials(const Vec& u) const;
    Vec xi(const Vec& u) const { return xi_(u); }
    Mat screen(const Vec& u) const;
    Vec transversal(const Vec& u) const;
    Vec eta(const Vec& u) const;
    AdaptedFrame frame(const Vec& u) const;

    /// Split an ambient vector v = jac * c + beta * N; returns (c, beta).
    std::pair<Vec, double> decompose(const AdaptedFrame& f, const Vec& v) const;

    Christoffel connection(const Vec& u) const;
    Mat second_fundamental_form(const Vec& u) const;
    /// ∇̄_X N in ambient components.
    Vec ambient_derivative_N(const Vec& u, const Vec& X) const;
    /// ∇_X Y for a field Y.
    Vec covariant_derivative(const Vec& u, const Vec& X, const TangentField& Y) const;
    Vec tau(const Vec& u) const;
    Vec phi(const Vec& u) const;
    Mat shape_operator_N(const Vec& u) const;
    Mat shape_operator_xi(const Vec& u) const;
    /// C from η(∇_X PY) in coordinates.
    Mat screen_form_C(const Vec& u) const;
    Mat screen_projection(const Vec& u) const;

    InducedObjects induced(const Vec& u) const;

    /// max_{i<j} |η([W_i, W_j])|.
    double screen_integrability_residual(const Vec& u) const;

private:
    AmbientManifold amb_;
    Embedding emb_;
    TangentField xi_;
    bool xi_given_ = false;
    std::vector<TangentField> screen_;
};

/// Unit kernel vector of a rank-n Gram matrix, first nonzero component positive.
Vec radical_generator(const Mat& g, double rank_tol = 1e-9);

/// Solve the normalization conditions for N; throws GeometryError on a degenerate screen.
Vec solve_transversal(const Mat& gbar, const Vec& xi_amb, const Mat& screen_amb);

/// Non-canonical convenience screen: drop the coordinate direction where ξ is
/// largest at u_ref and orthonormalize the remaining coordinate vectors with
/// respect to g by Gram-Schmidt.
std::vector<TangentField> gram_schmidt_screen(const LightlikeHypersurface& base, const Vec& u_ref);

struct TotallyGeodesicResult {
    bool totally_geodesic = false;
    double max_B = 0.0;
    /// max |(∇_X g)(Y, Z)| over the grid, only required to vanish when B does.
    double max_metricity = 0.0;
};

TotallyGeodesicResult check_totally_geodesic(const LightlikeHypersurface& hyp, const std::vector<Vec>& grid,
                                             double tol);

} // namespace nullgeo
