#pragma once

#include "nullgeo/hypersurface.hpp"

namespace nullgeo {

/// Pointwise almost contact data of a lightlike real hypersurface in a Kaehler
/// ambient. Chart components unless marked _amb.
struct AlmostContactPack {
    Vec U;      // -J̄N
    Vec V;      // -J̄ξ
    Vec U_amb;
    Vec V_amb;
    Vec theta0; // θ0(X) = g(X, V)
    Mat F;      // tangent part of J̄X
    Mat sigma;  // X -> X - θ0(X) U
    Mat D0;     // basis of the almost complex distribution, one column per vector
};

/// Screen J̄(Rad TM) ⊕ J̄(tr TM) ⊥ D0, found by fixed-point iteration on N.
/// Requires a Kaehler ambient; the D0 basis is chosen from coordinate vectors
/// selected at u_ref.
std::vector<TangentField> complex_screen(const LightlikeHypersurface& base, const Vec& u_ref);

AlmostContactPack almost_contact(const LightlikeHypersurface& hyp, const Vec& u);

/// θ0 as a field.
TangentField almost_contact_form(const LightlikeHypersurface& hyp);

/// Pointwise residuals of the almost contact identities, maximized over the
/// coordinate basis and the given extra vectors.
struct AlmostContactResiduals {
    double isotropy = 0;       // |ḡ(U,U)| + |ḡ(V,V)|
    double theta0_U = 0;       // |θ0(U) - 1|
    double F_U = 0;            // ‖FU‖
    double theta0_sharp = 0;   // ‖θ0♯ - V‖
    double horizontal = 0;     // |θ0(ξ)|
    double decomposition = 0;  // ‖X - σX - θ0(X)U‖
    double J_split = 0;        // ‖J̄X - FX - θ0(X)N‖
    double F_sigma = 0;        // ‖J̄σX - FσX‖ (J̄σX is tangent and equals FX)
    double F_squared = 0;      // ‖F²X + X - θ0(X)U‖
    double screen_split = 0;   // J̄ξ, J̄N in S(TM), D0 ⊥ both and J̄-invariant
};

AlmostContactResiduals almost_contact_residuals(const LightlikeHypersurface& hyp, const Vec& u,
                                                const std::vector<Vec>& vectors = {});

/// Both sides of the four technical identities and the corollary on the
/// coordinate basis. Index convention: lhs_i(a, b) is the identity at X = ∂a, Y = ∂b;
/// second-rank vector identities are stored per X in columns.
struct TechnSides {
    Mat lhs_i, rhs_i;                 // (D_X θ0)(Y) vs θ0(Y)φ(X) - B(X,FY)
    std::vector<Mat> lhs_ii, rhs_ii;  // [a](·, b) = (D_{∂a} F)(∂b) vs θ0(∂b) A_N ∂a - B(∂a,∂b) U
    Vec lhs_iii, rhs_iii;             // φ(X) vs -θ0(D_X U)
    Mat lhs_iv, rhs_iv;               // column a: D_{∂a} θ0♯ vs F(A⋆_ξ ∂a) + φ(∂a) θ0♯
    Mat rhs_coro_i;                   // θ0(Y)φ(X)
    Mat rhs_coro_ii;                  // φ(X) θ0♯
    double max_B = 0;
};

TechnSides lemma_techn(const LightlikeHypersurface& hyp, const Vec& u);

/// ½(α∧β) with (α∧β)(X,Y) = α(X)β(Y) - α(Y)β(X).
Mat half_wedge(const Vec& alpha, const Vec& beta);

struct ClosednessResult {
    bool closed = false;          // max ‖dθ0‖ ≤ tol
    double max_d_theta0 = 0;
    double defect = 0;            // max ‖φ∧θ0‖ / max(1, |φ||θ0|)
    double dual_residual = 0;     // max ‖dθ0 - ½ φ∧θ0‖
    bool biconditional = false;   // closed ⇔ defect ≤ tol
};

ClosednessResult closedness(const LightlikeHypersurface& hyp, const std::vector<Vec>& grid, double tol);

} // namespace nullgeo
