#include "doctest.h"
#include "nullgeo/fixtures.hpp"
#include "nullgeo/geometry.hpp"
#include "nullgeo/kaehler.hpp"
#include "nullgeo/weyl.hpp"

#include <random>

using namespace nullgeo;

namespace {

Geometry fixture(const std::string& id) { return build_geometry(parse_spec(find_fixture(id)->spec)); }

std::vector<Vec> points(const Geometry& geo, int extra, std::size_t target = 20)
{
    auto all = sample_points(geo.spec.grid, extra);
    std::size_t uniform = all.size() - static_cast<std::size_t>(extra);
    std::size_t stride = std::max<std::size_t>(1, uniform / target);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < uniform; i += stride)
        out.push_back(all[i]);
    out.insert(out.end(), all.end() - extra, all.end());
    return out;
}

std::vector<Vec> random_vectors(int dim, int count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i)
            v(i) = d(rng);
        out.push_back(v);
    }
    return out;
}

Vec gradient(const ScalarField& f, const Vec& u)
{
    Vec g(u.size());
    for (int i = 0; i < u.size(); ++i)
        g(i) = f.exact_partial(i).eval(as_span(u));
    return g;
}

double max_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

const std::vector<std::string> kaehler_ids = {"kaehler_flat", "kaehler_flat_proportional", "kaehler_flat_generic",
                                              "kaehler_6d"};

} // namespace

TEST_CASE("almost contact structure from the complex screen")
{
    for (const auto& id : kaehler_ids) {
        INFO(id);
        auto geo = fixture(id);
        const auto& hyp = geo.hypersurface;
        auto vs = random_vectors(hyp.chart_dim(), 5, 11);
        for (const Vec& u : points(geo, 5)) {
            auto r = almost_contact_residuals(hyp, u, vs);
            CHECK(r.isotropy <= 1e-8);
            CHECK(r.theta0_U <= 1e-8);
            CHECK(r.F_U <= 1e-8);
            CHECK(r.theta0_sharp <= 1e-8);
            CHECK(r.horizontal <= 1e-8);
            CHECK(r.decomposition <= 1e-8);
            CHECK(r.J_split <= 1e-8);
            CHECK(r.F_sigma <= 1e-8);
            CHECK(r.F_squared <= 1e-8);
            CHECK(r.screen_split <= 1e-8);
        }
    }
}

TEST_CASE("complex screen spans the screen with a J-invariant complement")
{
    auto geo = fixture("kaehler_6d");
    Vec u = points(geo, 1).back();
    auto p = almost_contact(geo.hypersurface, u);
    AdaptedFrame f = geo.hypersurface.frame(u);
    CHECK(p.D0.cols() == 2);
    Mat W(f.jac.rows(), 4);
    W << p.U_amb, p.V_amb, f.jac * p.D0;
    // nondegenerate Gram on {J̄N, J̄ξ} ⊕ D0, and it has full screen rank
    Mat gram = W.transpose() * f.gbar * W;
    CHECK(numerical_rank(gram) == 4);
    CHECK(numerical_rank(f.g) == 4);

    auto flat = fixture("kaehler_flat");
    CHECK(almost_contact(flat.hypersurface, points(flat, 1).back()).D0.cols() == 0);
}

TEST_CASE("theta_g vanishes on the radical for horizontal conformal factors")
{
    for (const auto& id : kaehler_ids) {
        INFO(id);
        auto geo = fixture(id);
        TangentField theta0 = almost_contact_form(geo.hypersurface);
        for (const char* fs : {"0.1*x1^2", "0.2*sin(x2)"}) {
            ScalarField f = ScalarField::parse(fs, geo.hypersurface.chart_dim());
            for (const Vec& u : points(geo, 3, 8)) {
                Vec xi = geo.hypersurface.xi(u);
                // skip factors that are not horizontal at this chart
                if (std::abs(gradient(f, u).dot(xi)) > 1e-12)
                    continue;
                Vec theta_g = theta0(u) + gradient(f, u);
                CHECK(std::abs(theta_g.dot(xi)) <= 1e-8);
            }
        }
    }
}

TEST_CASE("technical lemma and its corollary")
{
    for (const auto& id : kaehler_ids) {
        INFO(id);
        auto geo = fixture(id);
        for (const Vec& u : points(geo, 3, 10)) {
            TechnSides s = lemma_techn(geo.hypersurface, u);
            double scale = std::max(1.0, s.lhs_i.cwiseAbs().maxCoeff());
            CHECK(max_diff(s.lhs_i, s.rhs_i) <= 1e-5 * scale);
            for (std::size_t a = 0; a < s.lhs_ii.size(); ++a)
                CHECK(max_diff(s.lhs_ii[a], s.rhs_ii[a]) <= 1e-5 * scale);
            CHECK(max_diff(s.lhs_iii, s.rhs_iii) <= 1e-5 * scale);
            CHECK(max_diff(s.lhs_iv, s.rhs_iv) <= 1e-5 * scale);
            // every Kaehler fixture is totally geodesic, so the corollary applies
            REQUIRE(s.max_B <= 1e-10);
            CHECK(max_diff(s.lhs_i, s.rhs_coro_i) <= 1e-5 * scale);
            CHECK(max_diff(s.lhs_iv, s.rhs_coro_ii) <= 1e-5 * scale);
        }
    }
}

TEST_CASE("closedness criterion")
{
    struct Expect {
        const char* id;
        bool closed;
    };
    for (auto [id, closed] : {Expect{"kaehler_flat", true}, Expect{"kaehler_flat_proportional", true},
                              Expect{"kaehler_flat_generic", false}, Expect{"kaehler_6d", false}}) {
        INFO(id);
        auto geo = fixture(id);
        auto r = closedness(geo.hypersurface, points(geo, 5), 1e-5);
        CHECK(r.closed == closed);
        CHECK(r.biconditional);
        CHECK(r.dual_residual <= 1e-5);
        if (!closed)
            CHECK(r.defect > 1e-2);
    }
}

TEST_CASE("phi vanishes on the flat fixture and is proportional to theta0 on the proportional one")
{
    auto flat = fixture("kaehler_flat");
    auto prop = fixture("kaehler_flat_proportional");
    TangentField th = almost_contact_form(prop.hypersurface);
    for (const Vec& u : points(flat, 3, 8))
        CHECK(flat.hypersurface.phi(u).norm() <= 1e-10);
    for (const Vec& u : points(prop, 3, 8)) {
        Vec phi = prop.hypersurface.phi(u), t = th(u);
        CHECK(half_wedge(phi, t).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(phi.norm() > 1e-3);
    }
}

TEST_CASE("exterior derivative antisymmetry and Leibniz rule")
{
    const int m = 3;
    std::vector<ScalarField> w = {ScalarField::parse("x1*x2", m), ScalarField::parse("sin(x0)+x2^2", m),
                                  ScalarField::parse("x0*x1^2", m)};
    ScalarField h = ScalarField::parse("1+0.3*x0*x2", m);
    TangentField omega = TangentField::from_exprs(w);
    TangentField h_omega = TangentField::from_exprs({h * w[0], h * w[1], h * w[2]});
    for (const Vec& u : random_vectors(m, 10, 5)) {
        Mat d = exterior_derivative(omega, u);
        CHECK(max_diff(d, -d.transpose()) <= 1e-12);
        Vec dh = gradient(h, u);
        Mat lhs = exterior_derivative(h_omega, u);
        Mat rhs = half_wedge(dh, omega(u)) + h.eval(as_span(u)) * d;
        CHECK(max_diff(lhs, rhs) <= 1e-6);
        // d(x1 dx0): (∂0 ω1 - ∂1 ω0)/2 with the ½ convention
        CHECK(d(0, 1) == doctest::Approx(0.5 * (std::cos(u(0)) - u(2))).epsilon(1e-7));
    }
}
