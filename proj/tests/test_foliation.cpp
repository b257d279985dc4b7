#include "doctest.h"
#include "nullgeo/fixtures.hpp"
#include "nullgeo/foliation.hpp"

using namespace nullgeo;

namespace {

Geometry fixture(const std::string& id) { return build_geometry(parse_spec(find_fixture(id)->spec)); }

WeylStructure weyl_of(const Geometry& geo) { return WeylStructure(ConformalMember(geo.hypersurface, geo.f), geo.theta0); }

std::vector<Vec> thin(std::vector<Vec> pts, std::size_t target)
{
    std::size_t stride = std::max<std::size_t>(1, pts.size() / target);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < pts.size(); i += stride)
        out.push_back(pts[i]);
    return out;
}

const std::vector<std::string> umbilic_ids = {"null_hyperplane", "umbilic_foliation", "umbilic_foliation_6d"};

} // namespace

TEST_CASE("umbilical detection")
{
    SUBCASE("totally geodesic screen")
    {
        auto geo = fixture("null_hyperplane");
        auto det = detect_umbilical(ConformalMember(geo.hypersurface, geo.f), sample_points(geo.spec.grid, 0), 1e-6);
        CHECK(det.umbilical);
        for (double l : det.lambda)
            CHECK(l == doctest::Approx(0.0));
    }
    SUBCASE("tilted screen: lambda is the component ratio")
    {
        auto geo = fixture("umbilic_foliation");
        ConformalMember cm(geo.hypersurface, geo.f);
        auto pts = sample_points(geo.spec.grid, 5);
        auto det = detect_umbilical(cm, pts, 1e-6);
        CHECK(det.umbilical);
        CHECK(det.max_xi_row < 1e-8);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Mat W = cm.hypersurface().screen(pts[i]);
            Vec w1 = W.col(0);
            double ratio = w1.dot(cm.C(pts[i]) * w1) / w1.dot(cm.g(pts[i]) * w1);
            CHECK(det.lambda[i] == doctest::Approx(ratio).epsilon(1e-9));
        }
    }
    SUBCASE("horizontal conformal factor leaves the screen block alone")
    {
        auto geo = fixture("null_hyperplane_conformal");
        ConformalMember cm(geo.hypersurface, geo.f);
        auto det = detect_umbilical(cm, sample_points(geo.spec.grid, 0), 1e-6);
        CHECK(det.umbilical);
        // C(ξ, W) = -df(W) does not vanish when f is not constant
        CHECK(det.max_xi_row > 1e-2);
    }
    SUBCASE("anisotropic screen form is rejected")
    {
        auto geo = fixture("null_wave");
        auto det = detect_umbilical(ConformalMember(geo.hypersurface, geo.f), sample_points(geo.spec.grid, 0), 1e-6);
        CHECK_FALSE(det.umbilical);
        CHECK(det.max_residual > 1e-2);
    }
}

TEST_CASE("S and its derivative on umbilical screens")
{
    for (const auto& id : umbilic_ids) {
        INFO(id);
        auto geo = fixture(id);
        WeylStructure D = weyl_of(geo);
        const ConformalMember& cm = D.member();
        for (const Vec& u : thin(sample_points(geo.spec.grid, 3), 12)) {
            WeylPoint w = D.evaluate(u);
            double lambda = umbilical_lambda(cm, u);
            Vec dl = umbilical_lambda_gradient(cm, u);
            // S = λ g + η ⊗ θ + θ ⊗ η and S(ξ, ·) = θ
            Mat S51 = lambda * w.g + w.eta * w.theta.transpose() + w.theta * w.eta.transpose();
            CHECK((w.S - S51).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((w.S * w.xi - w.theta).cwiseAbs().maxCoeff() < 1e-8);
            auto pred = umbilical_DS(w, dl);
            double scale = 1.0;
            for (const Mat& m : w.DS)
                scale = std::max(scale, m.cwiseAbs().maxCoeff());
            for (int c = 0; c < D.dim(); ++c)
                CHECK((pred[static_cast<std::size_t>(c)] - w.DS[static_cast<std::size_t>(c)]).cwiseAbs().maxCoeff() / scale < 1e-5);
            Mat ds_xi(D.dim(), D.dim());
            for (int a = 0; a < D.dim(); ++a)
                ds_xi.row(a) = (w.xi.transpose() * w.DS[static_cast<std::size_t>(a)]);
            CHECK((ds_xi - umbilical_DS_xi(w)).cwiseAbs().maxCoeff() / scale < 1e-5);
            Mat D_xi_S = Mat::Zero(D.dim(), D.dim());
            for (int e = 0; e < D.dim(); ++e)
                D_xi_S += w.xi(e) * w.DS[static_cast<std::size_t>(e)];
            CHECK((D_xi_S - umbilical_D_xi_S(w, dl)).cwiseAbs().maxCoeff() / scale < 1e-5);
        }
    }
}

TEST_CASE("Einstein-Weyl umbilical facts")
{
    for (const auto& id : umbilic_ids) {
        INFO(id);
        auto geo = fixture(id);
        WeylStructure D = weyl_of(geo);
        const ConformalMember& cm = D.member();
        for (const Vec& u : thin(sample_points(geo.spec.grid, 2), 8)) {
            WeylPoint w = D.evaluate(u);
            double xl = umbilical_lambda_gradient(cm, u).dot(w.xi);
            Curvature Rd = D.curvature_direct(u);
            Mat ric_g = D.curvature_g(u).ricci();
            Mat ric_d = WeylStructure::ricci_trace(Rd, w);
            EinsteinWeylFit fit = fit_einstein_weyl(ric_d + ric_d.transpose(), w.g, cm.hypersurface().screen(u));
            REQUIRE(fit.residual < 1e-6 * fit.scale);
            CHECK(D_xi_theta(w).cwiseAbs().maxCoeff() < 1e-6);
            double scale = std::max(1.0, ric_d.cwiseAbs().maxCoeff());
            CHECK((ric_d - umbilical_ricci(w, ric_g, xl)).cwiseAbs().maxCoeff() / scale < 1e-4);
            double sc_d = WeylStructure::scalar_trace(ric_d, w);
            CHECK(scaled_diff(sc_d, umbilical_scalar(w, WeylStructure::scalar_trace(ric_g, w), xl)) < 1e-4);
        }
    }
}

TEST_CASE("leaf restriction")
{
    for (const auto& id : umbilic_ids) {
        INFO(id);
        auto geo = fixture(id);
        REQUIRE(geo.spec.leaf);
        WeylStructure D = weyl_of(geo);
        for (double value : geo.spec.leaf->values) {
            Leaf leaf(D, geo.spec.leaf->coordinate, value);
            CHECK(leaf.dim() == D.n());
            for (const Vec& y : thin(leaf.sample(geo.spec.grid, 2), 8)) {
                Vec u = leaf.chart_point(y);
                CHECK((leaf.leaf_point(u) - y).norm() == 0.0);
                CHECK(leaf.screen_tangency_residual(y) < 1e-10);
                CHECK((leaf.g(y) - leaf.restrict_form(D.member().g(u))).cwiseAbs().maxCoeff() < 1e-10);
                CHECK(leaf.metric().metricity_residual(y) < 1e-8);
                Eigen::SelfAdjointEigenSolver<Mat> es(leaf.g(y));
                CHECK(es.eigenvalues().minCoeff() > 0.0);
                Christoffel wc = leaf.weyl_connection(y);
                for (int a = 0; a < leaf.dim(); ++a)
                    for (int b = 0; b < leaf.dim(); ++b)
                        for (int c = 0; c < leaf.dim(); ++c)
                            CHECK(wc(c, a, b) == doctest::Approx(wc(c, b, a)));

                WeylPoint w = D.evaluate(u);
                Mat ric_g = D.curvature_g(u).ricci();
                Mat ric_leaf = leaf.metric().ricci(y);
                double scale = std::max(1.0, ric_leaf.cwiseAbs().maxCoeff());
                CHECK((leaf.restrict_form(ric_g) - ric_leaf).cwiseAbs().maxCoeff() / scale < 1e-4);
                CHECK(scaled_diff(WeylStructure::scalar_trace(ric_g, w), leaf.metric().scalar_curvature(y)) < 1e-4);
                CHECK((leaf.restrict_form(w.D_theta) - leaf.theta_covariant(y)).cwiseAbs().maxCoeff() < 1e-6);

                // the leaf Weyl structure is Einstein-Weyl and its scalar obeys the
                // Riemannian formula with the codifferential δ = -div
                Mat ric_dl = leaf.weyl_ricci(y);
                Mat gl = leaf.g(y);
                EinsteinWeylFit fit_l = fit_einstein_weyl(ric_dl + ric_dl.transpose(), gl, Mat::Identity(leaf.dim(), leaf.dim()));
                CHECK(fit_l.residual < 1e-6 * fit_l.scale);
                const double n = leaf.dim();
                Vec ts = leaf.theta_sharp(y);
                double sc70 = leaf.metric().scalar_curvature(y) - 2.0 * (n - 1) * leaf.div_theta_sharp(y) -
                              (n - 1) * (n - 2) * ts.dot(gl * ts);
                CHECK(scaled_diff(leaf.weyl_scalar(y), sc70) < 1e-4);
            }
        }
    }
}

TEST_CASE("leaf coordinate out of range")
{
    auto geo = fixture("null_hyperplane");
    CHECK_THROWS_AS(Leaf(weyl_of(geo), 3, 0.0), GeometryError);
}
