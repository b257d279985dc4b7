#include "doctest.h"
#include "nullgeo/ambient.hpp"

#include <cmath>
#include <random>

using namespace nullgeo;

namespace {

std::vector<std::vector<ScalarField>> metric_of(const std::vector<std::vector<std::string>>& rows)
{
    int dim = static_cast<int>(rows.size());
    std::vector<std::vector<ScalarField>> m;
    for (const auto& r : rows)
        m.push_back(parse_all(r, dim));
    return m;
}

AmbientManifold minkowski4()
{
    return AmbientManifold(metric_of({{"-1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}}), 1);
}

// A generic curved Lorentzian metric in three coordinates.
AmbientManifold curved3()
{
    return AmbientManifold(metric_of({{"1+0.3*x1^2", "0.2*x1*x2", "0"},
                                      {"0.2*x1*x2", "1+0.1*sin(x0)", "0.2*x0"},
                                      {"0", "0.2*x0", "-1-0.1*x0^2"}}),
                           1);
}

// Numeric Koszul formula with plain central differences of the components.
Christoffel koszul_fd(const AmbientManifold& amb, const Vec& x)
{
    int d = amb.dim();
    std::vector<Mat> dg(static_cast<std::size_t>(d), Mat(d, d));
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                dg[static_cast<std::size_t>(c)](a, b) = amb.component(a, b).fd_partial(c, as_span(x));
    Mat ginv = amb.metric(x).inverse();
    Christoffel gam(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e)
                    gam(a, b, c) += 0.5 * ginv(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
    return gam;
}

// Parallel transport of v along the straight segment from x to x + s, by RK4.
Vec transport(const AmbientManifold& amb, Vec x, const Vec& s, Vec v, int steps)
{
    auto rhs = [&](const Vec& at, const Vec& w) -> Vec { return -amb.christoffel(at).contract(s, w); };
    double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        Vec k1 = rhs(x, v);
        Vec k2 = rhs(x + 0.5 * dt * s, v + 0.5 * dt * k1);
        Vec k3 = rhs(x + 0.5 * dt * s, v + 0.5 * dt * k2);
        Vec k4 = rhs(x + dt * s, v + dt * k3);
        v += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        x += dt * s;
    }
    return v;
}

} // namespace

TEST_CASE("flat metric has vanishing connection and curvature")
{
    auto amb = minkowski4();
    Vec x = Vec::Random(4);
    CHECK(amb.christoffel(x).max_abs() == 0.0);
    CHECK(amb.riemann(x, Vec::Random(4), Vec::Random(4), Vec::Random(4)).norm() == 0.0);
    CHECK_NOTHROW(amb.validate_at(x));
}

TEST_CASE("conformally flat metric matches the hand formula")
{
    // g = exp(-2 f) diag(-1,1,1,1), f = 0.3 x1 + 0.2 x0 x2
    std::string w = "exp(-2*(0.3*x1+0.2*x0*x2))";
    auto amb = AmbientManifold(metric_of({{"-" + w, "0", "0", "0"}, {"0", w, "0", "0"}, {"0", "0", w, "0"}, {"0", "0", "0", w}}), 1);
    auto f = ScalarField::parse("0.3*x1+0.2*x0*x2", 4);
    Vec x(4);
    x << 0.4, -0.2, 0.7, 1.1;
    Vec df(4);
    for (int a = 0; a < 4; ++a)
        df(a) = f.fd_partial(a, as_span(x));
    Mat g = amb.metric(x);
    Vec sharp = g.inverse() * df;
    Christoffel gam = amb.christoffel(x);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                double hand = -((a == b) * df(c) + (a == c) * df(b) - g(b, c) * sharp(a));
                CHECK(gam(a, b, c) == doctest::Approx(hand).epsilon(1e-8));
            }
    CHECK(amb.metricity_residual(x) < 1e-12);
}

TEST_CASE("off-diagonal metric matches numeric Koszul")
{
    auto amb = AmbientManifold(metric_of({{"1", "x1", "0"}, {"x1", "-1", "0"}, {"0", "0", "1"}}), 1);
    Vec x(3);
    x << 0.3, 0.5, -0.4;
    Christoffel exact = amb.christoffel(x);
    Christoffel fd = koszul_fd(amb, x);
    CHECK((exact - fd).max_abs() < 1e-8);
    CHECK(amb.metricity_residual(x) < 1e-12);
}

TEST_CASE("exact Christoffel partials agree with differences")
{
    auto amb = curved3();
    Vec x(3);
    x << 0.2, 0.6, -0.3;
    auto d = amb.christoffel_partials(x);
    for (int e = 0; e < 3; ++e) {
        Christoffel fd = partial([&](const Vec& y) { return amb.christoffel(y); }, x, e);
        CHECK((d[static_cast<std::size_t>(e)] - fd).max_abs() < 1e-8);
    }
}

TEST_CASE("curvature symmetries")
{
    auto amb = curved3();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int k = 0; k < 10; ++k) {
        Vec x(3), X(3), Y(3), Z(3);
        for (int i = 0; i < 3; ++i) {
            x(i) = u(rng);
            X(i) = u(rng);
            Y(i) = u(rng);
            Z(i) = u(rng);
        }
        CHECK(amb.riemann(x, X, X, Z).norm() < 1e-12);
        Vec xy = amb.riemann(x, X, Y, Z), yx = amb.riemann(x, Y, X, Z);
        CHECK((xy + yx).norm() < 1e-12);
        Vec bianchi = xy + amb.riemann(x, Y, Z, X) + amb.riemann(x, Z, X, Y);
        CHECK(bianchi.norm() <= 1e-6 * std::max(1.0, xy.norm()));
        // metric pair symmetry: g(R(X,Y)Z, W) = -g(R(X,Y)W, Z)
        Vec W = Vec::Constant(3, 0.3);
        Mat g = amb.metric(x);
        CHECK(std::abs(xy.dot(g * W) + amb.riemann(x, X, Y, W).dot(g * Z)) < 1e-12);
        Mat ric = amb.ricci(x);
        CHECK((ric - ric.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("holonomy of a small coordinate square")
{
    auto amb = curved3();
    Vec p(3);
    p << 0.25, 0.4, -0.15;
    double eps = 1e-3;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b)
                continue;
            Vec A = eps * Vec::Unit(3, a), B = eps * Vec::Unit(3, b);
            Vec Z(3);
            Z << 0.3, -0.8, 0.5;
            Vec x = p - 0.5 * (A + B);
            Vec v = transport(amb, x, A, Z, 8);
            v = transport(amb, x + A, B, v, 8);
            v = transport(amb, x + A + B, -A, v, 8);
            v = transport(amb, x + B, -B, v, 8);
            // First along A, then B: the defect is eps^2 R(A, B) Z in the R = -R_std convention.
            Vec expected = amb.riemann(p, A, B, Z);
            CHECK((v - Z - expected).norm() <= 1e-3 * expected.norm());
        }
}

TEST_CASE("round sphere has positive Ricci curvature")
{
    auto sphere = AmbientManifold(metric_of({{"1", "0"}, {"0", "sin(x0)^2"}}), 0);
    Vec x(2);
    x << 0.9, 0.1;
    Mat ric = sphere.ricci(x);
    CHECK((ric - sphere.metric(x)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sphere.scalar_curvature(x) == doctest::Approx(2.0));
}

TEST_CASE("validation rejects bad signatures")
{
    auto amb = AmbientManifold(metric_of({{"1", "0"}, {"0", "1"}}), 1);
    CHECK_THROWS_AS(amb.validate_at(Vec::Zero(2)), GeometryError);
    auto degen = AmbientManifold(metric_of({{"x0", "0"}, {"0", "1"}}), 0);
    CHECK_THROWS_AS(degen.validate_at(Vec::Zero(2)), GeometryError);
    CHECK_THROWS_AS(degen.christoffel(Vec::Zero(2)), NumericalError);
}

TEST_CASE("constant complex structure on flat space is parallel")
{
    auto amb = AmbientManifold(metric_of({{"-1", "0", "0", "0"}, {"0", "-1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}}), 2,
                               metric_of({{"0", "-1", "0", "0"}, {"1", "0", "0", "0"}, {"0", "0", "0", "-1"}, {"0", "0", "1", "0"}}));
    Vec x = Vec::Random(4);
    Mat j = amb.complex_structure(x);
    CHECK((j * j + Mat::Identity(4, 4)).norm() < 1e-14);
    Mat g = amb.metric(x);
    CHECK((j.transpose() * g * j - g).norm() < 1e-14);
    CHECK(amb.complex_structure_derivative(x, Vec::Random(4), Vec::Random(4)).norm() < 1e-14);
}
