#include "oracles.hpp"

#include "toda/pde.hpp"

#include <doctest.h>

using namespace toda;

namespace {

double max_error(const ScalarField& w, const std::function<double(double, double)>& exact) {
    double e = 0.0;
    for (int i = 0; i < w.grid.na; ++i)
        for (int j = 0; j < w.grid.nb; ++j) e = std::max(e, std::abs(w(i, j) - exact(w.grid.a(i), w.grid.b(j))));
    return e;
}

double elliptic_manufactured_error(Tag tag, int n) {
    const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, n, n);
    auto exact = [](double x, double y) { return 0.1 * std::sin(M_PI * x) * std::sin(M_PI * y); };
    ScalarField forcing(g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = exact(g.a(i), g.b(j));
            forcing(i, j) = -oracle::lhs(tag, w, 0.25 * (-2.0 * M_PI * M_PI * w), 1.0, 1.0);
        }
    const EllipticResult r = solve_elliptic(make_geometry(tag), constant_sampler(1.0), ScalarField(g, 0.0), forcing);
    return max_error(r.omega, exact);
}

double hyperbolic_manufactured_error(int n, bool bilinear) {
    const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, n, n);
    auto exact = [bilinear](double u, double v) {
        return bilinear ? 0.1 * u * v : 0.1 * std::sin(M_PI * u) * std::sin(M_PI * v);
    };
    auto mixed = [bilinear](double u, double v) {
        return bilinear ? 0.1 : 0.1 * M_PI * M_PI * std::cos(M_PI * u) * std::cos(M_PI * v);
    };
    // omega_uv = e^w - QR e^{-2w} - f
    RealForcing f = [&](double u, double v) {
        const double w = exact(u, v);
        return std::exp(w) - std::exp(-2.0 * w) - mixed(u, v);
    };
    const HyperbolicResult r = solve_hyperbolic(make_geometry(Tag::AffIndef), constant_sampler(1.0),
                                                constant_sampler(1.0), zero_goursat(g), g, f);
    return max_error(r.omega, exact);
}

}  // namespace

TEST_SUITE("pde") {
    TEST_CASE("elliptic trivial solution") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 17, 17);
        const EllipticResult r = solve_elliptic(make_geometry(Tag::CP2), constant_sampler(1.0), ScalarField(g, 0.0));
        CHECK(r.iterations <= 3);
        CHECK(max_error(r.omega, [](double, double) { return 0.0; }) == 0.0);
    }

    TEST_CASE("elliptic solutions carry an independent certificate") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 33, 33);
        for (Tag t : {Tag::CP2, Tag::CH2, Tag::AffDefEll, Tag::AffDefHyp}) {
            const GeometrySpec geom = make_geometry(t);
            const Sampler Q = constant_sampler(0.5);
            const EllipticResult r = solve_elliptic(geom, Q, ScalarField(g, 0.0));
            CHECK(r.certificate < 1e-10);
            const ScalarField res = tzitzeica_residual(geom, r.omega, Q, conj_sampler(Q));
            double m = 0.0;
            for (int i = 1; i < 32; ++i)
                for (int j = 1; j < 32; ++j) m = std::max(m, std::abs(res(i, j)));
            CHECK(m < 1e-10);
            for (int k = 0; k < 33; ++k) {
                CHECK(r.omega(0, k) == 0.0);
                CHECK(r.omega(32, k) == 0.0);
            }
        }
    }

    TEST_CASE("elliptic manufactured solution converges at second order") {
        for (Tag t : {Tag::CP2, Tag::AffDefHyp}) {
            const double e1 = elliptic_manufactured_error(t, 17), e2 = elliptic_manufactured_error(t, 33),
                         e3 = elliptic_manufactured_error(t, 65);
            CHECK(std::log2(e1 / e2) > 1.9);
            CHECK(std::log2(e2 / e3) > 1.9);
        }
    }

    TEST_CASE("Newton converges quadratically near the trivial root") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 33, 33);
        const EllipticResult r = solve_elliptic(make_geometry(Tag::CP2), constant_sampler(1.0), ScalarField(g, 0.2));
        REQUIRE(r.history.size() >= 3);
        const std::size_t k = r.history.size() - 2;
        CHECK(r.history[k + 1] < 10.0 * r.history[k] * r.history[k]);
    }

    TEST_CASE("Newton failure reports its history") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 33, 33);
        try {
            solve_elliptic(make_geometry(Tag::CP2), constant_sampler(1.0), ScalarField(g, 1.0));
            FAIL("expected NoConvergence");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoConvergence);
            CHECK(e.history.size() > 3);
        }
        EllipticOptions o;
        o.max_iterations = 1;
        CHECK_THROWS_AS(solve_elliptic(make_geometry(Tag::CP2), constant_sampler(1.0), ScalarField(g, 0.2),
                                       std::nullopt, o),
                        Error);
    }

    TEST_CASE("hyperbolic trivial and constant solutions") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 33, 33);
        const HyperbolicResult r = solve_hyperbolic(make_geometry(Tag::AffIndef), constant_sampler(1.0),
                                                    constant_sampler(1.0), zero_goursat(g), g);
        CHECK(max_error(r.omega, [](double, double) { return 0.0; }) == 0.0);
        const HyperbolicResult c = solve_hyperbolic(make_geometry(Tag::CH21), constant_sampler(cd(0, 1)),
                                                    constant_sampler(cd(0, -1)), zero_goursat(g), g);
        CHECK(max_error(c.omega, [](double, double) { return 0.0; }) < 1e-14);
        CHECK(c.certificate < 1e-10);
        CHECK_THROWS_AS(solve_hyperbolic(make_geometry(Tag::CH21), constant_sampler(1.0), constant_sampler(1.0),
                                         zero_goursat(g), g),
                        Error);
    }

    TEST_CASE("hyperbolic manufactured solutions") {
        CHECK(hyperbolic_manufactured_error(33, true) < 1e-13);
        const double e1 = hyperbolic_manufactured_error(17, false), e2 = hyperbolic_manufactured_error(33, false),
                     e3 = hyperbolic_manufactured_error(65, false);
        CHECK(std::log2(e1 / e2) > 1.9);
        CHECK(std::log2(e2 / e3) > 1.9);
    }

    TEST_CASE("hyperbolic blowup guard") {
        const Grid g = make_grid(0.0, 0.0, 2.0, 2.0, 33, 33);
        GoursatData d;
        d.u_axis.assign(33, 3.0);
        d.v_axis.assign(33, 3.0);
        try {
            solve_hyperbolic(make_geometry(Tag::AffIndef), constant_sampler(0.0), constant_sampler(0.0), d, g);
            FAIL("expected Blowup");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Blowup);
            CHECK(!e.indices.empty());
        }
    }

    TEST_CASE("hyperbolic data validation") {
        const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, 9, 9);
        GoursatData d = zero_goursat(g);
        d.u_axis.pop_back();
        CHECK_THROWS_AS(solve_hyperbolic(make_geometry(Tag::AffIndef), constant_sampler(1.0), constant_sampler(1.0), d, g),
                        Error);
        d = zero_goursat(g);
        d.v_axis[0] = 0.5;
        CHECK_THROWS_AS(solve_hyperbolic(make_geometry(Tag::AffIndef), constant_sampler(1.0), constant_sampler(1.0), d, g),
                        Error);
    }

    TEST_CASE("hyperbolic march is schedule independent") {
        const Grid g = make_grid(0.0, 0.0, 0.5, 0.5, 65, 65);
        GoursatData d;
        for (int i = 0; i < 65; ++i) d.u_axis.push_back(0.2 * std::sin(g.a(i)));
        for (int j = 0; j < 65; ++j) d.v_axis.push_back(0.1 * g.b(j) * g.b(j));
        const GeometrySpec geom = make_geometry(Tag::AffIndef);
        const auto s = solve_hyperbolic(geom, constant_sampler(0.5), constant_sampler(0.5), d, g, nullptr, {}, Exec::Serial);
        const auto p = solve_hyperbolic(geom, constant_sampler(0.5), constant_sampler(0.5), d, g, nullptr, {}, Exec::Parallel);
        CHECK(s.omega.values == p.omega.values);
    }
}
