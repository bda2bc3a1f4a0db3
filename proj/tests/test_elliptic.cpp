#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpat/calculus.hpp"
#include "qpat/elliptic.hpp"
#include "qpat/errors.hpp"
#include "support.hpp"

using namespace qpat;
using qpat::testing::Gen;
using std::numbers::pi;

namespace {

EllipticProblem laplace(const Grid& g, double D, double sigma, const BoundaryTrace& data) {
    return make_problem(ScalarField(g, D), ScalarField(g, sigma), ScalarField(g, 0.0), data);
}

double l2_error(const ScalarField& u, const ScalarField& exact) {
    ScalarField d = u;
    for (std::size_t p = 0; p < d.size(); ++p) d[p] -= exact[p];
    return interior_l2_norm(d);
}

// u* = sin(pi x) sin(pi y) + 2, D* = 1 + x^2 / 2, sigma* = 1, f* = -div(D* grad u*) + u*
double manufactured_error(int n) {
    const Grid g = build_grid(2, n);
    auto exact_fn = [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) + 2.0; };
    auto source_fn = [](const Point& x) {
        const double s = std::sin(pi * x[0]) * std::sin(pi * x[1]);
        const double D = 1.0 + 0.5 * x[0] * x[0];
        const double ux = pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
        return D * 2.0 * pi * pi * s - x[0] * ux + (s + 2.0);
    };
    const auto p = make_problem(sample(g, [](const Point& x) { return 1.0 + 0.5 * x[0] * x[0]; }), ScalarField(g, 1.0),
                                sample(g, source_fn), sample_boundary(g, exact_fn));
    return l2_error(solve(p), sample(g, exact_fn));
}

double cosh_error(int n) {
    const Grid g = build_grid(2, n);
    auto exact_fn = [](const Point& x) { return std::cosh(x[0] - 0.5) / std::cosh(0.5); };
    const ScalarField exact = sample(g, exact_fn);
    return l2_error(solve(laplace(g, 1.0, 1.0, sample_boundary(g, exact_fn))), exact) / interior_l2_norm(exact);
}

}  // namespace

TEST_CASE("assemble: unit diffusion gives the 5-point Laplacian") {
    const Grid g = build_grid(2, 17);
    const double h2 = g.h() * g.h();
    const auto sys = assemble(laplace(g, 1.0, 0.0, BoundaryTrace(g, 0.0)));
    const std::size_t c = g.index(8, 8);
    CHECK(sys.entry(c, c) == doctest::Approx(4.0 / h2).epsilon(1e-14));
    for (std::size_t q : {g.index(7, 8), g.index(9, 8), g.index(8, 7), g.index(8, 9)})
        CHECK(sys.entry(c, q) == doctest::Approx(-1.0 / h2).epsilon(1e-14));
    CHECK(sys.entry(c, g.index(9, 9)) == 0.0);
    CHECK(sys.unknown_nodes.size() == 15u * 15u);

    const auto shifted = assemble(laplace(g, 1.0, 1.0, BoundaryTrace(g, 0.0)));
    CHECK(shifted.entry(c, c) == doctest::Approx(4.0 / h2 + 1.0).epsilon(1e-14));
    CHECK(shifted.entry(c, g.index(7, 8)) == sys.entry(c, g.index(7, 8)));
}

TEST_CASE("assemble: 3D gives the 7-point Laplacian") {
    const Grid g = build_grid(3, 17);
    const double h2 = g.h() * g.h();
    const auto sys = assemble(laplace(g, 1.0, 0.0, BoundaryTrace(g, 0.0)));
    const std::size_t c = g.index(8, 8, 8);
    CHECK(sys.entry(c, c) == doctest::Approx(6.0 / h2).epsilon(1e-14));
    CHECK(sys.entry(c, g.index(8, 8, 9)) == doctest::Approx(-1.0 / h2).epsilon(1e-14));
}

TEST_CASE("harmonic face value on a checkerboard") {
    CHECK(face_coefficient(1.0, 4.0, FluxAverage::harmonic) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(face_coefficient(1.0, 4.0, FluxAverage::arithmetic) == doctest::Approx(2.5).epsilon(1e-15));
    const Grid g = build_grid(2, 17);
    ScalarField D(g);
    for (std::size_t p = 0; p < D.size(); ++p) {
        const auto ij = g.coords(p);
        D[p] = (ij[0] + ij[1]) % 2 ? 4.0 : 1.0;
    }
    const auto sys = assemble(make_problem(D, ScalarField(g, 0.0), ScalarField(g, 0.0), BoundaryTrace(g, 0.0)));
    const double h2 = g.h() * g.h();
    const std::size_t c = g.index(8, 8);
    CHECK(sys.entry(c, g.index(9, 8)) == doctest::Approx(-1.6 / h2).epsilon(1e-14));
    CHECK(sys.entry(c, c) == doctest::Approx(4.0 * 1.6 / h2).epsilon(1e-14));
}

TEST_CASE("solve is exact on affine harmonic data") {
    for (int dim : {2, 3}) {
        const Grid g = build_grid(dim, dim == 2 ? 33 : 17);
        auto fn = [](const Point& x) { return 2.0 * x[0] + 3.0 * x[1] - 1.0 + (x[2] != 0.0 ? 0.5 * x[2] : 0.0); };
        const ScalarField u = solve(laplace(g, 1.0, 0.0, sample_boundary(g, fn)));
        CHECK(l2_error(u, sample(g, fn)) < 1e-9);
    }
}

TEST_CASE("cosh profile is matched to second order") {
    // oracle: u'' = u with u(0) = u(1) = 1 solved by cosh(x - 1/2) / cosh(1/2)
    const double e33 = cosh_error(33), e65 = cosh_error(65);
    CHECK(e65 < 1e-4);
    CHECK(e33 / e65 > 3.6);
    CHECK(e33 / e65 < 4.4);
}

TEST_CASE("manufactured solution converges at second order") {
    const double e65 = manufactured_error(65), e129 = manufactured_error(129);
    const double ratio = e65 / e129;
    CHECK(ratio > 3.7);
    CHECK(ratio < 4.3);
}

TEST_CASE("residual of the discrete solution is within the solver contract") {
    Gen gen(5);
    const Grid g = build_grid(2, 33);
    const auto p = make_problem(gen.smooth_positive(g, 1.0, 0.4), gen.smooth_positive(g, 0.5, 0.3),
                                ScalarField(g, 0.0), gen.trace(g, 0.5, 2.0));
    SolverConfig cfg;
    const ScalarField u = solve(p, cfg);
    CHECK(residual(p, u) <= 10.0 * cfg.rel_tol);
    ScalarField bumped = u;
    bumped[g.index(10, 12)] += 1e-3;
    CHECK(residual(p, bumped) > 0.0);
    CHECK(residual(p, bumped) > 100.0 * residual(p, u));
}

TEST_CASE("solver errors") {
    const Grid g = build_grid(2, 17);
    auto p = laplace(g, 1.0, 0.0, BoundaryTrace(g, 1.0));
    p.diffusion[g.index(4, 4)] = 0.0;
    CHECK_THROWS_AS(solve(p), CoefficientError);
    CHECK_THROWS_AS(solve(make_problem(ScalarField(g, 1.0), ScalarField(g, -1.0), ScalarField(g), BoundaryTrace(g))),
                    CoefficientError);
    SolverConfig bad;
    bad.rel_tol = 1e-2;
    CHECK_THROWS_AS(solve(laplace(g, 1.0, 0.0, BoundaryTrace(g, 1.0)), bad), ParameterError);
    SolverConfig starved;
    starved.max_iter = 2;
    Gen gen(3);
    try {
        solve(laplace(g, 1.0, 0.0, gen.trace(g, 0.0, 1.0)), starved);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.final_residual() > starved.rel_tol);
    }
}

TEST_CASE("jacobi preconditioning and arithmetic fluxes solve the same kind of problem") {
    Gen gen(8);
    const Grid g = build_grid(2, 33);
    const auto p = make_problem(gen.smooth_positive(g, 1.0, 0.5), ScalarField(g, 0.2), ScalarField(g, 0.0),
                                gen.trace(g, 0.5, 1.5));
    SolverConfig plain, jac;
    jac.jacobi = true;
    const auto a = solve_detailed(p, plain), b = solve_detailed(p, jac);
    CHECK(l2_error(a.u, b.u) < 1e-8);
    SolverConfig arith;
    arith.flux_average = FluxAverage::arithmetic;
    const auto c = solve(p, arith);
    CHECK(residual(p, c, FluxAverage::arithmetic) <= 10.0 * arith.rel_tol);
}

TEST_CASE("property: discrete maximum principle") {
    Gen gen(101);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = trial % 4 == 3 ? 3 : 2;
        const Grid g = build_grid(dim, dim == 2 ? 33 : 17);
        const ScalarField D = gen.smooth_positive(g, gen.uniform(0.5, 2.0), 0.4);
        const BoundaryTrace data = gen.trace(g, 0.1, 3.0);
        double lo = 1e300, hi = -1e300;
        for (double v : data.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        SolverConfig cfg;
        cfg.rel_tol = 1e-12;
        const ScalarField u0 = solve(make_problem(D, ScalarField(g, 0.0), ScalarField(g, 0.0), data), cfg);
        for (double v : u0.values) {
            CHECK(v >= lo - 1e-9);
            CHECK(v <= hi + 1e-9);
        }
        const ScalarField u1 = solve(make_problem(D, gen.smooth_positive(g, 1.0, 0.5), ScalarField(g, 0.0), data), cfg);
        for (double v : u1.values) {
            CHECK(v > 0.0);
            CHECK(v <= hi + 1e-9);
        }
    }
}

TEST_CASE("property: mirrored inputs give the mirrored solution") {
    Gen gen(77);
    for (int trial = 0; trial < 5; ++trial) {
        const Grid g = build_grid(2, 33);
        const ScalarField D = gen.smooth_positive(g, 1.0, 0.5);
        const ScalarField S = gen.smooth_positive(g, 0.5, 0.3);
        const BoundaryTrace data = gen.trace(g, 0.5, 2.0);
        auto mirror = [&](const ScalarField& f) {
            ScalarField m(g);
            for (std::size_t p = 0; p < f.size(); ++p) {
                const auto ij = g.coords(p);
                m[p] = f[g.index(g.n() - 1 - ij[0], ij[1])];
            }
            return m;
        };
        BoundaryTrace mdata(g);
        const auto nodes = g.boundary_nodes();
        for (std::size_t m = 0; m < nodes.size(); ++m) {
            const auto ij = g.coords(nodes[m]);
            mdata[m] = data[static_cast<std::size_t>(g.trace_position(g.index(g.n() - 1 - ij[0], ij[1])))];
        }
        SolverConfig cfg;
        cfg.rel_tol = 1e-14;
        const ScalarField u = solve(make_problem(D, S, ScalarField(g), data), cfg);
        const ScalarField v = solve(make_problem(mirror(D), mirror(S), ScalarField(g), mdata), cfg);
        const ScalarField mu = mirror(u);
        double worst = 0.0;
        for (std::size_t p = 0; p < u.size(); ++p) worst = std::max(worst, std::abs(mu[p] - v[p]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("property: solves are bitwise deterministic") {
    Gen gen(9);
    const Grid g = build_grid(3, 17);
    const auto p = make_problem(gen.smooth_positive(g, 1.0, 0.5), ScalarField(g, 0.3), ScalarField(g), gen.trace(g, 1.0, 2.0));
    const auto a = solve_detailed(p), b = solve_detailed(p);
    CHECK(a.u.values == b.u.values);
    CHECK(a.stats.iterations == b.stats.iterations);
}
