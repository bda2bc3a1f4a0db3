#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/forward.hpp"
#include "support.hpp"

using namespace qpat;
using qpat::testing::Gen;
using std::numbers::pi;

namespace {

double min_of(const ScalarField& f) { return *std::min_element(f.values.begin(), f.values.end()); }
double max_of(const ScalarField& f) { return *std::max_element(f.values.begin(), f.values.end()); }
double max_of(const BoundaryTrace& t) { return *std::max_element(t.values.begin(), t.values.end()); }

ScalarField minus(const ScalarField& a, const ScalarField& b) {
    ScalarField d = a;
    for (std::size_t p = 0; p < d.size(); ++p) d[p] -= b[p];
    return d;
}

}  // namespace

TEST_CASE("solve_photon_density: harmonic limit and cosh profile") {
    const Grid g = build_grid(2, 33);
    auto affine = [](const Point& x) { return 1.0 + 0.5 * x[0] + 0.25 * x[1]; };
    const auto c = make_coefficient_set(ScalarField(g, 1.0), ScalarField(g, 1e-12));
    const ScalarField u = solve_photon_density(c, sample_boundary(g, affine));
    CHECK(interior_linf_norm(minus(u, sample(g, affine))) < 1e-8);

    auto profile = [](const Point& x) { return std::cosh(x[0] - 0.5) / std::cosh(0.5); };
    auto err = [&](int n) {
        const Grid gg = build_grid(2, n);
        const auto cc = make_coefficient_set(ScalarField(gg, 1.0), ScalarField(gg, 1.0));
        const ScalarField exact = sample(gg, profile);
        return interior_l2_norm(minus(solve_photon_density(cc, sample_boundary(gg, profile)), exact)) /
               interior_l2_norm(exact);
    };
    CHECK(err(33) / err(65) > 3.6);
    CHECK_THROWS_AS(solve_photon_density(c, BoundaryTrace(g, 0.0)), ParameterError);
}

TEST_CASE("absorbed_energy examples") {
    const Grid g = build_grid(2, 17);
    const ScalarField H = absorbed_energy(ScalarField(g, 2.0), ScalarField(g, 3.0));
    for (double v : H.values) CHECK(v == 6.0);

    Gen gen(4);
    const ScalarField sigma = gen.field(g, 0.5, 2.0);
    const ScalarField u = gen.field(g, 0.1, 1.0);
    const ScalarField E = absorbed_energy(sigma, u);
    for (std::size_t p = 0; p < E.size(); ++p) {
        CHECK(E[p] >= min_of(sigma) * min_of(u));
        CHECK(E[p] / u[p] == doctest::Approx(sigma[p]).epsilon(1e-15));
    }
}

TEST_CASE("add_noise contract") {
    Gen gen(12);
    const Grid g = build_grid(2, 33);
    const ScalarField H = gen.field(g, 0.5, 1.0);
    CHECK(add_noise(H, 0.0, 7).values == H.values);
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        const ScalarField noisy = add_noise(H, 1e-3, seed);
        CHECK(std::abs(interior_l2_norm(minus(noisy, H)) - 1e-3) <= 1e-12 * 1e-3 * 10.0);
    }
    CHECK(add_noise(H, 1e-3, 5).values == add_noise(H, 1e-3, 5).values);
    CHECK(add_noise(H, 1e-3, 5).values != add_noise(H, 1e-3, 6).values);
    CHECK_THROWS_AS(add_noise(H, -1.0, 1), ParameterError);
}

TEST_CASE("property: noise composes within eps1 + eps2") {
    Gen gen(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Grid g = build_grid(2, 17);
        const ScalarField H = gen.field(g, 0.5, 1.0);
        const double e1 = gen.uniform(1e-5, 1e-2), e2 = gen.uniform(1e-5, 1e-2);
        const ScalarField twice = add_noise(add_noise(H, e1, gen.seed()), e2, gen.seed());
        CHECK(interior_l2_norm(minus(twice, H)) <= (e1 + e2) * (1.0 + 1e-12));
    }
}

TEST_CASE("make_phantom examples") {
    const Grid g = build_grid(2, 33);
    PhantomParams constant;
    const CoefficientSet c = make_phantom(g, constant);
    CHECK(c.lambda0 == 1.0);
    CHECK(c.lambda1 == 1.0);
    CHECK(c.E0 == 1.0);
    CHECK(c.E1 == 1.0);

    PhantomParams bump;
    bump.kind = PhantomKind::smooth_bump;
    bump.D_amplitude = 0.5;
    bump.center = {0.5, 0.5, 0.5};
    bump.radius = 0.3;
    const CoefficientSet b = make_phantom(g, bump);
    CHECK(max_of(b.D) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(b.lambda0 == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(b.E0 >= 1.5);

    PhantomParams inclusion;
    inclusion.kind = PhantomKind::smoothed_inclusion;
    inclusion.D_amplitude = 1.0;
    inclusion.width = 2.0 * g.h();
    try {
        make_phantom(g, inclusion);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("Lipschitz") != std::string::npos);
    }
    inclusion.width = 0.15;
    CHECK_NOTHROW(make_phantom(g, inclusion));
}

TEST_CASE("declared bounds are checked and named") {
    const Grid g = build_grid(2, 33);
    PhantomParams p;
    p.kind = PhantomKind::smooth_bump;
    p.D_amplitude = 0.5;
    p.lambda0 = 1.2;
    try {
        make_phantom(g, p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("lambda0^-1 <= D <= lambda0") != std::string::npos);
    }
    p.lambda0 = 2.0;
    p.E0 = 1.0;
    try {
        make_phantom(g, p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("E0") != std::string::npos);
    }
    PhantomParams neg;
    neg.D_background = -1.0;
    CHECK_THROWS_AS(make_phantom(g, neg), ParameterError);
}

TEST_CASE("make_illuminations examples") {
    const Grid g = build_grid(2, 65);
    IlluminationParams cosine;
    const IlluminationPair pc = make_illuminations(g, cosine);
    CHECK(pc.compliant);
    CHECK(pc.unimodality.pass);
    CHECK(pc.unimodality.components_M == 1);
    CHECK(pc.unimodality.components_m == 1);
    for (double v : pc.g1.values) CHECK(v == 1.0);

    IlluminationParams affine;
    affine.kind = IlluminationKind::affine_ratio;
    affine.base = 1.0;
    affine.slope = {0.3, 0.0, 0.0};
    const IlluminationPair pa = make_illuminations(g, affine);
    CHECK(pa.compliant);
    // oracle: 1 + 0.3 x is within level_tol of its extremes exactly on the bands x >= 1 - tol / 0.3, x <= tol / 0.3
    const double band = pa.unimodality.level_tol / 0.3 + 1e-12;
    std::size_t expect_M = 0, expect_m = 0;
    for (std::size_t m = 0; m < g.boundary_count(); ++m) {
        const double x = g.position(g.boundary_nodes()[m])[0];
        expect_M += x >= 1.0 - band;
        expect_m += x <= band;
    }
    CHECK(pa.unimodality.gamma_M.size() == expect_M);
    CHECK(pa.unimodality.gamma_m.size() == expect_m);
    for (std::size_t m : pa.unimodality.gamma_M) CHECK(g.position(g.boundary_nodes()[m])[0] >= 1.0 - band);
    for (std::size_t m : pa.unimodality.gamma_m) CHECK(g.position(g.boundary_nodes()[m])[0] <= band);

    IlluminationParams bimodal;
    bimodal.kind = IlluminationKind::bimodal;
    const IlluminationPair pb = make_illuminations(g, bimodal);
    CHECK_FALSE(pb.compliant);
    CHECK(pb.unimodality.components_M == 2);
    CHECK_FALSE(pb.unimodality.pass);

    IlluminationParams flat = cosine;
    flat.amplitude = 0.0;
    CHECK_THROWS_AS(make_illuminations(g, flat), ParameterError);
    IlluminationParams tight = cosine;
    tight.mu1 = 1.5;
    CHECK_THROWS_AS(make_illuminations(g, tight), ParameterError);
}

TEST_CASE("analyze_illuminations names a vanishing illumination") {
    const Grid g = build_grid(2, 33);
    BoundaryTrace g1(g, 1.0), g2 = make_illuminations(g, IlluminationParams{}).g2;
    g1[5] = 0.0;
    const IlluminationPair p = analyze_illuminations(g1, g2);
    CHECK_FALSE(p.compliant);
    REQUIRE_FALSE(p.violations.empty());
    CHECK(p.violations.front().find("mu1^-1 <= g_i <= mu1") != std::string::npos);
}

TEST_CASE("property: maximum principle and energy floors on random admissible inputs") {
    Gen gen(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = trial % 5 == 4 ? 3 : 2;
        // 3D needs n >= 33: at n = 17 the default level tolerance swallows the whole range of cos(pi z)
        const Grid g = build_grid(dim, 33);
        const auto kind = trial % 2 ? PhantomKind::smooth_bump : PhantomKind::smoothed_inclusion;
        const CoefficientSet c = make_phantom(g, gen.phantom(kind, g));
        const IlluminationPair illum = make_illuminations(g, gen.illumination());
        const Simulation s = simulate(c, illum);
        for (const auto* pr : {&s.u1, &s.u2}) {
            const auto& u = *pr;
            const auto& data = pr == &s.u1 ? illum.g1 : illum.g2;
            const auto& H = pr == &s.u1 ? s.clean.H1 : s.clean.H2;
            CHECK(min_of(u) > 0.0);
            CHECK(max_of(u) <= max_of(data) + 1e-12);
            CHECK(min_of(H) >= min_of(c.sigma) * min_of(u) - 1e-12);
            CHECK(max_of(H) <= max_of(c.sigma) * max_of(data) + 1e-12);
        }
    }
}

TEST_CASE("min u is refinement stable") {
    PhantomParams p;
    p.kind = PhantomKind::smooth_bump;
    p.D_amplitude = 0.5;
    p.sigma_background = 2.0;
    auto min_u = [&](int n) {
        const Grid g = build_grid(2, n);
        return min_of(solve_photon_density(make_phantom(g, p), BoundaryTrace(g, 1.0)));
    };
    const double a = min_u(33), b = min_u(65);
    CHECK(a > 0.1);
    CHECK(std::abs(a - b) / b < 0.02);
}

TEST_CASE("measurement noise is reproducible and per-field exact") {
    const Grid g = build_grid(2, 33);
    PhantomParams p;
    p.kind = PhantomKind::smooth_bump;
    p.D_amplitude = 0.3;
    const Simulation s = simulate(make_phantom(g, p), make_illuminations(g, IlluminationParams{}));
    CHECK(s.clean.noise_level == 0.0);
    const MeasurementSet m = add_measurement_noise(s.clean, 1e-3, 42);
    CHECK(std::abs(interior_l2_norm(minus(m.H1, s.clean.H1)) - 1e-3) < 1e-14);
    CHECK(std::abs(interior_l2_norm(minus(m.H2, s.clean.H2)) - 1e-3) < 1e-14);
    CHECK(m.noise_level == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(m.seed == 42u);
    // H1 and H2 get independent streams
    CHECK(minus(m.H1, s.clean.H1).values != minus(m.H2, s.clean.H2).values);
    CHECK(add_measurement_noise(s.clean, 1e-3, 42).H2.values == m.H2.values);
}

TEST_CASE("kind names round trip") {
    for (auto k : {PhantomKind::constant, PhantomKind::smooth_bump, PhantomKind::smoothed_inclusion})
        CHECK(phantom_kind_from_string(to_string(k)) == k);
    for (auto k : {IlluminationKind::unimodal_cosine, IlluminationKind::affine_ratio, IlluminationKind::bimodal,
                   IlluminationKind::saddle})
        CHECK(illumination_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(phantom_kind_from_string("blob"), ParameterError);
}
