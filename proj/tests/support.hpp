#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "qpat/forward.hpp"
#include "qpat/grid.hpp"

// Hand-rolled generators shared by the property tests.
namespace qpat::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::uint64_t seed() { return rng_(); }

    ScalarField field(const Grid& g, double lo = -1.0, double hi = 1.0) {
        ScalarField f(g);
        for (auto& v : f.values) v = uniform(lo, hi);
        return f;
    }

    BoundaryTrace trace(const Grid& g, double lo = -1.0, double hi = 1.0) {
        BoundaryTrace t(g);
        for (auto& v : t.values) v = uniform(lo, hi);
        return t;
    }

    // Smooth positive field: background plus a few random Gaussian blobs.
    ScalarField smooth_positive(const Grid& g, double background, double spread) {
        const int blobs = integer(1, 3);
        std::vector<std::array<double, 5>> b;
        for (int i = 0; i < blobs; ++i)
            b.push_back({uniform(0.2, 0.8), uniform(0.2, 0.8), uniform(0.2, 0.8), uniform(-spread, spread),
                         uniform(0.08, 0.2)});
        return sample(g, [&](const Point& x) {
            double v = background;
            for (const auto& q : b) {
                double r2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - q[a]) * (x[a] - q[a]);
                v += q[3] * std::exp(-r2 / (q[4] * q[4]));
            }
            return v;
        });
    }

    PhantomParams phantom(PhantomKind kind, const Grid& g) {
        PhantomParams p;
        p.kind = kind;
        p.D_background = uniform(0.7, 1.5);
        p.sigma_background = uniform(0.3, 1.5);
        p.D_amplitude = uniform(-0.3, 0.5);
        p.sigma_amplitude = uniform(-0.2, 0.4);
        p.center = {uniform(0.35, 0.65), uniform(0.35, 0.65), uniform(0.35, 0.65)};
        p.radius = uniform(0.15, 0.3);
        p.width = std::max(0.12, 4.0 * g.h());
        return p;
    }

    IlluminationParams illumination() {
        IlluminationParams p;
        p.kind = integer(0, 1) ? IlluminationKind::unimodal_cosine : IlluminationKind::affine_ratio;
        p.g1_level = uniform(0.5, 2.0);
        p.g1_tilt = uniform(-0.3, 0.3);
        p.base = uniform(1.2, 2.0);
        p.amplitude = uniform(0.1, 0.5);
        p.phase = uniform(0.0, 4.0);
        p.slope = {uniform(0.1, 0.5), uniform(-0.3, 0.3), uniform(-0.3, 0.3)};
        return p;
    }

private:
    std::mt19937_64 rng_;
};

// Smooth-bump benchmark phantom and the cosine illumination used across suites.
inline PhantomParams bench_phantom() {
    PhantomParams p;
    p.kind = PhantomKind::smooth_bump;
    p.D_amplitude = 0.5;
    p.sigma_background = 0.5;
    p.sigma_amplitude = 0.3;
    p.radius = 0.3;
    return p;
}

inline IlluminationParams bench_illumination() {
    IlluminationParams p;
    p.phase = 0.5;
    return p;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("qpat_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace qpat::testing
