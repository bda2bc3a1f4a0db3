#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace qpat {

struct SolverStats {
    long iterations = 0;
    double final_residual = 0.0;  // ||b - A x|| / ||b||
    bool converged = false;
};

namespace linalg {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/**
 * (Optionally Jacobi-preconditioned) conjugate gradients for an SPD operator.
 * `apply(x, y)` must write y = A x. Loops run in a fixed order, so results are
 * bitwise reproducible. x holds the initial guess on entry.
 */
template <class Apply>
SolverStats conjugate_gradient(Apply&& apply, std::span<const double> b, std::span<double> x,
                               std::span<const double> inv_diag, double rel_tol, long max_iter) {
    const std::size_t n = b.size();
    SolverStats stats;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        for (auto& v : x) v = 0.0;
        stats.converged = true;
        return stats;
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];

    auto precondition = [&] {
        if (inv_diag.empty())
            z = r;
        else
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    double rnorm = std::sqrt(dot(r, r));

    while (rnorm > rel_tol * bnorm && stats.iterations < max_iter) {
        apply(std::span<const double>(p), std::span<double>(q));
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++stats.iterations;
        // Refresh the true residual periodically to bound drift.
        if (stats.iterations % 500 == 0) {
            apply(std::span<const double>(x.data(), n), std::span<double>(q));
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        }
        rnorm = std::sqrt(dot(r, r));
        precondition();
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // Report the true residual, not the recursively updated one.
    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    double true_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) true_norm += (b[i] - q[i]) * (b[i] - q[i]);
    stats.final_residual = std::sqrt(true_norm) / bnorm;
    stats.converged = stats.final_residual <= rel_tol * (1.0 + 1e-6) || rnorm <= rel_tol * bnorm;
    return stats;
}

}  // namespace linalg
}  // namespace qpat
