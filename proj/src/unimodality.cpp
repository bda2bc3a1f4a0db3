#include "qpat/unimodality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"

namespace qpat {

namespace {

// Neighbouring boundary positions: the perimeter cycle in 2D, axis neighbours
// that are also boundary nodes in 3D (these always share a face).
std::vector<std::vector<std::size_t>> boundary_adjacency(const Grid& g) {
    const std::size_t count = g.boundary_count();
    std::vector<std::vector<std::size_t>> adj(count);
    if (g.dim() == 2) {
        for (std::size_t m = 0; m < count; ++m) adj[m] = {(m + count - 1) % count, (m + 1) % count};
        return adj;
    }
    const auto nodes = g.boundary_nodes();
    for (std::size_t m = 0; m < count; ++m) {
        const auto c = g.coords(nodes[m]);
        std::size_t stride = 1;
        for (int a = 0; a < 3; ++a) {
            for (int step : {-1, 1}) {
                const int cc = c[a] + step;
                if (cc < 0 || cc >= g.n()) continue;
                const std::size_t q = step < 0 ? nodes[m] - stride : nodes[m] + stride;
                const long pos = g.trace_position(q);
                if (pos >= 0) adj[m].push_back(static_cast<std::size_t>(pos));
            }
            stride *= static_cast<std::size_t>(g.n());
        }
    }
    return adj;
}

int count_components(const std::vector<std::vector<std::size_t>>& adj, const std::vector<char>& member) {
    std::vector<char> seen(member.size(), 0);
    int components = 0;
    for (std::size_t start = 0; start < member.size(); ++start) {
        if (!member[start] || seen[start]) continue;
        ++components;
        std::deque<std::size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            const std::size_t m = queue.front();
            queue.pop_front();
            for (std::size_t q : adj[m])
                if (member[q] && !seen[q]) {
                    seen[q] = 1;
                    queue.push_back(q);
                }
        }
    }
    return components;
}

}  // namespace

double default_level_tol(const BoundaryTrace& g) {
    const double slope = boundary_linf_norm(tangential_gradient(g));
    const double scale = std::max(1.0, boundary_linf_norm(g));
    return std::max(10.0 * g.grid.h() * slope, 1e-12 * scale);
}

UnimodalityReport unimodality_check(const BoundaryTrace& g, double level_tol, const std::vector<OmegaSample>& omega) {
    if (!(level_tol > 0.0)) throw ParameterError("unimodality level_tol must be positive");
    UnimodalityReport rep;
    rep.level_tol = level_tol;
    rep.m = *std::min_element(g.values.begin(), g.values.end());
    rep.M = *std::max_element(g.values.begin(), g.values.end());

    const std::size_t count = g.size();
    std::vector<char> in_min(count, 0), in_max(count, 0);
    for (std::size_t m = 0; m < count; ++m) {
        if (g[m] <= rep.m + level_tol) {
            in_min[m] = 1;
            rep.gamma_m.push_back(m);
        }
        if (g[m] >= rep.M - level_tol) {
            in_max[m] = 1;
            rep.gamma_M.push_back(m);
        }
    }
    for (std::size_t m = 0; m < count; ++m)
        if (in_min[m] && in_max[m]) rep.degenerate = true;

    const auto adj = boundary_adjacency(g.grid);
    rep.components_m = count_components(adj, in_min);
    rep.components_M = count_components(adj, in_max);

    // Multi-source BFS distance (in hops) from the union of the extremal sets.
    std::vector<long> hops(count, -1);
    std::deque<std::size_t> queue;
    for (std::size_t m = 0; m < count; ++m)
        if (in_min[m] || in_max[m]) {
            hops[m] = 0;
            queue.push_back(m);
        }
    while (!queue.empty()) {
        const std::size_t m = queue.front();
        queue.pop_front();
        for (std::size_t q : adj[m])
            if (hops[q] < 0) {
                hops[q] = hops[m] + 1;
                queue.push_back(q);
            }
    }

    const BoundaryTrace slope = tangential_gradient(g);
    bool omega_ok = true;
    for (const auto& sample : omega) {
        OmegaProfileEntry entry;
        entry.delta = sample.delta;
        entry.required = sample.floor;
        for (std::size_t m = 0; m < count; ++m) {
            if (in_min[m] || in_max[m] || hops[m] < 0) continue;
            if (static_cast<double>(hops[m]) * g.grid.h() + 1e-12 < sample.delta) continue;
            entry.min_tangential = std::min(entry.min_tangential, std::abs(slope[m]));
        }
        if (entry.min_tangential < sample.floor) omega_ok = false;
        rep.omega_profile.push_back(entry);
    }

    rep.pass = !rep.degenerate && !rep.gamma_m.empty() && !rep.gamma_M.empty() && rep.components_m == 1 &&
               rep.components_M == 1 && omega_ok;
    return rep;
}

double h_half_norm(const BoundaryTrace& t) {
    return t.grid.dim() == 2 ? boundary_h_half_norm(t) : gagliardo_h_half(t);
}

double frequency_function(const BoundaryTrace& g) {
    const double mean = boundary_mean(g);
    BoundaryTrace centered = g;
    for (auto& v : centered.values) v -= mean;
    const double l2 = boundary_l2_norm(centered);
    const double scale = std::max(1.0, boundary_linf_norm(g));
    if (!(l2 > 1e-13 * scale)) throw DegeneracyError("frequency function undefined: trace is constant");
    return h_half_norm(centered) / l2;
}

}  // namespace qpat
