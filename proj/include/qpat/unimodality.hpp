#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "qpat/grid.hpp"

namespace qpat {

struct OmegaSample {
    double delta = 0.0;
    double floor = 0.0;
};

struct OmegaProfileEntry {
    double delta = 0.0;
    // min |grad_T g| over nodes at distance >= delta from the extremal sets;
    // +infinity when no such node exists.
    double min_tangential = std::numeric_limits<double>::infinity();
    double required = 0.0;
};

struct UnimodalityReport {
    double m = 0.0;
    double M = 0.0;
    double level_tol = 0.0;
    std::vector<std::size_t> gamma_m;  // boundary positions
    std::vector<std::size_t> gamma_M;
    int components_m = 0;
    int components_M = 0;
    std::vector<OmegaProfileEntry> omega_profile;
    bool degenerate = false;  // extremal sets overlap (e.g. constant data)
    bool pass = false;
};

/// 10 * h * max |grad_T g|, bounded below so it stays positive on constant data.
double default_level_tol(const BoundaryTrace& g);

/**
 * Certifies quantitative unimodality on the discrete boundary: extremal sets
 * are the nodes within level_tol of the min/max, components are counted on the
 * boundary adjacency graph, and distances to the extremal sets are BFS hop
 * counts times h.
 */
UnimodalityReport unimodality_check(const BoundaryTrace& g, double level_tol, const std::vector<OmegaSample>& omega = {});

/// ||g - gbar||_{H^1/2} / ||g - gbar||_{L2}; DegeneracyError on constant traces.
double frequency_function(const BoundaryTrace& g);

/// H^{1/2} norm with the realization matching the grid dimension.
double h_half_norm(const BoundaryTrace& t);

}  // namespace qpat
