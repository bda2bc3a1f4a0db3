#pragma once

#include "qpat/grid.hpp"

namespace qpat {

// Norms. All use trapezoidal quadrature, exact on constants.
double interior_l2_norm(const ScalarField& f);
double interior_linf_norm(const ScalarField& f);
double boundary_l2_norm(const BoundaryTrace& t);
double boundary_linf_norm(const BoundaryTrace& t);

/// Boundary mean (1/|dOmega|) * integral of t.
double boundary_mean(const BoundaryTrace& t);

/**
 * H^{1/2} norm of a trace on the square perimeter, through the discrete
 * Fourier series of the periodic arc-length samples:
 *   |t|^2 = sum_k (1 + kappa_k^2)^{1/2} |t_k|^2,  kappa_k = 2 pi k / L,
 * normalized so that sum_k |t_k|^2 is the squared boundary L2 norm.
 * Throws OperationError on 3D grids (use gagliardo_h_half there).
 */
double boundary_h_half_norm(const BoundaryTrace& t);

/**
 * 3D H^{1/2} norm, Gagliardo form:
 *   |t|^2 = |t|_{L2}^2 + sum_{x != y} |t(x) - t(y)|^2 / |x - y|^3 w_x w_y.
 * O(N^2) in the number of boundary nodes.
 */
double gagliardo_h_half(const BoundaryTrace& t);

/// Central differences inside, second-order one-sided differences on the boundary.
VectorField gradient(const ScalarField& f);
ScalarField gradient_magnitude(const ScalarField& f);

/**
 * Sum of f over the nodes with |node - x0| <= r, weighted by h^dim.
 * Throws GeometryError unless the closed ball lies in the domain.
 */
double ball_integral(const ScalarField& f, const Point& x0, double r);

/**
 * 2D: signed derivative d/ds along the counterclockwise perimeter (periodic
 * central difference). 3D: magnitude of the in-face gradient, with one-sided
 * second-order stencils at face edges.
 */
BoundaryTrace tangential_gradient(const BoundaryTrace& t);

/// Second tangential differences, max over the in-face axes (2D: periodic).
BoundaryTrace tangential_second_difference(const BoundaryTrace& t);

}  // namespace qpat
