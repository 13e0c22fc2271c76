#pragma once

#include <Eigen/Core>

#include "rmkl/grid.hpp"

namespace rmkl {

/// Signed atomic measure: one weight per node, atom at the cell midpoint.
/// Total variation is the plain absolute sum of the atoms, so it is exact.
struct GridMeasure {
    GridPtr grid;
    Eigen::VectorXd weights;
};

/// Bounded measurable function sampled at grid nodes.
struct GridFunction {
    GridPtr grid;
    Eigen::VectorXd values;
};

/// Measure on node pairs (dense, node-count squared). Plays the role of a
/// covariance when symmetric and positive-semidefinite; both properties are
/// produced by the canonical constructors and checked where operations
/// require them, never silently repaired here.
struct CovarianceGridMeasure {
    GridPtr grid;
    Eigen::MatrixXd weights;
};

/// Default relative tolerance for positive-semidefiniteness checks.
inline constexpr double kPsdTol = 1e-9;

/// Sum of |atom| weights. Throws NumericError on non-finite weights.
double total_variation(const GridMeasure& mu);

/// Sum of |weights| over all node pairs, the total variation of the
/// pair measure over the whole box.
double total_variation(const CovarianceGridMeasure& c);

/// <mu, phi> = sum_i w_i phi_i. Throws on grid mismatch.
double integrate(const GridMeasure& mu, const GridFunction& phi);

/// mu((-inf, u]): sum of atoms whose every coordinate is <= u's.
/// u may lie anywhere, including outside the box.
double cdf(const GridMeasure& mu, const Point& u);

/// Outer product measure on node pairs: weights[i][j] = mu_i * nu_j.
CovarianceGridMeasure tensor(const GridMeasure& mu, const GridMeasure& nu);

/// Total variation of the measure psi with psi_j = sum_i phi_i C_ij,
/// i.e. of the partial application <C, phi (x) (.)>.
double tv_of_partial_application(const CovarianceGridMeasure& c, const GridFunction& phi);

/// True iff the smallest eigenvalue of (symmetric) c is >= -tol * max|eigenvalue|
/// (>= -tol when the spectrum is all zero).
bool psd_check(const CovarianceGridMeasure& c, double tol);

/// Fraction of total variation carried by the outermost cell layer.
/// Above ~1% this usually means the box truncates real mass.
double boundary_mass_fraction(const GridMeasure& mu);

} // namespace rmkl
