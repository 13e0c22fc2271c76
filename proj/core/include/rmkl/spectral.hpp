#pragma once

#include <Eigen/Core>
#include <vector>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"

namespace rmkl {

/// Reference measure nu with density 1/p, p(x) = prod_j (1 + x_j^2)^2.
/// Finite over R^d with total mass (pi/2)^d; quadrature weights are the
/// midpoint-rule weights density * cell_volume.
struct WeightMeasure {
    GridPtr grid;
    Eigen::VectorXd density_values;     // 1/p at nodes, in (0, 1]
    Eigen::VectorXd quadrature_weights; // density * cell_volume
};

WeightMeasure build_weight_measure(const GridPtr& grid);

/// Discrete L2(nu) inner product of two node-sampled functions.
double l2nu_inner(const WeightMeasure& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Eigensystem of the regularized covariance operator on L2(nu).
/// Eigenvalues are descending and clamped nonnegative; eigenfunction node
/// values are orthonormal in the discrete L2(nu) inner product.
struct EigenSystem {
    GridPtr grid;
    Eigen::VectorXd eigenvalues;
    std::vector<GridFunction> eigenfunctions;
    int rank() const { return static_cast<int>(eigenvalues.size()); }
};

inline constexpr double kDefaultRankTol = 1e-12;

/// Discrete trace integral of the regularized kernel against nu:
/// sum_k K(x_k, x_k) qw_k with K = antiderivative_cov(C). Checks the bound
/// trace <= tv(C) * (pi/2)^d + 1e-6 and throws NumericError("trace bound
/// violated") past it, which would signal a quadrature bug.
double trace_bound(const CovarianceGridMeasure& c, const WeightMeasure& w);

/// Nystrom eigendecomposition of the operator phi -> int K(., y) phi(y) dnu(y)
/// for a symmetric kernel matrix K sampled at nodes. With D = diag(sqrt(qw))
/// the symmetric matrix D K D is decomposed; eigenfunction values are
/// eigenvector / sqrt(qw), rescaled to unit L2(nu) norm. Eigenvalues in
/// [-1e-8 * max, 0) clamp to zero, below that throws
/// NumericError("operator not PSD"). Retains eigenvalues >= rank_tol * max;
/// sign fixed so the first component above 1e-12 in magnitude is positive.
EigenSystem nystrom_eigensolve(const GridPtr& grid, const Eigen::MatrixXd& kernel,
                               const WeightMeasure& w, double rank_tol);

/// Full chain for a covariance pair measure: regularize then decompose.
/// Requires C symmetric and psd_check(C, 1e-6).
EigenSystem eigendecompose(const CovarianceGridMeasure& c, const WeightMeasure& w,
                           double rank_tol = kDefaultRankTol);

} // namespace rmkl
