#pragma once

#include <Eigen/Core>
#include <algorithm>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"

namespace rmkl {

/// Oriented integration region of the anti-derivative: the coordinate-wise
/// interval hull of {0, target} with the Riemann orientation sign
/// (-1)^(number of negative target coordinates). Axis intervals outside the
/// grid box are clipped by the operator.
struct SignedBox {
    Point target{};
    double sign = 1.0;
    Point lo{}, hi{};

    static SignedBox around(const Point& target, int dim) {
        SignedBox b;
        b.target = target;
        for (int a = 0; a < dim; ++a) {
            b.lo[static_cast<std::size_t>(a)] = std::min(0.0, target[static_cast<std::size_t>(a)]);
            b.hi[static_cast<std::size_t>(a)] = std::max(0.0, target[static_cast<std::size_t>(a)]);
            if (target[static_cast<std::size_t>(a)] < 0.0) b.sign = -b.sign;
        }
        return b;
    }
};

/// Anti-derivative operator: maps an atomic measure mu to the function
/// x -> oriented integral from 0 to x of mu((-inf, u]) du, sampled at nodes.
///
/// The cdf is taken constant per cell at its midpoint value, and each cell
/// contributes that value times the volume of its overlap with the signed
/// integration box, clipped to the grid box. The orientation sign is
/// (-1)^(number of negative coordinates of x). With this quadrature the bound
/// |O(mu)(x)| <= |x_1|...|x_d| tv(mu) holds at every node without tolerance.
///
/// The operator is linear; it factors across axes, so it is stored as one
/// dense matrix per axis and applied by per-axis contraction.
class AntiderivativeOperator {
public:
    explicit AntiderivativeOperator(GridPtr grid);

    const GridPtr& grid() const { return grid_; }

    /// O(mu) node values for atom weights w (length = node count).
    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;

    /// Applies the operator in both slots of a pair measure: K = T C T^T.
    /// The result is mirrored from its lower triangle so it is exactly
    /// symmetric whenever C is.
    Eigen::MatrixXd apply_cov(const Eigen::MatrixXd& c) const;

    /// T C^T for the batched expansion-measure construction; column k holds
    /// the anti-derivative of row k of C sampled at all nodes.
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& c) const;

    const Eigen::MatrixXd& axis_matrix(int axis) const { return axis_op_[axis]; }

private:
    GridPtr grid_;
    Eigen::MatrixXd axis_op_[2];
};

/// One-shot convenience wrappers around AntiderivativeOperator.
GridFunction antiderivative(const GridMeasure& mu);

/// K(x_i, x_j) for the pair measure C, node-count squared, exactly symmetric.
/// Throws NumericError when C is asymmetric beyond 1e-10 * max|C|.
Eigen::MatrixXd antiderivative_cov(const CovarianceGridMeasure& c);

/// |sum_i O(mu)(node_i) d2d_phi_i cell_volume - <mu, phi>| for a smooth
/// compactly supported phi with mixed second derivative d2d_phi, both
/// sampled analytically by the caller. Throws NumericError when either
/// function is nonzero on the outermost cell layer.
double weak_derivative_residual(const GridMeasure& mu, const GridFunction& phi_smooth,
                                const GridFunction& d2d_phi);

} // namespace rmkl
