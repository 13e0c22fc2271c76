#include "rmkl/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmkl/errors.hpp"

namespace rmkl {

namespace {

// Per-axis operator: row i maps cell cdf samples to the signed, clipped
// integral from 0 to the i-th midpoint. Composed with the per-axis
// cumulative-sum matrix (atoms -> cdf at midpoints) this gives atoms -> O(mu)
// restricted to one axis.
Eigen::MatrixXd build_axis_operator(double lower, double upper, int n) {
    const double h = (upper - lower) / n;
    Eigen::MatrixXd box_overlap(n, n);
    for (int i = 0; i < n; ++i) {
        const double x = lower + (i + 0.5) * h;
        const auto box = SignedBox::around({x, 0.0}, 1);
        const double a = std::max(box.lo[0], lower);
        const double b = std::min(box.hi[0], upper);
        for (int m = 0; m < n; ++m) {
            const double e0 = lower + m * h;
            const double e1 = lower + (m + 1) * h;
            box_overlap(i, m) = box.sign * std::max(0.0, std::min(e1, b) - std::max(e0, a));
        }
    }
    // cdf at midpoint m sums atoms with coordinate <= midpoint: lower triangle of ones
    Eigen::MatrixXd cumsum = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= i; ++k) cumsum(i, k) = 1.0;
    return box_overlap * cumsum;
}

} // namespace

AntiderivativeOperator::AntiderivativeOperator(GridPtr grid) : grid_(std::move(grid)) {
    for (int a = 0; a < grid_->dim(); ++a)
        axis_op_[a] = build_axis_operator(grid_->lower(a), grid_->upper(a),
                                          grid_->nodes_per_axis(a));
}

Eigen::VectorXd AntiderivativeOperator::apply(const Eigen::VectorXd& w) const {
    if (w.size() != static_cast<Eigen::Index>(grid_->node_count()))
        throw std::invalid_argument("grid mismatch");
    if (grid_->dim() == 1) return axis_op_[0] * w;
    // row-major node layout: w is an n0 x n1 matrix, result = T0 W T1^T
    const int n0 = grid_->nodes_per_axis(0), n1 = grid_->nodes_per_axis(1);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> wmat(w.data(), n0, n1);
    RowMat out = axis_op_[0] * wmat * axis_op_[1].transpose();
    return Eigen::Map<const Eigen::VectorXd>(out.data(), w.size());
}

Eigen::MatrixXd AntiderivativeOperator::apply_rows(const Eigen::MatrixXd& c) const {
    const auto n = static_cast<Eigen::Index>(grid_->node_count());
    if (c.rows() != n || c.cols() != n)
        throw std::invalid_argument("grid mismatch");
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        out.col(k) = apply(c.row(k).transpose());
    return out;
}

Eigen::MatrixXd AntiderivativeOperator::apply_cov(const Eigen::MatrixXd& c) const {
    // T C T^T: contract rows, then rows of the transposed intermediate
    Eigen::MatrixXd half = apply_rows(c);            // = (T C^T)^T columns; half(:,k) = T c_k
    Eigen::MatrixXd full(half.rows(), half.cols());
    for (Eigen::Index k = 0; k < half.rows(); ++k)
        full.col(k) = apply(half.row(k).transpose());
    // mirror the lower triangle so symmetric inputs give exactly symmetric output
    full.triangularView<Eigen::StrictlyUpper>() =
        full.triangularView<Eigen::StrictlyLower>().transpose();
    return full;
}

GridFunction antiderivative(const GridMeasure& mu) {
    AntiderivativeOperator op(mu.grid);
    return {mu.grid, op.apply(mu.weights)};
}

Eigen::MatrixXd antiderivative_cov(const CovarianceGridMeasure& c) {
    const double scale = c.weights.cwiseAbs().maxCoeff();
    const double asym = (c.weights - c.weights.transpose()).cwiseAbs().maxCoeff();
    if (scale > 0.0 && asym > 1e-10 * scale)
        throw NumericError("asymmetric input");
    AntiderivativeOperator op(c.grid);
    return op.apply_cov(c.weights);
}

double weak_derivative_residual(const GridMeasure& mu, const GridFunction& phi_smooth,
                                const GridFunction& d2d_phi) {
    if (!mu.grid->same_as(*phi_smooth.grid) || !mu.grid->same_as(*d2d_phi.grid))
        throw std::invalid_argument("grid mismatch");
    const Grid& g = *mu.grid;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (g.on_boundary_layer(i) &&
            (phi_smooth.values[k] != 0.0 || d2d_phi.values[k] != 0.0))
            throw NumericError("test function not compactly supported in box");
    }
    const GridFunction omu = antiderivative(mu);
    const double lhs = (omu.values.array() * d2d_phi.values.array()).sum() * g.cell_volume();
    const double rhs = integrate(mu, phi_smooth);
    return std::abs(lhs - rhs);
}

} // namespace rmkl
