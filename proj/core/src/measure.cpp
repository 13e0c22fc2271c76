#include "rmkl/measure.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "rmkl/errors.hpp"

namespace rmkl {

namespace {

void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (!a || !b || !a->same_as(*b))
        throw std::invalid_argument("grid mismatch");
}

} // namespace

double total_variation(const GridMeasure& mu) {
    if (!mu.weights.allFinite())
        throw NumericError("non-finite measure");
    return mu.weights.cwiseAbs().sum();
}

double total_variation(const CovarianceGridMeasure& c) {
    if (!c.weights.allFinite())
        throw NumericError("non-finite measure");
    return c.weights.cwiseAbs().sum();
}

double integrate(const GridMeasure& mu, const GridFunction& phi) {
    require_same_grid(mu.grid, phi.grid);
    return mu.weights.dot(phi.values);
}

double cdf(const GridMeasure& mu, const Point& u) {
    const Grid& g = *mu.grid;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        bool below = true;
        for (int a = 0; a < g.dim(); ++a)
            below = below && g.coord(i, a) <= u[a];
        if (below) acc += mu.weights[static_cast<Eigen::Index>(i)];
    }
    return acc;
}

CovarianceGridMeasure tensor(const GridMeasure& mu, const GridMeasure& nu) {
    require_same_grid(mu.grid, nu.grid);
    return {mu.grid, mu.weights * nu.weights.transpose()};
}

double tv_of_partial_application(const CovarianceGridMeasure& c, const GridFunction& phi) {
    require_same_grid(c.grid, phi.grid);
    const Eigen::VectorXd psi = c.weights.transpose() * phi.values;
    return psi.cwiseAbs().sum();
}

bool psd_check(const CovarianceGridMeasure& c, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.weights, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericError("eigenvalue computation failed");
    const double lo = es.eigenvalues().minCoeff();
    const double amax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (amax == 0.0) return lo >= -tol;
    return lo >= -tol * amax;
}

double boundary_mass_fraction(const GridMeasure& mu) {
    const double tv = total_variation(mu);
    if (tv == 0.0) return 0.0;
    double edge = 0.0;
    for (std::size_t i = 0; i < mu.grid->node_count(); ++i)
        if (mu.grid->on_boundary_layer(i))
            edge += std::abs(mu.weights[static_cast<Eigen::Index>(i)]);
    return edge / tv;
}

} // namespace rmkl
