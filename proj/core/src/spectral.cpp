#include "rmkl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rmkl/errors.hpp"
#include "rmkl/regularizer.hpp"

namespace rmkl {

WeightMeasure build_weight_measure(const GridPtr& grid) {
    const auto n = static_cast<Eigen::Index>(grid->node_count());
    Eigen::VectorXd dens(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int a = 0; a < grid->dim(); ++a) {
            const double x = grid->coord(static_cast<std::size_t>(i), a);
            const double q = 1.0 + x * x;
            p *= q * q;
        }
        dens[i] = 1.0 / p;
    }
    return {grid, dens, dens * grid->cell_volume()};
}

double l2nu_inner(const WeightMeasure& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.array() * b.array() * w.quadrature_weights.array()).sum();
}

double trace_bound(const CovarianceGridMeasure& c, const WeightMeasure& w) {
    if (!c.grid->same_as(*w.grid))
        throw std::invalid_argument("grid mismatch");
    const Eigen::MatrixXd kernel = antiderivative_cov(c);
    const double trace = kernel.diagonal().dot(w.quadrature_weights);
    const double tv = total_variation(c);
    const double bound = tv * std::pow(std::numbers::pi / 2.0, c.grid->dim());
    if (trace > bound + 1e-6)
        throw NumericError("trace bound violated");
    return trace;
}

EigenSystem nystrom_eigensolve(const GridPtr& grid, const Eigen::MatrixXd& kernel,
                               const WeightMeasure& w, double rank_tol) {
    const auto n = static_cast<Eigen::Index>(grid->node_count());
    if (kernel.rows() != n || kernel.cols() != n || !w.grid->same_as(*grid))
        throw std::invalid_argument("grid mismatch");

    const double kmax = kernel.cwiseAbs().maxCoeff();
    const double asym = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
    if (kmax > 0.0 && asym > 1e-10 * kmax)
        throw NumericError("kernel asymmetry beyond tolerance");

    const Eigen::VectorXd sq = w.quadrature_weights.cwiseSqrt();
    Eigen::MatrixXd sym = sq.asDiagonal() * kernel * sq.asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw NumericError("eigenvalue computation failed");

    // ascending from the solver; walk from the top
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = lam.size() ? lam[lam.size() - 1] : 0.0;
    if (lmax <= 0.0) {
        if (lam.size() && lam[0] < -1e-8 * std::abs(lmax))
            throw NumericError("operator not PSD");
        return {grid, Eigen::VectorXd(0), {}};
    }
    const double clamp_tol = 1e-8 * lmax;
    if (lam[0] < -clamp_tol)
        throw NumericError("operator not PSD");

    std::vector<double> kept;
    std::vector<GridFunction> funcs;
    for (Eigen::Index r = lam.size() - 1; r >= 0; --r) {
        const double lv = std::max(lam[r], 0.0);
        if (lv < rank_tol * lmax || lv == 0.0) break;
        Eigen::VectorXd f = es.eigenvectors().col(r).cwiseQuotient(sq);
        f /= std::sqrt(l2nu_inner(w, f, f));
        // deterministic sign: first component above threshold made positive
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (std::abs(f[i]) > 1e-12) {
                if (f[i] < 0.0) f = -f;
                break;
            }
        }
        kept.push_back(lv);
        funcs.push_back({grid, std::move(f)});
    }
    Eigen::VectorXd ev(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) ev[static_cast<Eigen::Index>(j)] = kept[j];
    return {grid, std::move(ev), std::move(funcs)};
}

EigenSystem eigendecompose(const CovarianceGridMeasure& c, const WeightMeasure& w,
                           double rank_tol) {
    if (!c.grid->same_as(*w.grid))
        throw std::invalid_argument("grid mismatch");
    if ((w.quadrature_weights.array() <= 0.0).any())
        throw NumericError("quadrature weights must be positive");
    const double cmax = c.weights.cwiseAbs().maxCoeff();
    const double asym = (c.weights - c.weights.transpose()).cwiseAbs().maxCoeff();
    if (cmax > 0.0 && asym > 1e-10 * cmax)
        throw NumericError("kernel asymmetry beyond tolerance");
    if (!psd_check(c, 1e-6))
        throw NumericError("operator not PSD");

    // Same spectrum as the symmetric solve of D K D, computed through the
    // factored form F F^T with F = D T R and C = R R^T: singular values of F
    // carry the small eigenvalues with far less roundoff, which the
    // downstream expansion identities need at their stated tolerances.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ces(c.weights);
    if (ces.info() != Eigen::Success)
        throw NumericError("eigenvalue computation failed");
    const Eigen::VectorXd& clam = ces.eigenvalues();
    std::vector<Eigen::Index> cols;
    for (Eigen::Index r = clam.size() - 1; r >= 0; --r)
        if (clam[r] > 0.0) cols.push_back(r);
    const auto n = clam.size();
    const auto rk = static_cast<Eigen::Index>(cols.size());
    if (rk == 0) return {c.grid, Eigen::VectorXd(0), {}};

    AntiderivativeOperator op(c.grid);
    const Eigen::VectorXd sq = w.quadrature_weights.cwiseSqrt();
    Eigen::MatrixXd factor(n, rk);
    for (Eigen::Index j = 0; j < rk; ++j) {
        const Eigen::VectorXd col =
            ces.eigenvectors().col(cols[static_cast<std::size_t>(j)]) *
            std::sqrt(clam[cols[static_cast<std::size_t>(j)]]);
        factor.col(j) = op.apply(col).cwiseProduct(sq);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(factor, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double lmax = sv.size() ? sv[0] * sv[0] : 0.0;
    if (lmax == 0.0) return {c.grid, Eigen::VectorXd(0), {}};

    std::vector<double> kept;
    std::vector<GridFunction> funcs;
    for (Eigen::Index j = 0; j < sv.size(); ++j) {
        const double lv = sv[j] * sv[j];
        if (lv < rank_tol * lmax || lv == 0.0) break;
        Eigen::VectorXd f = svd.matrixU().col(j).cwiseQuotient(sq);
        f /= std::sqrt(l2nu_inner(w, f, f));
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (std::abs(f[i]) > 1e-12) {
                if (f[i] < 0.0) f = -f;
                break;
            }
        }
        kept.push_back(lv);
        funcs.push_back({c.grid, std::move(f)});
    }
    Eigen::VectorXd ev(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) ev[static_cast<Eigen::Index>(j)] = kept[j];
    return {c.grid, std::move(ev), std::move(funcs)};
}

} // namespace rmkl
