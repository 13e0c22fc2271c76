#include "rmkl/expansion.hpp"

#include <cmath>
#include <stdexcept>

#include "rmkl/errors.hpp"
#include "rmkl/regularizer.hpp"

namespace rmkl {

namespace {

// Batched expansion measures: column j = mu_j weights.
// G = (T C^T)^T holds O(C(cell_i x .)) sampled at nodes in row i, so
// mu_j = (1/lambda_j) G (qw . f_j).
Eigen::MatrixXd expansion_measures(const CovarianceGridMeasure& c, const EigenSystem& eig,
                                   const WeightMeasure& w) {
    AntiderivativeOperator op(c.grid);
    const Eigen::MatrixXd g = op.apply_rows(c.weights).transpose();
    Eigen::MatrixXd mus(c.weights.rows(), eig.rank());
    for (int j = 0; j < eig.rank(); ++j) {
        const Eigen::VectorXd wf =
            w.quadrature_weights.cwiseProduct(eig.eigenfunctions[static_cast<std::size_t>(j)].values);
        mus.col(j) = (g * wf) / eig.eigenvalues[j];
    }
    return mus;
}

void require_term_index(const KLBasis& basis, int n) {
    if (n < 0 || n > basis.rank())
        throw std::invalid_argument("term count exceeds basis rank");
}

} // namespace

GridMeasure construct_mu(const CovarianceGridMeasure& c, const EigenSystem& eig,
                         const WeightMeasure& w, int j) {
    if (j < 0 || j >= eig.rank())
        throw std::invalid_argument("eigenpair index out of range");
    if (!(eig.eigenvalues[j] > 0.0))
        throw NumericError("null eigenvalue: mu_j undefined");
    if (!c.grid->same_as(*w.grid) || !c.grid->same_as(*eig.grid))
        throw std::invalid_argument("grid mismatch");
    AntiderivativeOperator op(c.grid);
    const Eigen::VectorXd wf =
        w.quadrature_weights.cwiseProduct(eig.eigenfunctions[static_cast<std::size_t>(j)].values);
    // row i of C as a measure, anti-derivative sampled at nodes, contracted with f_j dnu
    const Eigen::VectorXd mu = op.apply_rows(c.weights).transpose() * wf / eig.eigenvalues[j];
    return {c.grid, mu};
}

KLBasis kl_expand(const CovarianceGridMeasure& c, const WeightMeasure& w,
                  double rank_tol) {
    const EigenSystem eig = eigendecompose(c, w, rank_tol);
    KLBasis basis{c.grid, w, {}, total_variation(c), rank_tol, std::nullopt};
    if (eig.rank() == 0) return basis;
    const Eigen::MatrixXd mus = expansion_measures(c, eig, w);
    basis.terms.reserve(static_cast<std::size_t>(eig.rank()));
    for (int j = 0; j < eig.rank(); ++j)
        basis.terms.push_back({eig.eigenvalues[j],
                               {c.grid, mus.col(j)},
                               eig.eigenfunctions[static_cast<std::size_t>(j)]});
    return basis;
}

CovarianceGridMeasure reconstruct_covariance(const KLBasis& basis, int n) {
    require_term_index(basis, n);
    const auto sz = static_cast<Eigen::Index>(basis.grid->node_count());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sz, sz);
    for (int j = 0; j < n; ++j) {
        const auto& t = basis.terms[static_cast<std::size_t>(j)];
        acc.noalias() += t.sigma2 * (t.mu.weights * t.mu.weights.transpose());
    }
    return {basis.grid, std::move(acc)};
}

double reconstruct_form(const KLBasis& basis, const GridFunction& phi,
                        const GridFunction& psi, int n) {
    require_term_index(basis, n);
    if (!basis.grid->same_as(*phi.grid) || !basis.grid->same_as(*psi.grid))
        throw std::invalid_argument("grid mismatch");
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& t = basis.terms[static_cast<std::size_t>(j)];
        acc += t.sigma2 * integrate(t.mu, phi) * integrate(t.mu, psi);
    }
    return acc;
}

double tv_residual(const KLBasis& basis, const CovarianceGridMeasure& c,
                   const GridFunction& phi, int n) {
    require_term_index(basis, n);
    if (!basis.grid->same_as(*c.grid))
        throw std::invalid_argument("grid mismatch");
    CovarianceGridMeasure rec = reconstruct_covariance(basis, n);
    rec.weights = c.weights - rec.weights;
    return tv_of_partial_application(rec, phi);
}

std::vector<double> coefficients(const KLBasis& basis, const SamplePath& path) {
    if (!basis.grid->same_as(*path.grid))
        throw std::invalid_argument("grid mismatch");
    AntiderivativeOperator op(basis.grid);
    std::vector<double> out(static_cast<std::size_t>(basis.rank()));
    if (!basis.regulator) {
        const Eigen::VectorXd opath = op.apply(path.atom_values);
        for (int j = 0; j < basis.rank(); ++j)
            out[static_cast<std::size_t>(j)] = l2nu_inner(
                basis.weight, opath, basis.terms[static_cast<std::size_t>(j)].f.values);
        return out;
    }
    // regulated basis: expand (1/f) path against the inner eigenfunctions O(mu_j / f)
    const Eigen::VectorXd& f = basis.regulator->values;
    const Eigen::VectorXd opath = op.apply(path.atom_values.cwiseQuotient(f));
    for (int j = 0; j < basis.rank(); ++j) {
        const Eigen::VectorXd inner_f =
            op.apply(basis.terms[static_cast<std::size_t>(j)].mu.weights.cwiseQuotient(f));
        out[static_cast<std::size_t>(j)] = l2nu_inner(basis.weight, opath, inner_f);
    }
    return out;
}

double mean_square_residual(const KLBasis& basis, const CovarianceGridMeasure& c,
                            const GridFunction& phi, int n) {
    require_term_index(basis, n);
    if (!basis.grid->same_as(*c.grid) || !basis.grid->same_as(*phi.grid))
        throw std::invalid_argument("grid mismatch");
    double acc = phi.values.dot(c.weights * phi.values);
    for (int j = 0; j < n; ++j) {
        const auto& t = basis.terms[static_cast<std::size_t>(j)];
        const double proj = integrate(t.mu, phi);
        acc -= t.sigma2 * proj * proj;
    }
    return acc;
}

std::vector<double> process_expansion(const KLBasis& basis, const Point& x) {
    std::vector<double> out(static_cast<std::size_t>(basis.rank()));
    for (int j = 0; j < basis.rank(); ++j)
        out[static_cast<std::size_t>(j)] = cdf(basis.terms[static_cast<std::size_t>(j)].mu, x);
    return out;
}

KLBasis regulated_expand(const CovarianceGridMeasure& c, const GridFunction& f,
                         const WeightMeasure& w, double rank_tol) {
    if (!c.grid->same_as(*f.grid))
        throw std::invalid_argument("grid mismatch");
    if ((f.values.array() <= 0.0).any() || !f.values.allFinite())
        throw NumericError("regulator not strictly positive");
    CovarianceGridMeasure inner{c.grid,
                                c.weights.cwiseQuotient(f.values * f.values.transpose())};
    KLBasis basis = kl_expand(inner, w, rank_tol);
    basis.source_tv = total_variation(c);
    basis.regulator = f;
    for (auto& t : basis.terms) {
        t.mu.weights = t.mu.weights.cwiseProduct(f.values);
        // keep the pairing O(mu_j) = f_j intact for the returned terms
        t.f = antiderivative(t.mu);
    }
    return basis;
}

} // namespace rmkl
