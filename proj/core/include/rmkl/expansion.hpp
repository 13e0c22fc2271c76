#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"
#include "rmkl/simulate.hpp"
#include "rmkl/spectral.hpp"

namespace rmkl {

/// One expansion term: variance sigma2 > 0, expansion measure mu_j whose
/// anti-derivative equals the eigenfunction f_j.
struct KLTerm {
    double sigma2;
    GridMeasure mu;
    GridFunction f;
};

/// Ordered orthogonal expansion of a covariance pair measure:
/// C = sum_j sigma2_j mu_j (x) mu_j, terms descending in sigma2.
/// `regulator` is set when the basis came from the function-regulated
/// pipeline; mu_j then carries the regulator as a nodewise factor.
struct KLBasis {
    GridPtr grid;
    WeightMeasure weight;
    std::vector<KLTerm> terms;
    double source_tv = 0.0;
    double rank_tol = kDefaultRankTol;
    std::optional<GridFunction> regulator;

    int rank() const { return static_cast<int>(terms.size()); }
};

/// Expansion measure for term j:
/// mu_j(cell_i) = (1/sigma2_j) sum_k O(C(cell_i x .))(node_k) f_j(node_k) qw_k.
/// Requires j < rank and sigma2_j > 0.
GridMeasure construct_mu(const CovarianceGridMeasure& c, const EigenSystem& eig,
                         const WeightMeasure& w, int j);

/// Full pipeline: regularize, eigendecompose, build every retained
/// expansion measure. Requires C symmetric positive-semidefinite.
KLBasis kl_expand(const CovarianceGridMeasure& c, const WeightMeasure& w,
                  double rank_tol = kDefaultRankTol);

/// Partial-sum covariance sum_{j<n} sigma2_j mu_j (x) mu_j; symmetric PSD.
CovarianceGridMeasure reconstruct_covariance(const KLBasis& basis, int n);

/// Partial sum of the bilinear form sum_{j<n} sigma2_j <mu_j,phi><mu_j,psi>.
double reconstruct_form(const KLBasis& basis, const GridFunction& phi,
                        const GridFunction& psi, int n);

/// Total variation of <C - partial sum, phi (x) (.)>.
double tv_residual(const KLBasis& basis, const CovarianceGridMeasure& c,
                   const GridFunction& phi, int n);

/// Expansion coefficients of one realization:
/// X_j = <O(path measure), f_j>_{L2(nu)}. For a regulated basis the path is
/// first divided by the regulator and projected on the inner eigenfunctions
/// O(mu_j / f), matching the expansion of the regulated measure.
std::vector<double> coefficients(const KLBasis& basis, const SamplePath& path);

/// Closed-form mean-square truncation error:
/// <C, phi (x) phi> - sum_{j<n} sigma2_j <mu_j, phi>^2.
double mean_square_residual(const KLBasis& basis, const CovarianceGridMeasure& c,
                            const GridFunction& phi, int n);

/// Cumulative-process factor values g_j(x) = mu_j((-inf, x]) for every term.
std::vector<double> process_expansion(const KLBasis& basis, const Point& x);

/// Expansion of a covariance whose measure is only finite after division by
/// a strictly positive function f: expand C' = C / (f (x) f) and return the
/// terms with mu_j multiplied back by f. Reconstruction still targets C.
KLBasis regulated_expand(const CovarianceGridMeasure& c, const GridFunction& f,
                         const WeightMeasure& w, double rank_tol = kDefaultRankTol);

} // namespace rmkl
