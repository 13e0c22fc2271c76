#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"

namespace rmkl {

/// Identifies the generator; the algorithm string is fixed and recorded in
/// serialized output so runs are reproducible bit for bit.
struct RngSpec {
    std::uint64_t seed = 0;
    std::string algorithm = "splitmix64-boxmuller-v1";
};

/// Counter-based generator: draw k of stream s is a pure function of
/// (seed, s, k). splitmix64 finalizer over a Weyl sequence; normals via
/// Box-Muller on two consecutive words. Stateless, so parallel path
/// generation cannot change the output.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform draw in (0, 1), never exactly 0 or 1.
    double uniform(std::uint64_t k) const;
    /// Standard normal draw with index k.
    double normal(std::uint64_t k) const;

private:
    std::uint64_t word(std::uint64_t counter) const;
    std::uint64_t key_;
};

/// One realization of the random measure: atom_values[i] = M(cell_i).
struct SamplePath {
    GridPtr grid;
    Eigen::VectorXd atom_values;
    std::uint64_t seed = 0;  // RngSpec seed of the batch
    std::uint64_t index = 0; // path index within the batch
};

/// Gaussian paths with E(M(A)M(B)) = C(A x B): factor C once through its
/// spectral square root with rank truncation at 1e-10 * max diagonal, then
/// atom_values = L z with z iid standard normal per path stream.
/// Requires psd_check(C, 1e-6); throws NumericError("C not factorizable")
/// when the spectrum dips below -1e-8 * max|eigenvalue|.
std::vector<SamplePath> sample_gaussian(const CovarianceGridMeasure& c,
                                        const RngSpec& rng, int count);

/// Covariance of white noise restricted to a window box:
/// diagonal, entry cell_volume for cells whose midpoint lies in the window.
CovarianceGridMeasure white_noise_cov(const GridPtr& grid,
                                      const std::vector<double>& window_lower,
                                      const std::vector<double>& window_upper);

/// Covariance of an orthogonal random measure: diag(control weights),
/// control must be nonnegative.
CovarianceGridMeasure orthogonal_cov(const GridMeasure& control);

/// Unbiased sample covariance (mean subtracted, divisor n-1) of >= 2 paths.
CovarianceGridMeasure empirical_covariance(const std::vector<SamplePath>& paths);

struct FubiniResult {
    double lhs = 0.0;            // iterated integral, aux measure inside, worst path
    double rhs = 0.0;            // iterated integral, aux measure outside, worst path
    double gap = 0.0;            // max |lhs - rhs| over paths
    double variance_estimate = 0.0; // Monte-Carlo mean of (lhs - rhs)^2
};

/// Order-of-integration check for psi sampled on (grid nodes) x (aux nodes):
/// both iterated sums are the same finite double sum reordered, so the gap
/// stays at accumulation-order level.
FubiniResult fubini_check(const CovarianceGridMeasure& c, const Eigen::MatrixXd& psi,
                          const GridMeasure& aux_measure, const RngSpec& rng,
                          int n_paths);

} // namespace rmkl
