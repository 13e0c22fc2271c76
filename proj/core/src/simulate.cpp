#include "rmkl/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rmkl/errors.hpp"

namespace rmkl {

namespace {

constexpr std::uint64_t kWeylGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kWeylGamma) + stream * kWeylGamma)) {}

std::uint64_t CounterRng::word(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kWeylGamma);
}

double CounterRng::uniform(std::uint64_t k) const {
    // 53 bits, offset by half a lattice step: in (0,1) strictly
    return (static_cast<double>(word(k) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Spectral square root with rank truncation; columns ordered by descending
// eigenvalue so the factor is deterministic.
Eigen::MatrixXd psd_factor(const CovarianceGridMeasure& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.weights);
    if (es.info() != Eigen::Success)
        throw NumericError("C not factorizable");
    const Eigen::VectorXd& lam = es.eigenvalues();
    const auto n = lam.size();
    const double lmax = lam[n - 1];
    const double dmax = c.weights.diagonal().maxCoeff();
    if (lam[0] < -1e-8 * std::max(std::abs(lmax), 1e-300))
        throw NumericError("C not factorizable");
    const double cut = 1e-10 * std::max(dmax, 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = n - 1; r >= 0; --r)
        if (lam[r] > cut) keep.push_back(r);
    Eigen::MatrixXd L(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        L.col(static_cast<Eigen::Index>(j)) =
            es.eigenvectors().col(keep[j]) * std::sqrt(lam[keep[j]]);
    return L;
}

} // namespace

std::vector<SamplePath> sample_gaussian(const CovarianceGridMeasure& c,
                                        const RngSpec& rng, int count) {
    if (count < 0)
        throw std::invalid_argument("path count must be nonnegative");
    if (!psd_check(c, 1e-6))
        throw NumericError("covariance not positive-semidefinite");
    const Eigen::MatrixXd L = psd_factor(c);
    const auto r = L.cols();
    std::vector<SamplePath> paths;
    paths.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        CounterRng gen(rng.seed, static_cast<std::uint64_t>(p));
        Eigen::VectorXd z(r);
        for (Eigen::Index k = 0; k < r; ++k)
            z[k] = gen.normal(static_cast<std::uint64_t>(k));
        paths.push_back({c.grid, L * z, rng.seed, static_cast<std::uint64_t>(p)});
    }
    return paths;
}

CovarianceGridMeasure white_noise_cov(const GridPtr& grid,
                                      const std::vector<double>& window_lower,
                                      const std::vector<double>& window_upper) {
    if (static_cast<int>(window_lower.size()) != grid->dim() ||
        static_cast<int>(window_upper.size()) != grid->dim())
        throw std::invalid_argument("window dimension mismatch");
    for (int a = 0; a < grid->dim(); ++a) {
        if (!(window_lower[a] < window_upper[a]))
            throw ConfigError("empty window");
        if (window_lower[a] < grid->lower(a) || window_upper[a] > grid->upper(a))
            throw ConfigError("window not inside grid box");
    }
    const auto n = static_cast<Eigen::Index>(grid->node_count());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        bool inside = true;
        for (int a = 0; a < grid->dim(); ++a) {
            const double x = grid->coord(static_cast<std::size_t>(i), a);
            inside = inside && x >= window_lower[a] && x <= window_upper[a];
        }
        if (inside) {
            w(i, i) = grid->cell_volume();
            any = true;
        }
    }
    if (!any)
        throw ConfigError("empty window");
    return {grid, std::move(w)};
}

CovarianceGridMeasure orthogonal_cov(const GridMeasure& control) {
    if ((control.weights.array() < 0.0).any())
        throw NumericError("control measure must be nonnegative");
    const auto n = control.weights.size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    w.diagonal() = control.weights;
    return {control.grid, std::move(w)};
}

CovarianceGridMeasure empirical_covariance(const std::vector<SamplePath>& paths) {
    if (paths.size() < 2)
        throw std::invalid_argument("need at least 2 paths");
    const GridPtr grid = paths.front().grid;
    const auto n = paths.front().atom_values.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& p : paths) {
        if (!p.grid->same_as(*grid))
            throw std::invalid_argument("grid mismatch");
        mean += p.atom_values;
    }
    mean /= static_cast<double>(paths.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : paths) {
        const Eigen::VectorXd d = p.atom_values - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(paths.size() - 1);
    return {grid, std::move(cov)};
}

FubiniResult fubini_check(const CovarianceGridMeasure& c, const Eigen::MatrixXd& psi,
                          const GridMeasure& aux_measure, const RngSpec& rng,
                          int n_paths) {
    const auto n = static_cast<Eigen::Index>(c.grid->node_count());
    const auto m = aux_measure.weights.size();
    if (psi.rows() != n || psi.cols() != m)
        throw std::invalid_argument("psi dimension mismatch");
    if (n_paths < 1)
        throw std::invalid_argument("need at least one path");

    // aux-first contraction: phi(x) = int psi(x, u) d aux(u)
    const Eigen::VectorXd psi_aux = psi * aux_measure.weights;

    FubiniResult res;
    double sq_sum = 0.0;
    const auto paths = sample_gaussian(c, rng, n_paths);
    for (const auto& p : paths) {
        const double lhs = psi_aux.dot(p.atom_values);
        const double rhs = (psi.transpose() * p.atom_values).dot(aux_measure.weights);
        const double gap = std::abs(lhs - rhs);
        sq_sum += (lhs - rhs) * (lhs - rhs);
        if (gap >= res.gap) {
            res.gap = gap;
            res.lhs = lhs;
            res.rhs = rhs;
        }
    }
    res.variance_estimate = sq_sum / static_cast<double>(n_paths);
    return res;
}

} // namespace rmkl
