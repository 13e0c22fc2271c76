#pragma once

// Independent reference computations for the test suites. Everything here
// recomputes results from first principles (brute force, quadrature,
// closed forms) without touching the library's own code paths beyond the
// plain data types.

#include <Eigen/Core>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"

namespace oracle {

/// Total variation as the sup of |<mu, phi>| over all sign vectors
/// phi in {-1,+1}^n. Exponential cost; keep n small.
inline double tv_by_sign_enumeration(const Eigen::VectorXd& w) {
    const int n = static_cast<int>(w.size());
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += ((mask >> i) & 1u) ? w[i] : -w[i];
        best = std::max(best, std::abs(acc));
    }
    return best;
}

/// Composite midpoint quadrature of f over [a, b].
inline double quad_midpoint(const std::function<double(double)>& f, double a, double b,
                            int n) {
    const double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f(a + (i + 0.5) * h);
    return acc * h;
}

/// Composite trapezoid quadrature of f over [a, b].
inline double quad_trapezoid(const std::function<double(double)>& f, double a, double b,
                             int n) {
    const double h = (b - a) / n;
    double acc = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) acc += f(a + i * h);
    return acc * h;
}

/// Trapezoid evaluation of the oriented integral from 0 to x of the exact
/// step-function cdf of an atomic 1-d measure.
inline double antiderivative_trapezoid(const rmkl::GridMeasure& mu, double x, int n) {
    const auto f = [&mu](double u) { return rmkl::cdf(mu, {u, 0.0}); };
    const double a = std::min(0.0, x), b = std::max(0.0, x);
    const double sign = x < 0.0 ? -1.0 : 1.0;
    if (a == b) return 0.0;
    return sign * quad_trapezoid(f, a, b, n);
}

/// Random signed measures and bounded functions with a deterministic engine.
struct Gen {
    std::mt19937_64 eng;
    explicit Gen(std::uint64_t seed) : eng(seed) {}

    Eigen::VectorXd uniform(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
        std::uniform_real_distribution<double> d(lo, hi);
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = d(eng);
        return v;
    }

    /// Random PSD matrix with eigenvalues log-uniform in [lo, hi]:
    /// condition number stays near hi/lo instead of exploding.
    Eigen::MatrixXd psd(Eigen::Index n, double lo = 1e-2, double hi = 1.0) {
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::MatrixXd a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < n; ++k) a(i, k) = g(eng);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::MatrixXd q = qr.householderQ();
        std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
        Eigen::VectorXd ev(n);
        for (Eigen::Index i = 0; i < n; ++i) ev[i] = std::exp(u(eng));
        Eigen::MatrixXd c = q * ev.asDiagonal() * q.transpose();
        return 0.5 * (c + c.transpose());
    }
};

/// Smooth compactly supported bump exp(-1/(1 - t^2)) with t = (x - c)/r,
/// and its analytic second derivative in x.
inline double bump(double x, double c, double r) {
    const double t = (x - c) / r;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

inline double bump_d2(double x, double c, double r) {
    const double t = (x - c) / r;
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    const double g = -2.0 * t / (s * s);
    const double gp = (-2.0 - 6.0 * t * t) / (s * s * s);
    return std::exp(-1.0 / s) * (g * g + gp) / (r * r);
}

/// Sample skewness and excess kurtosis.
inline std::pair<double, double> skew_kurtosis(const Eigen::VectorXd& x) {
    const double m = x.mean();
    const Eigen::ArrayXd d = x.array() - m;
    const double v = d.square().mean();
    const double skew = d.cube().mean() / std::pow(v, 1.5);
    const double kurt = d.square().square().mean() / (v * v) - 3.0;
    return {skew, kurt};
}

} // namespace oracle
