#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rmkl/errors.hpp"
#include "rmkl/expansion.hpp"
#include "rmkl/regularizer.hpp"
#include "rmkl/simulate.hpp"

using namespace rmkl;

namespace {

struct Setup {
    GridPtr grid;
    WeightMeasure w;
    explicit Setup(int n = 32) : grid(make_grid(1, -5.0, 5.0, n)), w(build_weight_measure(grid)) {}
};

double quad_form(const CovarianceGridMeasure& c, const GridFunction& phi) {
    return phi.values.dot(c.weights * phi.values);
}

} // namespace

TEST_CASE("rank-one covariances expand into a single exact term") {
    Setup s;
    oracle::Gen gen(41);
    const GridMeasure m{s.grid, gen.uniform(32)};
    const double sigma = 1.7;
    CovarianceGridMeasure c = tensor(m, m);
    c.weights *= sigma * sigma;

    const auto basis = kl_expand(c, s.w);
    REQUIRE(basis.rank() == 1);
    const auto rec = reconstruct_covariance(basis, 1);
    CHECK((rec.weights - c.weights).cwiseAbs().maxCoeff() <=
          1e-8 * c.weights.cwiseAbs().maxCoeff());
}

TEST_CASE("a diagonal Dirac covariance keeps its atom") {
    Setup s;
    Eigen::VectorXd da = Eigen::VectorXd::Zero(32);
    da[20] = 1.0;
    CovarianceGridMeasure c = tensor({s.grid, da}, {s.grid, da});
    c.weights *= 0.3;
    const auto basis = kl_expand(c, s.w);
    REQUIRE(basis.rank() == 1);
    const auto& mu = basis.terms[0].mu.weights;
    const double peak = std::abs(mu[20]);
    for (int i = 0; i < 32; ++i)
        if (i != 20) CHECK(std::abs(mu[i]) <= 1e-8 * peak);
}

TEST_CASE("zero covariance expands into an empty basis") {
    Setup s;
    const auto basis = kl_expand({s.grid, Eigen::MatrixXd::Zero(32, 32)}, s.w);
    CHECK(basis.rank() == 0);
    const auto rec = reconstruct_covariance(basis, 0);
    CHECK(rec.weights.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expansion measures regenerate their eigenfunctions") {
    Setup s;
    oracle::Gen gen(42);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w);
    REQUIRE(basis.rank() > 0);
    for (const auto& t : basis.terms) {
        const auto of = antiderivative(t.mu);
        CHECK((of.values - t.f.values).cwiseAbs().maxCoeff() <=
              1e-6 * t.f.values.cwiseAbs().maxCoeff());
    }
    // descending positive variances
    for (int j = 0; j + 1 < basis.rank(); ++j)
        CHECK(basis.terms[static_cast<std::size_t>(j)].sigma2 >=
              basis.terms[static_cast<std::size_t>(j + 1)].sigma2);
    CHECK(basis.terms.back().sigma2 > 0.0);
}

TEST_CASE("expansion measures obey the node-wise finiteness bound") {
    Setup s;
    oracle::Gen gen(53);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto eig = eigendecompose(c, s.w, 1e-12);
    for (int j = 0; j < eig.rank(); ++j) {
        const auto mu = construct_mu(c, eig, s.w, j);
        // |mu_j(cell_i)| <= (1/sigma2) int |y| |f_j| dnu * sum_t |C(i,t)|
        double moment = 0.0;
        for (int k = 0; k < 32; ++k)
            moment += std::abs(s.grid->coord(static_cast<std::size_t>(k), 0)) *
                      std::abs(eig.eigenfunctions[static_cast<std::size_t>(j)]
                                   .values[k]) *
                      s.w.quadrature_weights[k];
        for (int i = 0; i < 32; ++i) {
            const double bound =
                moment * c.weights.row(i).cwiseAbs().sum() / eig.eigenvalues[j];
            CHECK(std::abs(mu.weights[i]) <= bound * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("construct_mu validates its inputs") {
    Setup s;
    oracle::Gen gen(43);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto eig = eigendecompose(c, s.w, 1e-12);
    CHECK_THROWS_AS(construct_mu(c, eig, s.w, eig.rank()), std::invalid_argument);

    EigenSystem broken = eig;
    broken.eigenvalues[0] = 0.0;
    CHECK_THROWS_WITH_AS(construct_mu(c, broken, s.w, 0),
                         "null eigenvalue: mu_j undefined", NumericError);
}

TEST_CASE("full-rank reconstruction and residual decay") {
    Setup s;
    oracle::Gen gen(44);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w, 0.0);
    const int rank = basis.rank();
    REQUIRE(rank == 32);

    const auto rec = reconstruct_covariance(basis, rank);
    CHECK((rec.weights - c.weights).cwiseAbs().maxCoeff() <=
          1e-6 * c.weights.cwiseAbs().maxCoeff());

    const double tv_c = total_variation(c);
    for (int trial = 0; trial < 5; ++trial) {
        const GridFunction phi{s.grid, gen.uniform(32)};
        CHECK(tv_residual(basis, c, phi, rank) <=
              1e-6 * tv_c * phi.values.cwiseAbs().maxCoeff());
        CHECK(tv_residual(basis, c, phi, 0) ==
              doctest::Approx(tv_of_partial_application(c, phi)));
        CHECK(tv_residual(basis, c, {s.grid, Eigen::VectorXd::Zero(32)}, rank / 2) == 0.0);

        // the Cauchy-Schwarz envelope dominates the tv residual at every n
        for (int n = 0; n <= rank; n += 4) {
            const double res = tv_residual(basis, c, phi, n);
            const double ms = mean_square_residual(basis, c, phi, n);
            CHECK(res <= std::sqrt(std::max(ms, 0.0)) * std::sqrt(tv_c) + 1e-8);
        }
    }
}

TEST_CASE("bilinear form properties") {
    Setup s;
    oracle::Gen gen(45);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w, 0.0);
    const int rank = basis.rank();

    const GridFunction zero{s.grid, Eigen::VectorXd::Zero(32)};
    for (int trial = 0; trial < 10; ++trial) {
        const GridFunction phi{s.grid, gen.uniform(32)};
        const GridFunction psi{s.grid, gen.uniform(32)};
        CHECK(reconstruct_form(basis, phi, zero, rank) == 0.0);

        // full-rank reproduction of the pairing
        const double full = reconstruct_form(basis, phi, psi, rank);
        const double direct = phi.values.dot(c.weights * psi.values);
        CHECK(std::abs(full - direct) <=
              1e-6 * total_variation(c) * phi.values.cwiseAbs().maxCoeff() *
                  psi.values.cwiseAbs().maxCoeff());

        // Cauchy-Schwarz of the partial form
        for (int n = 0; n <= rank; n += 8) {
            const double fp = reconstruct_form(basis, phi, psi, n);
            const double aa = reconstruct_form(basis, phi, phi, n);
            const double bb = reconstruct_form(basis, psi, psi, n);
            CHECK(fp * fp <= aa * bb + 1e-8);
        }

        // domination by the full pairing, monotone in n
        double prev = 0.0;
        for (int n = 0; n <= rank; ++n) {
            const double fn = reconstruct_form(basis, phi, phi, n);
            CHECK(fn >= prev - 1e-12);
            CHECK(fn <= quad_form(c, phi) + 1e-8);
            prev = fn;
        }

        // absolute-series chain against the covariance bound
        double abs_sum = 0.0;
        for (int j = 0; j < rank; ++j) {
            const auto& t = basis.terms[static_cast<std::size_t>(j)];
            abs_sum += t.sigma2 * std::abs(integrate(t.mu, phi)) *
                       std::abs(integrate(t.mu, psi));
        }
        CHECK(abs_sum <= std::sqrt(quad_form(c, phi)) * std::sqrt(quad_form(c, psi)) + 1e-8);
    }
}

TEST_CASE("mean-square residual: closed form, monotone, complete") {
    Setup s;
    oracle::Gen gen(46);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w, 0.0);
    const int rank = basis.rank();

    for (int trial = 0; trial < 10; ++trial) {
        const GridFunction phi{s.grid, gen.uniform(32)};
        CHECK(mean_square_residual(basis, c, phi, 0) ==
              doctest::Approx(quad_form(c, phi)));
        double prev = mean_square_residual(basis, c, phi, 0);
        for (int n = 1; n <= rank; ++n) {
            const double ms = mean_square_residual(basis, c, phi, n);
            CHECK(ms >= -1e-10);
            CHECK(ms <= prev + 1e-10);
            prev = ms;
        }
        CHECK(mean_square_residual(basis, c, phi, rank) <= 1e-6 * quad_form(c, phi));
    }
}

TEST_CASE("coefficient extraction on deterministic paths") {
    Setup s;
    oracle::Gen gen(47);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w, 0.0);

    const SamplePath zero{s.grid, Eigen::VectorXd::Zero(32), 0, 0};
    for (const double x : coefficients(basis, zero)) CHECK(x == 0.0);

    // a path equal to c * mu_j projects onto coordinate j alone
    const int j = 3;
    const double scale = 2.25;
    SamplePath path{s.grid, scale * basis.terms[j].mu.weights, 0, 0};
    const auto coef = coefficients(basis, path);
    for (int i = 0; i < basis.rank(); ++i) {
        if (i == j)
            CHECK(coef[static_cast<std::size_t>(i)] == doctest::Approx(scale).epsilon(1e-8));
        else
            CHECK(std::abs(coef[static_cast<std::size_t>(i)]) <= 1e-8 * scale);
    }
}

TEST_CASE("cumulative process factors and their quadratic sum") {
    Setup s;
    oracle::Gen gen(48);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto basis = kl_expand(c, s.w, 0.0);

    const auto below = process_expansion(basis, {-7.0, 0.0});
    for (double v : below) CHECK(v == 0.0);
    const auto above = process_expansion(basis, {9.0, 0.0});
    for (int j = 0; j < basis.rank(); ++j)
        CHECK(above[static_cast<std::size_t>(j)] ==
              doctest::Approx(basis.terms[static_cast<std::size_t>(j)].mu.weights.sum()));

    // at x inside: sum sigma2 g^2 equals the pairing with the box indicator
    const double x = 0.77;
    const auto gs = process_expansion(basis, {x, 0.0});
    double acc = 0.0;
    for (int j = 0; j < basis.rank(); ++j)
        acc += basis.terms[static_cast<std::size_t>(j)].sigma2 *
               gs[static_cast<std::size_t>(j)] * gs[static_cast<std::size_t>(j)];
    Eigen::VectorXd ind(32);
    for (int i = 0; i < 32; ++i)
        ind[i] = s.grid->coord(static_cast<std::size_t>(i), 0) <= x ? 1.0 : 0.0;
    const double direct = quad_form(c, {s.grid, ind});
    CHECK(std::abs(acc - direct) <= 1e-6 * total_variation(c));
}

TEST_CASE("regulated expansion with identity regulator matches the plain one") {
    Setup s;
    oracle::Gen gen(49);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto plain = kl_expand(c, s.w, 1e-10);
    const auto reg = regulated_expand(c, {s.grid, Eigen::VectorXd::Ones(32)}, s.w, 1e-10);
    REQUIRE(plain.rank() == reg.rank());
    for (int j = 0; j < plain.rank(); ++j) {
        const auto& a = plain.terms[static_cast<std::size_t>(j)];
        const auto& b = reg.terms[static_cast<std::size_t>(j)];
        CHECK(std::abs(a.sigma2 - b.sigma2) <= 1e-10 * a.sigma2);
        const double diff_plus = (a.mu.weights - b.mu.weights).cwiseAbs().maxCoeff();
        const double diff_minus = (a.mu.weights + b.mu.weights).cwiseAbs().maxCoeff();
        CHECK(std::min(diff_plus, diff_minus) <=
              1e-8 * a.mu.weights.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("regulated expansion rescales the inner problem but rebuilds C") {
    Setup s;
    oracle::Gen gen(50);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    const auto plain = kl_expand(c, s.w, 0.0);
    const auto reg = regulated_expand(c, {s.grid, Eigen::VectorXd::Constant(32, 2.0)}, s.w, 0.0);
    REQUIRE(plain.rank() == reg.rank());
    for (int j = 0; j < plain.rank(); ++j)
        CHECK(reg.terms[static_cast<std::size_t>(j)].sigma2 ==
              doctest::Approx(plain.terms[static_cast<std::size_t>(j)].sigma2 / 4.0)
                  .epsilon(1e-9));
    const auto rec = reconstruct_covariance(reg, reg.rank());
    CHECK((rec.weights - c.weights).cwiseAbs().maxCoeff() <=
          1e-8 * c.weights.cwiseAbs().maxCoeff());
}

TEST_CASE("regulated expansion of an orthogonal covariance with polynomial regulator") {
    Setup s;
    // control measure: positive weights proportional to 1 + |x|
    Eigen::VectorXd control(32);
    for (int i = 0; i < 32; ++i)
        control[i] = (1.0 + std::abs(s.grid->coord(static_cast<std::size_t>(i), 0))) / 32.0;
    const auto c = orthogonal_cov({s.grid, control});

    Eigen::VectorXd f(32);
    for (int i = 0; i < 32; ++i) {
        const double x = s.grid->coord(static_cast<std::size_t>(i), 0);
        f[i] = 1.0 + x * x;
    }
    const auto basis = regulated_expand(c, {s.grid, f}, s.w, 0.0);
    const auto rec = reconstruct_covariance(basis, basis.rank());
    CHECK((rec.weights - c.weights).cwiseAbs().maxCoeff() <=
          1e-6 * c.weights.cwiseAbs().maxCoeff());
    // each mu_j divided by the regulator keeps finite total variation
    for (const auto& t : basis.terms) {
        const GridMeasure inner{s.grid, t.mu.weights.cwiseQuotient(f)};
        CHECK(std::isfinite(total_variation(inner)));
    }
}

TEST_CASE("regulated expansion rejects nonpositive regulators") {
    Setup s;
    oracle::Gen gen(51);
    const CovarianceGridMeasure c{s.grid, gen.psd(32)};
    Eigen::VectorXd f = Eigen::VectorXd::Ones(32);
    f[7] = 0.0;
    CHECK_THROWS_WITH_AS(regulated_expand(c, {s.grid, f}, s.w, 1e-12),
                         "regulator not strictly positive", NumericError);
}

TEST_CASE("plane-grid expansion reconstructs a structured covariance") {
    auto g = make_grid({-3.0, -2.0}, {3.0, 4.0}, {8, 8});
    const auto w = build_weight_measure(g);
    oracle::Gen gen(52);
    // positive combination of a few separable pair measures
    Eigen::MatrixXd cw = Eigen::MatrixXd::Zero(64, 64);
    for (int k = 0; k < 4; ++k) {
        const Eigen::VectorXd m = gen.uniform(64);
        cw.noalias() += (0.5 + 0.25 * k) * (m * m.transpose());
    }
    const CovarianceGridMeasure c{g, cw};
    const auto basis = kl_expand(c, w, 1e-10);
    REQUIRE(basis.rank() == 4);

    const auto rec = reconstruct_covariance(basis, basis.rank());
    CHECK((rec.weights - c.weights).cwiseAbs().maxCoeff() <=
          1e-6 * c.weights.cwiseAbs().maxCoeff());
    for (const auto& t : basis.terms) {
        const double err = (antiderivative(t.mu).values - t.f.values).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-6 * t.f.values.cwiseAbs().maxCoeff());
    }
    // trace chain with the squared plane constant
    const double tr = trace_bound(c, w);
    double lam_sum = 0.0;
    for (const auto& t : basis.terms) lam_sum += t.sigma2;
    CHECK(lam_sum <= tr + 1e-8 * tr);
    CHECK(tr <= total_variation(c) * std::pow(std::numbers::pi / 2.0, 2) + 1e-6);
}
