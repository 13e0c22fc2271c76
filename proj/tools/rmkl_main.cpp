#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmkl/errors.hpp"
#include "rmkl/expansion.hpp"
#include "rmkl/expression.hpp"
#include "rmkl/io.hpp"
#include "rmkl/measure.hpp"
#include "rmkl/regularizer.hpp"
#include "rmkl/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

struct JobConfig {
    std::string command;
    rmkl::GridPtr grid; // may stay null when the covariance file carries it

    std::optional<fs::path> cov_file;
    std::optional<std::string> builtin;
    std::vector<double> window_lower, window_upper;
    std::optional<fs::path> control_file;
    std::optional<fs::path> measure_file;

    std::optional<std::string> regulator_text;
    double rank_tol = rmkl::kDefaultRankTol;
    std::uint64_t seed = 0;
    int n_paths = 1000;
    int n_test_functions = 10;
    std::optional<fs::path> basis_file;
    fs::path out_dir = ".";
    bool verbose = false;
};

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw rmkl::ConfigError(e.what());
    }
}

rmkl::GridPtr grid_from_config(const json& g) {
    if (!g.is_object())
        throw rmkl::ConfigError("config: grid must be an object");
    if (!g.contains("nodes_per_axis"))
        throw rmkl::ConfigError("config: grid.nodes_per_axis is required");
    const auto nodes = g.at("nodes_per_axis").get<std::vector<int>>();
    const int dim = g.value("dim", static_cast<int>(nodes.size()));
    if (dim != static_cast<int>(nodes.size()))
        throw rmkl::ConfigError("config: grid.dim disagrees with nodes_per_axis");
    std::vector<double> lower(static_cast<std::size_t>(dim), -5.0);
    std::vector<double> upper(static_cast<std::size_t>(dim), 5.0);
    if (g.contains("lower")) lower = g.at("lower").get<std::vector<double>>();
    if (g.contains("upper")) upper = g.at("upper").get<std::vector<double>>();
    return rmkl::make_grid(lower, upper, nodes);
}

JobConfig load_config(const fs::path& path) {
    const json j = parse_json(rmkl::read_file(path));
    JobConfig cfg;
    if (!j.contains("command"))
        throw rmkl::ConfigError("config: command is required");
    cfg.command = j.at("command").get<std::string>();
    if (cfg.command != "expand" && cfg.command != "simulate" && cfg.command != "verify" &&
        cfg.command != "report")
        throw rmkl::ConfigError("config: unknown command '" + cfg.command + "'");

    if (j.contains("grid")) cfg.grid = grid_from_config(j.at("grid"));

    if (!j.contains("covariance") || !j.at("covariance").is_object())
        throw rmkl::ConfigError("config: covariance source is required");
    const json& cov = j.at("covariance");
    int sources = 0;
    if (cov.contains("file")) {
        cfg.cov_file = fs::path(cov.at("file").get<std::string>());
        ++sources;
    }
    if (cov.contains("builtin")) {
        cfg.builtin = cov.at("builtin").get<std::string>();
        ++sources;
        if (*cfg.builtin == "white_noise") {
            if (!cov.contains("window"))
                throw rmkl::ConfigError("config: white_noise needs a window");
            cfg.window_lower = cov.at("window").at("lower").get<std::vector<double>>();
            cfg.window_upper = cov.at("window").at("upper").get<std::vector<double>>();
        } else if (*cfg.builtin == "orthogonal") {
            cfg.control_file = fs::path(cov.at("control").get<std::string>());
        } else if (*cfg.builtin == "rank1") {
            cfg.measure_file = fs::path(cov.at("measure").get<std::string>());
        } else {
            throw rmkl::ConfigError("config: unknown builtin '" + *cfg.builtin + "'");
        }
    }
    if (sources != 1)
        throw rmkl::ConfigError("config: exactly one covariance source required");

    if (j.contains("regulator")) cfg.regulator_text = j.at("regulator").get<std::string>();
    cfg.rank_tol = j.value("rank_tol", rmkl::kDefaultRankTol);
    if (!(cfg.rank_tol >= 0.0))
        throw rmkl::ConfigError("config: rank_tol must be nonnegative");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.n_paths = j.value("n_paths", 1000);
    if (cfg.n_paths < 0)
        throw rmkl::ConfigError("config: n_paths must be nonnegative");
    cfg.n_test_functions = j.value("n_test_functions", 10);
    if (cfg.n_test_functions < 1)
        throw rmkl::ConfigError("config: n_test_functions must be positive");
    if (j.contains("basis")) cfg.basis_file = fs::path(j.at("basis").get<std::string>());
    if (j.contains("out")) cfg.out_dir = fs::path(j.at("out").get<std::string>());
    return cfg;
}

rmkl::CovarianceGridMeasure resolve_covariance(JobConfig& cfg) {
    if (cfg.cov_file) {
        auto c = rmkl::covariance_from_json(rmkl::read_file(*cfg.cov_file));
        if (cfg.grid && !cfg.grid->same_as(*c.grid))
            throw rmkl::ConfigError("config: grid disagrees with covariance file grid");
        cfg.grid = c.grid;
        return c;
    }
    if (*cfg.builtin == "white_noise") {
        if (!cfg.grid)
            throw rmkl::ConfigError("config: builtin covariance needs a grid");
        return rmkl::white_noise_cov(cfg.grid, cfg.window_lower, cfg.window_upper);
    }
    const auto warn_on_edge_mass = [](const rmkl::GridMeasure& m) {
        if (rmkl::boundary_mass_fraction(m) > 0.01)
            std::cerr << "warning: more than 1% of the measure mass sits on the "
                         "outermost cell layer; consider a larger box\n";
    };
    if (*cfg.builtin == "orthogonal") {
        auto control = rmkl::grid_measure_from_json(rmkl::read_file(*cfg.control_file));
        if (cfg.grid && !cfg.grid->same_as(*control.grid))
            throw rmkl::ConfigError("config: grid disagrees with control measure grid");
        cfg.grid = control.grid;
        warn_on_edge_mass(control);
        return rmkl::orthogonal_cov(control);
    }
    auto m = rmkl::grid_measure_from_json(rmkl::read_file(*cfg.measure_file));
    if (cfg.grid && !cfg.grid->same_as(*m.grid))
        throw rmkl::ConfigError("config: grid disagrees with measure file grid");
    cfg.grid = m.grid;
    warn_on_edge_mass(m);
    return rmkl::tensor(m, m);
}

rmkl::KLBasis expand_basis(JobConfig& cfg, const rmkl::CovarianceGridMeasure& c) {
    const rmkl::WeightMeasure w = rmkl::build_weight_measure(cfg.grid);
    if (cfg.regulator_text) {
        const auto expr = rmkl::Expression::parse(*cfg.regulator_text);
        return rmkl::regulated_expand(c, expr.sample(cfg.grid), w, cfg.rank_tol);
    }
    return rmkl::kl_expand(c, w, cfg.rank_tol);
}

// Deterministic test-function set: the left-half-box indicator first, then
// seeded uniform bounded functions.
std::vector<rmkl::GridFunction> test_functions(const JobConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(cfg.grid->node_count());
    std::vector<rmkl::GridFunction> phis;
    Eigen::VectorXd ind(n);
    const double mid = 0.5 * (cfg.grid->lower(0) + cfg.grid->upper(0));
    for (Eigen::Index i = 0; i < n; ++i)
        ind[i] = cfg.grid->coord(static_cast<std::size_t>(i), 0) <= mid ? 1.0 : 0.0;
    phis.push_back({cfg.grid, ind});
    for (int k = 1; k < cfg.n_test_functions; ++k) {
        rmkl::CounterRng gen(cfg.seed ^ 0x7e57f0ull, static_cast<std::uint64_t>(k));
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = 2.0 * gen.uniform(static_cast<std::uint64_t>(i)) - 1.0;
        phis.push_back({cfg.grid, v});
    }
    return phis;
}

int cmd_expand(JobConfig& cfg) {
    const auto c = resolve_covariance(cfg);
    const auto basis = expand_basis(cfg, c);
    if (basis.rank() == 0)
        std::cerr << "warning: zero covariance, basis is empty\n";
    rmkl::write_file_atomic(cfg.out_dir / "basis.json", rmkl::to_json(basis));
    std::ostringstream csv;
    csv << "j,sigma2,tv_mu\n";
    for (int j = 0; j < basis.rank(); ++j) {
        const auto& t = basis.terms[static_cast<std::size_t>(j)];
        csv << j << ',' << rmkl::format_double(t.sigma2) << ','
            << rmkl::format_double(rmkl::total_variation(t.mu)) << '\n';
    }
    rmkl::write_file_atomic(cfg.out_dir / "spectrum.csv", csv.str());
    if (cfg.verbose)
        std::cerr << "expand: rank " << basis.rank() << " basis written\n";
    return kExitOk;
}

int cmd_simulate(JobConfig& cfg) {
    const auto c = resolve_covariance(cfg);
    const rmkl::RngSpec rng{cfg.seed, "splitmix64-boxmuller-v1"};
    const auto paths = rmkl::sample_gaussian(c, rng, cfg.n_paths);
    rmkl::write_file_atomic(cfg.out_dir / "paths.csv", rmkl::paths_to_csv(cfg.grid, paths));
    rmkl::write_file_atomic(cfg.out_dir / "paths_meta.json",
                            rmkl::paths_sidecar_json(rng, cfg.grid, cfg.n_paths));
    if (!cfg.basis_file) return kExitOk;

    const auto basis = rmkl::kl_basis_from_json(rmkl::read_file(*cfg.basis_file));
    if (!basis.grid->same_as(*cfg.grid))
        throw rmkl::ConfigError("config: basis grid disagrees with covariance grid");
    std::ostringstream csv;
    csv << "j,sigma2,sample_var,max_offdiag_corr\n";
    if (basis.rank() > 0 && paths.size() >= 2) {
        const int r = basis.rank();
        Eigen::MatrixXd coef(static_cast<Eigen::Index>(paths.size()), r);
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const auto x = rmkl::coefficients(basis, paths[p]);
            for (int j = 0; j < r; ++j) coef(static_cast<Eigen::Index>(p), j) = x[static_cast<std::size_t>(j)];
        }
        const Eigen::RowVectorXd mean = coef.colwise().mean();
        coef.rowwise() -= mean;
        const Eigen::MatrixXd cov =
            coef.transpose() * coef / static_cast<double>(paths.size() - 1);
        for (int j = 0; j < r; ++j) {
            double worst = 0.0;
            for (int i = 0; i < r; ++i) {
                if (i == j) continue;
                const double denom = std::sqrt(cov(i, i) * cov(j, j));
                if (denom > 0.0) worst = std::max(worst, std::abs(cov(i, j)) / denom);
            }
            csv << j << ',' << rmkl::format_double(basis.terms[static_cast<std::size_t>(j)].sigma2)
                << ',' << rmkl::format_double(cov(j, j)) << ',' << rmkl::format_double(worst)
                << '\n';
        }
    }
    rmkl::write_file_atomic(cfg.out_dir / "coefficient_stats.csv", csv.str());
    return kExitOk;
}

struct VerifyOutcome {
    bool pass = true;
    std::string first_failure;
    void check(bool ok, const std::string& name) {
        if (!ok && pass) {
            pass = false;
            first_failure = name;
        }
    }
};

int run_residual_report(JobConfig& cfg, bool gate) {
    const auto c = resolve_covariance(cfg);
    if (!cfg.basis_file)
        throw rmkl::ConfigError("config: verify/report needs a basis file");
    const auto basis = rmkl::kl_basis_from_json(rmkl::read_file(*cfg.basis_file));
    if (!basis.grid->same_as(*cfg.grid))
        throw rmkl::ConfigError("config: basis grid disagrees with covariance grid");

    const auto phis = test_functions(cfg);
    const double tv_c = rmkl::total_variation(c);
    const int rank = basis.rank();

    VerifyOutcome out;
    for (int j = 0; j + 1 < rank; ++j)
        out.check(basis.terms[static_cast<std::size_t>(j)].sigma2 >=
                      basis.terms[static_cast<std::size_t>(j + 1)].sigma2,
                  "eigenvalues descending");
    for (int j = 0; j < rank; ++j)
        out.check(basis.terms[static_cast<std::size_t>(j)].sigma2 > 0.0,
                  "eigenvalues positive");

    for (int j = 0; j < rank; ++j) {
        const auto& t = basis.terms[static_cast<std::size_t>(j)];
        const auto of = rmkl::antiderivative(t.mu);
        const double scale = t.f.values.cwiseAbs().maxCoeff();
        out.check((of.values - t.f.values).cwiseAbs().maxCoeff() <= 1e-6 * scale,
                  "anti-derivative identity");
    }

    std::ostringstream csv;
    csv << "n";
    for (std::size_t k = 0; k < phis.size(); ++k) csv << ",tv_residual_phi" << k;
    csv << ",mean_square_residual,domination_pass\n";

    std::vector<double> prev_ms(phis.size(), 0.0);
    for (int n = 0; n <= rank; ++n) {
        csv << n;
        bool dominated = true;
        double ms_worst = 0.0;
        for (std::size_t k = 0; k < phis.size(); ++k) {
            const auto& phi = phis[k];
            const double tv_res = rmkl::tv_residual(basis, c, phi, n);
            csv << ',' << rmkl::format_double(tv_res);
            const double base = phi.values.dot(c.weights * phi.values);
            const double form = rmkl::reconstruct_form(basis, phi, phi, n);
            dominated = dominated && form >= -1e-8 && form <= base + 1e-8;
            const double ms = rmkl::mean_square_residual(basis, c, phi, n);
            ms_worst = std::max(ms_worst, ms);
            out.check(ms >= -1e-10, "mean-square residual nonnegative");
            if (n > 0)
                out.check(ms <= prev_ms[k] + 1e-10, "mean-square residual nonincreasing");
            prev_ms[k] = ms;
            if (n == rank) {
                out.check(tv_res <= 1e-6 * tv_c * phi.values.cwiseAbs().maxCoeff(),
                          "tv residual at full rank");
                out.check(ms <= 1e-6 * std::abs(base) + 1e-12,
                          "mean-square residual at full rank");
            }
        }
        out.check(dominated, "domination");
        csv << ',' << rmkl::format_double(ms_worst) << ',' << (dominated ? 1 : 0) << '\n';
    }

    // bilinear-form chain over distinct pairs
    for (std::size_t a = 0; a + 1 < phis.size() && a < 4; ++a) {
        const auto& phi = phis[a];
        const auto& psi = phis[a + 1];
        double lhs = 0.0;
        for (int j = 0; j < rank; ++j) {
            const auto& t = basis.terms[static_cast<std::size_t>(j)];
            lhs += t.sigma2 * std::abs(rmkl::integrate(t.mu, phi)) *
                   std::abs(rmkl::integrate(t.mu, psi));
        }
        const double rhs = std::sqrt(phi.values.dot(c.weights * phi.values)) *
                           std::sqrt(psi.values.dot(c.weights * psi.values));
        out.check(lhs <= rhs + 1e-8, "bilinear form chain");
    }

    rmkl::write_file_atomic(cfg.out_dir / "report.csv", csv.str());
    if (!gate) return kExitOk;
    if (!out.pass) {
        std::cout << "FAIL " << out.first_failure << "\n";
        return kExitVerifyFailure;
    }
    std::cout << "PASS\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orthogonal expansions of random measures on grid boxes"};
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    bool verbose = false;
    app.add_option("--config", config_path, "Job configuration JSON")->required();
    app.add_option("--out", out_override, "Output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed_override, "Seed (overrides config)");
    app.add_flag("--verbose", verbose, "Chatty progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // --help and --version exit 0; anything else is a configuration error
        return code == 0 ? kExitOk : kExitConfigError;
    }
    have_seed = seed_opt->count() > 0;

    if (const char* threads = std::getenv("RMKL_THREADS")) {
        const int cap = std::atoi(threads);
        if (cap > 0) Eigen::setNbThreads(cap);
    }

    try {
        JobConfig cfg = load_config(config_path);
        cfg.verbose = verbose;
        if (have_seed) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (!fs::is_directory(cfg.out_dir))
            throw rmkl::ConfigError("config: output directory not writable: " +
                                    cfg.out_dir.string());

        if (cfg.command == "expand") return cmd_expand(cfg);
        if (cfg.command == "simulate") return cmd_simulate(cfg);
        if (cfg.command == "verify") return run_residual_report(cfg, true);
        return run_residual_report(cfg, false);
    } catch (const rmkl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericError;
    }
}
