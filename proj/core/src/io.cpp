#include "rmkl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rmkl/errors.hpp"

namespace rmkl {

namespace {

using nlohmann::json;

json grid_to_json(const Grid& g) {
    json out;
    out["dim"] = g.dim();
    json lower = json::array(), upper = json::array(), nodes = json::array();
    for (int a = 0; a < g.dim(); ++a) {
        lower.push_back(g.lower(a));
        upper.push_back(g.upper(a));
        nodes.push_back(g.nodes_per_axis(a));
    }
    out["lower"] = lower;
    out["upper"] = upper;
    out["nodes_per_axis"] = nodes;
    return out;
}

GridPtr grid_from_json(const json& j) {
    if (!j.is_object())
        throw ConfigError("grid entry must be an object");
    const auto lower = j.at("lower").get<std::vector<double>>();
    const auto upper = j.at("upper").get<std::vector<double>>();
    const auto nodes = j.at("nodes_per_axis").get<std::vector<int>>();
    if (j.contains("dim") && j.at("dim").get<int>() != static_cast<int>(lower.size()))
        throw ConfigError("grid dim field disagrees with axis arrays");
    return make_grid(lower, upper, nodes);
}

json vector_to_json(const Eigen::VectorXd& v) {
    if (!v.allFinite())
        throw NumericError("non-finite measure");
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index expected) {
    if (!j.is_array())
        throw ConfigError("weights entry must be an array");
    if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected)
        throw ConfigError("weights length does not match grid node count");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const auto& e = j[static_cast<std::size_t>(i)];
        if (!e.is_number())
            throw ConfigError("weights must be numbers");
        v[i] = e.get<double>();
    }
    if (!v.allFinite())
        throw ConfigError("weights must be finite");
    return v;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what()); // carries byte position of the failure
    }
}

// missing keys and wrong value types surface as ConfigError, not aborts
template <typename F>
auto guarded(F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

std::string to_json(const GridMeasure& mu) {
    json out;
    out["grid"] = grid_to_json(*mu.grid);
    out["weights"] = vector_to_json(mu.weights);
    return out.dump();
}

std::string to_json(const CovarianceGridMeasure& c) {
    json out;
    out["grid"] = grid_to_json(*c.grid);
    // Eigen stores column-major; emit row-major as the schema requires
    json arr = json::array();
    for (Eigen::Index i = 0; i < c.weights.rows(); ++i)
        for (Eigen::Index k = 0; k < c.weights.cols(); ++k) {
            if (!std::isfinite(c.weights(i, k)))
                throw NumericError("non-finite measure");
            arr.push_back(c.weights(i, k));
        }
    out["weights"] = arr;
    return out.dump();
}

GridMeasure grid_measure_from_json(const std::string& text) {
    return guarded([&] {
        const json j = parse(text);
        GridPtr grid = grid_from_json(j.at("grid"));
        Eigen::VectorXd w = vector_from_json(
            j.at("weights"), static_cast<Eigen::Index>(grid->node_count()));
        return GridMeasure{std::move(grid), std::move(w)};
    });
}

CovarianceGridMeasure covariance_from_json(const std::string& text) {
    return guarded([&] {
        const json j = parse(text);
        GridPtr grid = grid_from_json(j.at("grid"));
        const auto n = static_cast<Eigen::Index>(grid->node_count());
        const Eigen::VectorXd flat = vector_from_json(j.at("weights"), n * n);
        Eigen::MatrixXd w(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < n; ++k) w(i, k) = flat[i * n + k];
        return CovarianceGridMeasure{grid, std::move(w)};
    });
}

std::string to_json(const EigenSystem& eig) {
    json out;
    out["eigenvalues"] = vector_to_json(eig.eigenvalues);
    json funcs = json::array();
    for (const auto& f : eig.eigenfunctions) funcs.push_back(vector_to_json(f.values));
    out["eigenfunctions"] = funcs;
    out["grid"] = grid_to_json(*eig.grid);
    out["nu"] = "p-default";
    return out.dump();
}

EigenSystem eigen_system_from_json(const std::string& text) {
    return guarded([&] {
        const json j = parse(text);
        GridPtr grid = grid_from_json(j.at("grid"));
        if (j.value("nu", "p-default") != std::string("p-default"))
            throw ConfigError("unknown weight measure tag");
        const auto n = static_cast<Eigen::Index>(grid->node_count());
        Eigen::VectorXd values = vector_from_json(j.at("eigenvalues"), -1);
        EigenSystem eig{grid, std::move(values), {}};
        for (const auto& f : j.at("eigenfunctions")) {
            Eigen::VectorXd fv = vector_from_json(f, n);
            eig.eigenfunctions.push_back({grid, std::move(fv)});
        }
        if (static_cast<Eigen::Index>(eig.eigenfunctions.size()) != eig.eigenvalues.size())
            throw ConfigError("eigenvalue and eigenfunction counts differ");
        return eig;
    });
}

std::string to_json(const KLBasis& basis) {
    json out;
    json terms = json::array();
    for (const auto& t : basis.terms) {
        json term;
        term["sigma2"] = t.sigma2;
        term["mu_weights"] = vector_to_json(t.mu.weights);
        term["f_values"] = vector_to_json(t.f.values);
        terms.push_back(term);
    }
    out["terms"] = terms;
    out["grid"] = grid_to_json(*basis.grid);
    out["nu"] = "p-default";
    out["source_tv"] = basis.source_tv;
    out["rank_tol"] = basis.rank_tol;
    if (basis.regulator) out["regulator"] = vector_to_json(basis.regulator->values);
    return out.dump();
}

KLBasis kl_basis_from_json(const std::string& text) {
    return guarded([&] {
        const json j = parse(text);
        GridPtr grid = grid_from_json(j.at("grid"));
        if (j.value("nu", "p-default") != std::string("p-default"))
            throw ConfigError("unknown weight measure tag");
        const auto n = static_cast<Eigen::Index>(grid->node_count());
        KLBasis basis{grid, build_weight_measure(grid), {}, 0.0, kDefaultRankTol, std::nullopt};
        basis.source_tv = j.value("source_tv", 0.0);
        basis.rank_tol = j.value("rank_tol", kDefaultRankTol);
        for (const auto& t : j.at("terms")) {
            const double sigma2 = t.at("sigma2").get<double>();
            Eigen::VectorXd mw = vector_from_json(t.at("mu_weights"), n);
            Eigen::VectorXd fv = vector_from_json(t.at("f_values"), n);
            basis.terms.push_back(
                {sigma2, {grid, std::move(mw)}, {grid, std::move(fv)}});
        }
        if (j.contains("regulator")) {
            Eigen::VectorXd rv = vector_from_json(j.at("regulator"), n);
            basis.regulator = GridFunction{grid, std::move(rv)};
        }
        return basis;
    });
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string paths_to_csv(const GridPtr& grid, const std::vector<SamplePath>& paths) {
    std::ostringstream out;
    const Grid& g = *grid;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (i) out << ',';
        out << format_double(g.coord(i, 0));
        for (int a = 1; a < g.dim(); ++a) out << '|' << format_double(g.coord(i, a));
    }
    out << '\n';
    for (const auto& p : paths) {
        for (Eigen::Index i = 0; i < p.atom_values.size(); ++i) {
            if (i) out << ',';
            out << format_double(p.atom_values[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<SamplePath> paths_from_csv(const std::string& csv, const GridPtr& grid,
                                       std::uint64_t seed) {
    std::vector<SamplePath> out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    std::uint64_t index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(grid->node_count()));
        std::istringstream cells(line);
        std::string cell;
        Eigen::Index i = 0;
        while (std::getline(cells, cell, ',')) {
            if (i >= v.size())
                throw ConfigError("paths CSV row longer than node count");
            v[i++] = std::strtod(cell.c_str(), nullptr);
        }
        if (i != v.size())
            throw ConfigError("paths CSV row shorter than node count");
        out.push_back({grid, std::move(v), seed, index++});
    }
    return out;
}

std::string paths_sidecar_json(const RngSpec& rng, const GridPtr& grid, int count) {
    json out;
    out["seed"] = rng.seed;
    out["algorithm"] = rng.algorithm;
    out["count"] = count;
    out["grid"] = grid_to_json(*grid);
    return out.dump();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace rmkl
