#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rmkl/expansion.hpp"
#include "rmkl/grid.hpp"
#include "rmkl/measure.hpp"
#include "rmkl/simulate.hpp"
#include "rmkl/spectral.hpp"

namespace rmkl {

/// JSON text forms. Numeric arrays round-trip bit-exactly for finite
/// doubles; non-finite data is rejected before writing. Key order and
/// number formatting are deterministic so emitted files are diffable.
std::string to_json(const GridMeasure& mu);
std::string to_json(const CovarianceGridMeasure& c);
std::string to_json(const EigenSystem& eig);
std::string to_json(const KLBasis& basis);

GridMeasure grid_measure_from_json(const std::string& text);
CovarianceGridMeasure covariance_from_json(const std::string& text);
EigenSystem eigen_system_from_json(const std::string& text);
KLBasis kl_basis_from_json(const std::string& text);

/// Decimal text with 17 significant digits; parses back to the same bits.
std::string format_double(double v);

/// CSV of realizations: header row carries node coordinates (axis values
/// joined with '|' for d = 2), then one row per path. The header is present
/// even for an empty path list.
std::string paths_to_csv(const GridPtr& grid, const std::vector<SamplePath>& paths);
std::vector<SamplePath> paths_from_csv(const std::string& csv, const GridPtr& grid,
                                       std::uint64_t seed);

/// Seed sidecar recorded next to a paths CSV.
std::string paths_sidecar_json(const RngSpec& rng, const GridPtr& grid, int count);

/// Write-temp-then-rename so partial output never lands under the final name.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

} // namespace rmkl
