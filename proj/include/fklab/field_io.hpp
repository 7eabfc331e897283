#pragma once

#include <filesystem>
#include <string>

#include "fklab/lattice.hpp"

namespace fklab {

/// Field files carry a header (n, eps, lateral_halfwidth, height, time)
/// followed by the values in the fixed index order (i_n slowest).
/// CSV form is one header line then one value per line at 17 significant
/// digits; binary form is the magic "FKF1" followed by the same data raw.

void save_field_csv(const LatticeField& f, const std::filesystem::path& path);
LatticeField load_field_csv(const std::filesystem::path& path);

void save_field_binary(const LatticeField& f, const std::filesystem::path& path);
LatticeField load_field_binary(const std::filesystem::path& path);

/// Formats one double so that parsing it back reproduces the exact value.
std::string format_full(double v);

}  // namespace fklab
