#pragma once

#include "dpsignal/dp_mcmc.hpp"

#include <filesystem>
#include <iosfwd>

namespace dpsignal {

// Binary draws archive, little-endian:
//   "DPSDRAW1" | u32 version | u64 n_draws | u64 rows | u64 cols |
//   n_draws * rows * cols f64, draw-major, each draw row-major.
inline constexpr std::uint32_t kArchiveVersion = 1;

void write_draws(std::ostream &out, const PosteriorDraws &draws);
PosteriorDraws read_draws(std::istream &in);
void save_draws(const std::filesystem::path &path, const PosteriorDraws &draws);
PosteriorDraws load_draws(const std::filesystem::path &path);

} // namespace dpsignal
