#pragma once

#include <filesystem>
#include <iosfwd>

#include "facies/cae.hpp"

namespace facies {

/// Binary model checkpoint, all integers u32 and reals f64, little-endian:
///
///   8 bytes   magic "FCAECKP1"
///   u32       format version (1)
///   u32 x3    input shape c, h, w
///   u32       unpool mode (0 random, 1 recorded)
///   u32       layer count L
///   L times:  u32 c, u32 n, u32 k, u32 flags, f64 slope
///             flags bit 0: layer pools, bit 1: leaky decoder activation
///   L times:  f64[c*n*n*k] filters ([c,n,n,k] row-major),
///             f64[k] encoder bias, f64[c] decoder bias
inline constexpr char kCheckpointMagic[8] = {'F', 'C', 'A', 'E', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const CaeModel& model);
CaeModel read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const CaeModel& model);
CaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace facies
