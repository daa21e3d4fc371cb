#pragma once

#include <filesystem>
#include <string>

#include "ness/gaussian_lindblad.hpp"

namespace ness::io {

/// 8-byte magic of covariance dumps, followed by the dimension as uint64 and
/// n*n row-major doubles, all little-endian.
inline constexpr char kCovarianceMagic[8] = {'N', 'E', 'S', 'S', 'C', 'O', 'V', '1'};

void write_covariance(const std::filesystem::path& path, const MajoranaCovariance& cov);
MajoranaCovariance read_covariance(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// %.17g, round-trips every double.
std::string format_double(double v);

}  // namespace ness::io
