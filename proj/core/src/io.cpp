#include "ness/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ness/error.hpp"

namespace ness::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

[[noreturn]] void io_error(const std::string& where, const std::filesystem::path& p, const std::string& what) {
  throw Error(ErrorKind::Io, where, p.string() + ": " + what);
}

}  // namespace

void write_covariance(const std::filesystem::path& path, const MajoranaCovariance& cov) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error("write_covariance", path, "cannot open for writing");
  const std::uint64_t n = to_little(static_cast<std::uint64_t>(cov.size()));
  out.write(kCovarianceMagic, sizeof kCovarianceMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Eigen::Index i = 0; i < cov.size(); ++i)
    for (Eigen::Index j = 0; j < cov.size(); ++j) {
      const double v = to_little(cov.omega(i, j));
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!out) io_error("write_covariance", path, "write failed");
}

MajoranaCovariance read_covariance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("read_covariance", path, "cannot open for reading");
  char magic[8];
  std::uint64_t n = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || std::memcmp(magic, kCovarianceMagic, sizeof magic) != 0) io_error("read_covariance", path, "bad header");
  n = to_little(n);
  if (n > (1u << 16)) io_error("read_covariance", path, "implausible dimension");
  RMatrix omega(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < omega.rows(); ++i)
    for (Eigen::Index j = 0; j < omega.cols(); ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      omega(i, j) = to_little(v);
    }
  if (!in) io_error("read_covariance", path, "truncated payload");
  return {omega};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) io_error("write_text", path, "cannot open for writing");
  out << text;
  if (!out) io_error("write_text", path, "write failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_error("read_text", path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ness::io
