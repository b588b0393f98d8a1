#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Little-endian binary primitives and round-trip-safe text formatting.
// All file formats in this project are pinned to little-endian byte order
// regardless of host, so archives are bit-exact across machines.

namespace voxnav {

inline void io_fail(const std::string& what) { throw std::runtime_error(what); }

template <typename T>
inline void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
inline T read_le(std::istream& is) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) io_fail("unexpected end of binary stream");
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_le<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  const uint32_t n = read_le<uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) io_fail("unexpected end of binary stream while reading string");
  return s;
}

/// Formats a double so that parsing it back yields the identical bits.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) io_fail("double formatting failed");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& s, const std::string& context = "input") {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    io_fail("could not parse number '" + s + "' in " + context);
  return v;
}

inline long long parse_int(const std::string& s, const std::string& context = "input") {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    io_fail("could not parse integer '" + s + "' in " + context);
  return v;
}

/// Seeds use the full 64-bit range, so they get their own parser.
inline uint64_t parse_uint64(const std::string& s, const std::string& context = "input") {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    io_fail("could not parse integer '" + s + "' in " + context);
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::ofstream open_out_binary(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail("cannot open for reading: " + path);
  return is;
}

}  // namespace voxnav
