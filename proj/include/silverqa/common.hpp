#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace silverqa {

// Malformed or inconsistent input data (bad record, duplicate id, dangling
// reference, unreadable file). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure during training or scoring (divergence, non-finite loss).
// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or command usage. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, 64 bit. Used for OOV hash buckets and seed derivation; the
// constants are fixed so hashed ids are stable across builds and platforms.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= static_cast<uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// --- little-endian binary I/O -----------------------------------------------
// All serialized artifacts are explicitly little-endian so files move between
// machines.

inline void write_u32le(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64le(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f32le(std::ostream& os, float v) {
  uint32_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  __builtin_memcpy(&bits, &v, sizeof(bits));
  write_u32le(os, bits);
}

inline void write_f64le(std::ostream& os, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  __builtin_memcpy(&bits, &v, sizeof(bits));
  write_u64le(os, bits);
}

inline uint32_t read_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw DataError("unexpected end of file while reading u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw DataError("unexpected end of file while reading u64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float read_f32le(std::istream& is) {
  uint32_t bits = read_u32le(is);
  float v;
  __builtin_memcpy(&v, &bits, sizeof(v));
  return v;
}

inline double read_f64le(std::istream& is) {
  uint64_t bits = read_u64le(is);
  double v;
  __builtin_memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void write_string(std::ostream& os, std::string_view s) {
  write_u32le(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  uint32_t n = read_u32le(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw DataError("unexpected end of file while reading string");
  return s;
}

}  // namespace silverqa
