#pragma once

// Byte-order-safe binary primitives for the checkpoint and index formats
// (payloads are explicitly little-endian).

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dualenc::wire {

inline void put_u32(std::ostream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline void put_f64(std::ostream& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  put_u64(out, bits);
}

inline void put_f32(std::ostream& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  put_u32(out, bits);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[noreturn]] inline void fail_truncated(const std::string& what) {
  throw std::runtime_error("truncated file: unexpected end while reading " + what);
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) fail_truncated(what);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return value;
}

inline std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) fail_truncated(what);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

inline double get_f64(std::istream& in, const char* what) {
  std::uint64_t bits = get_u64(in, what);
  double value;
  std::memcpy(&value, &bits, 8);
  return value;
}

inline float get_f32(std::istream& in, const char* what) {
  std::uint32_t bits = get_u32(in, what);
  float value;
  std::memcpy(&value, &bits, 4);
  return value;
}

inline std::string get_string(std::istream& in, const char* what) {
  const std::uint32_t len = get_u32(in, what);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) fail_truncated(what);
  return s;
}

}  // namespace dualenc::wire
