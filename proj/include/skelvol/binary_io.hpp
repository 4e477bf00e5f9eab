#pragma once

// Little-endian primitive encoding shared by the sequence, volume and
// checkpoint formats. Encoding goes through integer bit patterns so files
// are identical regardless of host byte order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "skelvol/error.hpp"

namespace skelvol::binio {

template <typename U>
void put_uint(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_uint(std::istream& in) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw Error(ErrorCode::IoError, "unexpected end of stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

inline void put_u8(std::ostream& out, std::uint8_t v) { put_uint<std::uint8_t>(out, v); }
inline void put_u32(std::ostream& out, std::uint32_t v) { put_uint(out, v); }
inline void put_i32(std::ostream& out, std::int32_t v) { put_uint(out, static_cast<std::uint32_t>(v)); }
inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint8_t get_u8(std::istream& in) { return get_uint<std::uint8_t>(in); }
inline std::uint32_t get_u32(std::istream& in) { return get_uint<std::uint32_t>(in); }
inline std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_uint<std::uint32_t>(in)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_uint<std::uint32_t>(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_uint<std::uint64_t>(in)); }

template <typename T>
void put_real(std::ostream& out, T v) {
  if constexpr (sizeof(T) == 4) put_f32(out, v);
  else put_f64(out, v);
}

template <typename T>
T get_real(std::istream& in) {
  if constexpr (sizeof(T) == 4) return get_f32(in);
  else return get_f64(in);
}

inline void put_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

/// Reads magic.size() bytes; truncation is IoError, a mismatch VersionMismatch.
inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size()))) throw Error(ErrorCode::IoError, "unexpected end of stream");
  if (got != magic) throw Error(ErrorCode::VersionMismatch, "bad magic bytes, expected '" + std::string(magic) + "'");
}

}  // namespace skelvol::binio
