// stsb/stbf.hpp

// Copyright 2026  The stsb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef STSB_STBF_HPP
#define STSB_STBF_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <zlib.h>

#include "json.hpp"
#include "stsb/error.hpp"
#include "stsb/types.hpp"

// STBF tensor frame:
//   "STBF" | u16 version | u8 dtype | u8 ndims | ndims x u64 shape |
//   payload (row-major) | u32 CRC-32 of payload
// All integers and values little-endian.

namespace stsb {

static_assert(std::endian::native == std::endian::little, "STBF I/O assumes a little-endian host");

inline constexpr std::uint16_t kStbfVersion = 1;

enum class Dtype : std::uint8_t { F32 = 1, F64 = 2 };

inline std::size_t dtype_size(Dtype d) { return d == Dtype::F32 ? 4 : 8; }

struct StbfArray {
  Dtype dtype = Dtype::F64;
  std::vector<std::uint64_t> shape;
  std::string payload;  // raw little-endian values

  std::uint64_t count() const {
    return std::accumulate(shape.begin(), shape.end(), std::uint64_t{1}, std::multiplies<>());
  }

  template <class T>
  static StbfArray from_matrix(const Mat<T> &m) {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    StbfArray a;
    a.dtype = std::is_same_v<T, float> ? Dtype::F32 : Dtype::F64;
    a.shape = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    a.payload.assign(reinterpret_cast<const char *>(rm.data()), static_cast<std::size_t>(rm.size()) * sizeof(T));
    return a;
  }

  template <class T>
  static StbfArray from_vector(const std::vector<T> &v) {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    StbfArray a;
    a.dtype = std::is_same_v<T, float> ? Dtype::F32 : Dtype::F64;
    a.shape = {static_cast<std::uint64_t>(v.size())};
    a.payload.assign(reinterpret_cast<const char *>(v.data()), v.size() * sizeof(T));
    return a;
  }

  /// Values converted to T; one-dimensional arrays come back as a row.
  template <class T>
  Mat<T> matrix() const {
    require(shape.size() == 1 || shape.size() == 2, ErrorKind::Shape,
            "expected a 1-D or 2-D array, got " + std::to_string(shape.size()) + "-D");
    const auto rows = static_cast<Index>(shape.size() == 1 ? 1 : shape[0]);
    const auto cols = static_cast<Index>(shape.back());
    Mat<T> m(rows, cols);
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    if (dtype == Dtype::F32) {
      std::vector<float> v(n);
      std::memcpy(v.data(), payload.data(), n * 4);
      for (std::size_t i = 0; i < n; ++i) m(static_cast<Index>(i) / cols, static_cast<Index>(i) % cols) = static_cast<T>(v[i]);
    } else {
      std::vector<double> v(n);
      std::memcpy(v.data(), payload.data(), n * 8);
      for (std::size_t i = 0; i < n; ++i) m(static_cast<Index>(i) / cols, static_cast<Index>(i) % cols) = static_cast<T>(v[i]);
    }
    return m;
  }

  template <class T>
  std::vector<T> values() const {
    const Mat<T> m = matrix<T>();
    std::vector<T> v(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return v;
  }

  bool operator==(const StbfArray &) const = default;
};

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    c = crc32(c, reinterpret_cast<const Bytef *>(bytes.data() + off), static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(c);
}

namespace detail {

template <class U>
void put_le(std::string &out, U v) {
  char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  out.append(b, sizeof(U));
}

template <class U>
U get_le(std::string_view in, std::size_t &pos, const char *what) {
  require(pos + sizeof(U) <= in.size(), ErrorKind::Format, std::string("truncated STBF frame (") + what + ")");
  U v;
  std::memcpy(&v, in.data() + pos, sizeof(U));
  pos += sizeof(U);
  return v;
}

}  // namespace detail

inline std::string encode_stbf(const StbfArray &a) {
  require(a.shape.size() <= 255, ErrorKind::Shape, "too many dimensions for STBF");
  require(a.payload.size() == a.count() * dtype_size(a.dtype), ErrorKind::Shape,
          "payload length does not match shape");
  std::string out = "STBF";
  detail::put_le<std::uint16_t>(out, kStbfVersion);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(a.dtype));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(a.shape.size()));
  for (std::uint64_t d : a.shape) detail::put_le<std::uint64_t>(out, d);
  out += a.payload;
  detail::put_le<std::uint32_t>(out, crc32_of(a.payload));
  return out;
}

/// Decodes the frame starting at `pos` and advances `pos` past it.
inline StbfArray decode_stbf(std::string_view in, std::size_t &pos) {
  require(in.substr(pos, 4) == "STBF", ErrorKind::Format, "bad STBF magic");
  pos += 4;
  const auto version = detail::get_le<std::uint16_t>(in, pos, "version");
  require(version == kStbfVersion, ErrorKind::Format, "unsupported STBF version " + std::to_string(version));
  StbfArray a;
  const auto dt = detail::get_le<std::uint8_t>(in, pos, "dtype");
  require(dt == 1 || dt == 2, ErrorKind::Format, "unknown STBF dtype code " + std::to_string(dt));
  a.dtype = static_cast<Dtype>(dt);
  const auto nd = detail::get_le<std::uint8_t>(in, pos, "ndims");
  for (int i = 0; i < nd; ++i) a.shape.push_back(detail::get_le<std::uint64_t>(in, pos, "shape"));
  std::uint64_t count = 1;
  for (std::uint64_t d : a.shape) {
    require(d == 0 || count <= (std::uint64_t{1} << 62) / d, ErrorKind::Format, "STBF shape overflows");
    count *= d;
  }
  const std::uint64_t len = count * dtype_size(a.dtype);
  require(len <= in.size() - pos, ErrorKind::Format, "truncated STBF payload");
  a.payload.assign(in.substr(pos, static_cast<std::size_t>(len)));
  pos += static_cast<std::size_t>(len);
  const auto crc = detail::get_le<std::uint32_t>(in, pos, "checksum");
  require(crc == crc32_of(a.payload), ErrorKind::Checksum, "STBF payload CRC mismatch");
  return a;
}

inline StbfArray decode_stbf(std::string_view in) {
  std::size_t pos = 0;
  StbfArray a = decode_stbf(in, pos);
  require(pos == in.size(), ErrorKind::Format, "trailing bytes after STBF frame");
  return a;
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path &path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::Io, "short write to " + path.string());
}

inline void write_stbf(const std::filesystem::path &path, const StbfArray &a) { write_file(path, encode_stbf(a)); }

inline StbfArray read_stbf(const std::filesystem::path &path) {
  try {
    return decode_stbf(read_file(path));
  } catch (const Error &e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

/// Checkpoint: "STBFCKPT" | u64 header length | JSON header | one STBF frame
/// per entry of header["tensors"], in that order.
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, StbfArray>> tensors;

  const StbfArray &at(const std::string &name) const {
    for (const auto &[n, a] : tensors)
      if (n == name) return a;
    fail(ErrorKind::Format, "checkpoint has no tensor '" + name + "'");
  }
};

inline std::string encode_checkpoint(const Checkpoint &ck) {
  nlohmann::json h = ck.header;
  h["tensors"] = nlohmann::json::array();
  for (const auto &[name, a] : ck.tensors) h["tensors"].push_back(name);
  const std::string js = h.dump();
  std::string out = "STBFCKPT";
  detail::put_le<std::uint64_t>(out, js.size());
  out += js;
  for (const auto &[name, a] : ck.tensors) out += encode_stbf(a);
  return out;
}

inline Checkpoint decode_checkpoint(std::string_view in) {
  require(in.substr(0, 8) == "STBFCKPT", ErrorKind::Format, "bad checkpoint magic");
  std::size_t pos = 8;
  const auto len = detail::get_le<std::uint64_t>(in, pos, "header length");
  require(len <= in.size() - pos, ErrorKind::Format, "truncated checkpoint header");
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(in.substr(pos, static_cast<std::size_t>(len)));
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::Format, std::string("checkpoint header: ") + e.what());
  }
  pos += static_cast<std::size_t>(len);
  require(ck.header.contains("tensors") && ck.header["tensors"].is_array(), ErrorKind::Format,
          "checkpoint header lacks a tensor list");
  for (const auto &name : ck.header["tensors"]) ck.tensors.emplace_back(name.get<std::string>(), decode_stbf(in, pos));
  require(pos == in.size(), ErrorKind::Format, "trailing bytes after checkpoint");
  ck.header.erase("tensors");
  return ck;
}

inline void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ck) {
  write_file(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path &path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const Error &e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace stsb

#endif  // STSB_STBF_HPP
