#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gazeload/error.hpp"

// Little-endian binary readers/writers for the GLDS/GLMN/GLRF containers.
// Byte order is explicit so files round-trip bit-exactly on any host.

namespace gazeload {

class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw GazeError(ErrorCode::IoError, "cannot open for write: " + path);
    path_ = path;
  }

  void magic(const char m[4]) { out_.write(m, 4); }

  void u8(uint8_t v) { out_.put(static_cast<char>(v)); }

  void u32(uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(b, 4);
  }

  void u64(uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(b, 8);
  }

  void i64(int64_t v) { u64(std::bit_cast<uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

  void f64_array(const double* p, size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
    } else {
      for (size_t i = 0; i < n; ++i) f64(p[i]);
    }
  }

  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void close() {
    out_.close();
    if (!out_) throw GazeError(ErrorCode::IoError, "write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw GazeError(ErrorCode::IoError, "cannot open for read: " + path);
    path_ = path;
  }

  void expect_magic(const char m[4]) {
    char b[4];
    in_.read(b, 4);
    if (!in_ || std::memcmp(b, m, 4) != 0)
      throw GazeError(ErrorCode::IoError, "bad magic in " + path_);
  }

  uint8_t u8() {
    int c = in_.get();
    check();
    return static_cast<uint8_t>(c);
  }

  uint32_t u32() {
    unsigned char b[4];
    in_.read(reinterpret_cast<char*>(b), 4);
    check();
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }

  uint64_t u64() {
    unsigned char b[8];
    in_.read(reinterpret_cast<char*>(b), 8);
    check();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }

  int64_t i64() { return std::bit_cast<int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void f64_array(double* p, size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
      check();
    } else {
      for (size_t i = 0; i < n; ++i) p[i] = f64();
    }
  }

  std::string str() {
    size_t n = u64();
    if (n > (1ULL << 32)) throw GazeError(ErrorCode::IoError, "corrupt string length in " + path_);
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }

 private:
  void check() {
    if (!in_) throw GazeError(ErrorCode::IoError, "truncated file: " + path_);
  }

  std::ifstream in_;
  std::string path_;
};

}  // namespace gazeload
