#ifndef MICE_SRC_BINARY_IO_H_
#define MICE_SRC_BINARY_IO_H_

// Little-endian primitives shared by the archive, checkpoint and ensemble
// file formats.

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "mice/common.h"

namespace mice::binary {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void F32(float v) { Le(std::bit_cast<std::uint32_t>(v), 4); }
  void F64(double v) { Le(std::bit_cast<std::uint64_t>(v), 8); }
  void Raw(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }
  void Bytes(const std::string& s) { Raw(s.data(), s.size()); }
  void String16(const std::string& s, const char* what) {
    if (s.size() > UINT16_MAX) {
      throw std::invalid_argument(std::string(what) + " longer than 65535 bytes");
    }
    U16(static_cast<std::uint16_t>(s.size()));
    Bytes(s);
  }
  void String32(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s);
  }

 private:
  void Le(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> data) : data_(std::move(data)) {}

  static Reader FromFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Reader(std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                             std::istreambuf_iterator<char>()));
  }

  std::uint16_t U16() { return static_cast<std::uint16_t>(Le(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  float F32() { return std::bit_cast<float>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string String16() { return Bytes(U16()); }
  std::string String32() { return Bytes(U32()); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (remaining() < n) {
      throw FormatError("truncated file at byte " + std::to_string(pos_));
    }
  }
  std::uint64_t Le(int n) {
    Need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::vector<unsigned char> data_;
  std::size_t pos_ = 0;
};

}  // namespace mice::binary

#endif  // MICE_SRC_BINARY_IO_H_
