#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

namespace certmesh {

// Canonical byte encoding: fixed-width little-endian integers, IEEE-754 bit
// patterns for doubles, u32 length prefixes for variable-size fields. Field
// order is fixed by each message's encode routine, which gives signatures a
// well-defined payload.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  // Raw bytes, no length prefix (for fixed-size fields).
  void raw(std::span<const std::uint8_t> b) {
    if (b.empty()) return;
    std::size_t old = buf_.size();
    buf_.resize(old + b.size());
    std::memcpy(buf_.data() + old, b.data(), b.size());
  }

  // Length-prefixed byte string.
  void blob(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

inline bool contains_bytes(std::span<const std::uint8_t> haystack,
                           std::span<const std::uint8_t> needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::memcmp(haystack.data() + i, needle.data(), needle.size()) == 0) return true;
  }
  return false;
}

}  // namespace certmesh
