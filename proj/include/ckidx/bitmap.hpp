#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ckidx/keycodec.hpp"

namespace ckidx {

/// Zero-based bit index into a key; bit 0 is the MSB of byte 0.
using BitPos = std::uint32_t;

/// Fixed-length bit array using the key bit-numbering convention: position i
/// lives in word i / 64 at bit 63 - i % 64, so word order equals key order.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64) {}

  [[nodiscard]] std::size_t size() const noexcept { return nbits_; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] std::span<std::uint64_t> words() noexcept { return words_; }

  [[nodiscard]] bool test(std::size_t pos) const noexcept {
    return (words_[pos >> 6] >> (63 - (pos & 63))) & 1u;
  }
  void set(std::size_t pos) noexcept {
    words_[pos >> 6] |= std::uint64_t{1} << (63 - (pos & 63));
  }
  void reset(std::size_t pos) noexcept {
    words_[pos >> 6] &= ~(std::uint64_t{1} << (63 - (pos & 63)));
  }

  [[nodiscard]] std::size_t popcount() const noexcept;
  [[nodiscard]] bool none() const noexcept { return popcount() == 0; }
  [[nodiscard]] std::vector<BitPos> positions() const;
  [[nodiscard]] bool subset_of(const Bitmap& other) const noexcept;

  Bitmap& operator|=(const Bitmap& other) noexcept;
  /// ORs (key XOR reference) into the bitmap; both keys are zero padded.
  void or_xor(KeyView key, KeyView reference) noexcept;

  /// MSB-first byte image, ceil(size / 8) bytes.
  [[nodiscard]] std::vector<Byte> to_bytes() const;
  static Bitmap from_bytes(std::span<const Byte> bytes, std::size_t nbits);

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Reads `count` (<= 64) bits starting at bit `pos` of an MSB-first word
/// array, right aligned. Bits beyond the array read as zero.
inline std::uint64_t read_bits(std::span<const std::uint64_t> words, std::size_t pos,
                               unsigned count) noexcept {
  if (count == 0) return 0;
  const std::size_t w = pos >> 6;
  const unsigned off = pos & 63;
  const std::uint64_t hi = w < words.size() ? words[w] : 0;
  const std::uint64_t lo = (off != 0 && w + 1 < words.size()) ? words[w + 1] : 0;
  const std::uint64_t window = off == 0 ? hi : (hi << off) | (lo >> (64 - off));
  return count == 64 ? window : window >> (64 - count);
}

/// First differing bit of two equally long MSB-first word arrays, or
/// `nbits` when they are equal.
inline std::size_t first_diff_bit(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t nwords) noexcept {
  for (std::size_t i = 0; i < nwords; ++i) {
    const std::uint64_t x = a[i] ^ b[i];
    if (x) return 64 * i + static_cast<std::size_t>(std::countl_zero(x));
  }
  return 64 * nwords;
}

std::uint64_t pext_portable(std::uint64_t src, std::uint64_t mask) noexcept;
std::uint64_t pdep_portable(std::uint64_t src, std::uint64_t mask) noexcept;

/// True when the running CPU has a hardware parallel-bit-extract.
bool hardware_bit_extract_available() noexcept;
std::uint64_t pext(std::uint64_t src, std::uint64_t mask) noexcept;
std::uint64_t pdep(std::uint64_t src, std::uint64_t mask) noexcept;

}  // namespace ckidx
