#pragma once

// Compressed-key extraction: gathers the key bits selected by a bitmap into a
// left-packed word string, followed by the selected record-ID bits.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/keycodec.hpp"

namespace ckidx {

/// One 8-byte window of the extraction bitmap. The window starts at the byte
/// holding the first selected bit not covered by the previous window.
struct ExtractMask {
  std::uint32_t byte_offset = 0;
  std::uint64_t mask = 0;  // big-endian view of bitmap bytes [offset, offset+8)
  std::uint32_t bits = 0;  // popcount(mask)
};

enum class ExtractPath { automatic, hardware, portable };

namespace detail {

/// Appends right-aligned bit runs to an MSB-first word array.
struct BitWriter {
  std::uint64_t* out;
  std::uint64_t cur = 0;
  unsigned fill = 0;

  [[gnu::always_inline]] inline void put(std::uint64_t v, unsigned n) noexcept {
    if (n == 0) return;
    if (fill + n <= 64) {
      cur |= v << (64 - fill - n);
      fill += n;
      if (fill == 64) {
        *out++ = cur;
        cur = 0;
        fill = 0;
      }
    } else {
      const unsigned head = 64 - fill;
      const unsigned rest = n - head;
      *out++ = cur | (v >> rest);
      cur = v << (64 - rest);
      fill = rest;
    }
  }

  [[gnu::always_inline]] inline std::uint64_t* finish() noexcept {
    if (fill) *out++ = cur;
    return out;
  }
};

}  // namespace detail

class KeyCompressor {
 public:
  KeyCompressor() = default;
  /// `key_bits` selects key positions; `rid_mask` selects record-ID bits
  /// (bit 63 of the id is its most significant bit).
  KeyCompressor(const Bitmap& key_bits, std::uint64_t rid_mask);

  [[nodiscard]] const std::vector<ExtractMask>& masks() const noexcept { return masks_; }
  [[nodiscard]] std::size_t key_bit_count() const noexcept { return key_bits_; }
  [[nodiscard]] std::size_t rid_bit_count() const noexcept { return rid_bits_; }
  [[nodiscard]] std::size_t bit_count() const noexcept { return key_bits_ + rid_bits_; }
  [[nodiscard]] std::size_t word_count() const noexcept {
    return (bit_count() + 63) / 64;
  }
  [[nodiscard]] std::uint64_t rid_mask() const noexcept { return rid_mask_; }
  /// Bytes that must be readable past the start of a key passed to the raw
  /// overload of compress().
  [[nodiscard]] std::size_t readable_bytes() const noexcept { return readable_; }

  /// Writes word_count() words to `out`. `padded_key` must be readable for
  /// readable_bytes() bytes, zero past the key's logical end.
  void compress(const Byte* padded_key, RecordId rid, std::uint64_t* out,
                ExtractPath path = ExtractPath::automatic) const noexcept;

  [[nodiscard]] std::vector<std::uint64_t> compress(
      KeyView key, RecordId rid, ExtractPath path = ExtractPath::automatic) const;

  /// Restores the record ID embedded at the tail of a compressed key.
  [[nodiscard]] RecordId record_id(const std::uint64_t* compressed) const noexcept;

 private:
  std::vector<ExtractMask> masks_;
  std::size_t key_bits_ = 0;
  std::size_t rid_bits_ = 0;
  std::uint64_t rid_mask_ = 0;
  std::size_t readable_ = 0;
};

}  // namespace ckidx
