#include "ckidx/extract.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace ckidx {

namespace {

inline std::uint64_t load_be(const Byte* p) noexcept {
  std::uint64_t w;
  std::memcpy(&w, p, 8);
  if constexpr (std::endian::native == std::endian::little) w = __builtin_bswap64(w);
  return w;
}

void compress_portable(const std::vector<ExtractMask>& masks, const Byte* key,
                       std::uint64_t rid, std::uint64_t rid_mask, unsigned rid_bits,
                       std::uint64_t* out, std::size_t words) noexcept {
  detail::BitWriter w{out};
  for (const auto& m : masks) {
    w.put(pext_portable(load_be(key + m.byte_offset), m.mask), m.bits);
  }
  w.put(pext_portable(rid, rid_mask), rid_bits);
  std::uint64_t* end = w.finish();
  std::fill(end, out + words, 0);
}

#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target("bmi2"))) void compress_bmi2(
    const std::vector<ExtractMask>& masks, const Byte* key, std::uint64_t rid,
    std::uint64_t rid_mask, unsigned rid_bits, std::uint64_t* out,
    std::size_t words) noexcept {
  detail::BitWriter w{out};
  for (const auto& m : masks) {
    w.put(_pext_u64(load_be(key + m.byte_offset), m.mask), m.bits);
  }
  w.put(_pext_u64(rid, rid_mask), rid_bits);
  std::uint64_t* end = w.finish();
  std::fill(end, out + words, 0);
}
#define CKIDX_HAVE_BMI2_PATH 1
#endif

}  // namespace

KeyCompressor::KeyCompressor(const Bitmap& key_bits, std::uint64_t rid_mask)
    : key_bits_(key_bits.popcount()),
      rid_bits_(static_cast<std::size_t>(std::popcount(rid_mask))),
      rid_mask_(rid_mask) {
  const auto words = key_bits.words();
  const std::size_t nbits = key_bits.size();
  std::size_t next = 0;  // first bit not yet covered by a mask
  while (next < nbits) {
    // Locate the next set bit at or after `next`.
    std::size_t w = next >> 6;
    std::uint64_t cur = words[w] & (~std::uint64_t{0} >> (next & 63));
    while (cur == 0 && ++w < words.size()) cur = words[w];
    if (cur == 0) break;
    const std::size_t bit = 64 * w + static_cast<std::size_t>(std::countl_zero(cur));
    if (bit >= nbits) break;
    const std::size_t byte = bit / 8;
    ExtractMask m;
    m.byte_offset = static_cast<std::uint32_t>(byte);
    m.mask = read_bits(words, 8 * byte, 64);
    m.bits = static_cast<std::uint32_t>(std::popcount(m.mask));
    masks_.push_back(m);
    next = 8 * (byte + 8);
  }
  readable_ = masks_.empty() ? 0 : masks_.back().byte_offset + 8;
}

void KeyCompressor::compress(const Byte* padded_key, RecordId rid,
                             std::uint64_t* out, ExtractPath path) const noexcept {
#ifdef CKIDX_HAVE_BMI2_PATH
  const bool hw = path == ExtractPath::hardware ||
                  (path == ExtractPath::automatic && hardware_bit_extract_available());
  if (hw) {
    compress_bmi2(masks_, padded_key, rid, rid_mask_,
                  static_cast<unsigned>(rid_bits_), out, word_count());
    return;
  }
#endif
  (void)path;
  compress_portable(masks_, padded_key, rid, rid_mask_,
                    static_cast<unsigned>(rid_bits_), out, word_count());
}

std::vector<std::uint64_t> KeyCompressor::compress(KeyView key, RecordId rid,
                                                   ExtractPath path) const {
  std::vector<Byte> padded(std::max(readable_, key.size()), 0);
  std::copy(key.begin(), key.end(), padded.begin());
  std::vector<std::uint64_t> out(word_count());
  compress(padded.data(), rid, out.data(), path);
  return out;
}

RecordId KeyCompressor::record_id(const std::uint64_t* compressed) const noexcept {
  const std::uint64_t bits = read_bits(std::span(compressed, word_count()), key_bits_,
                                       static_cast<unsigned>(rid_bits_));
  return pdep(bits, rid_mask_);
}

}  // namespace ckidx
