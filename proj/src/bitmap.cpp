#include "ckidx/bitmap.hpp"

#include <algorithm>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace ckidx {

std::size_t Bitmap::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<BitPos> Bitmap::positions() const {
  std::vector<BitPos> out;
  out.reserve(popcount());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w) {
      const int lead = std::countl_zero(w);
      out.push_back(static_cast<BitPos>(64 * i + static_cast<std::size_t>(lead)));
      w &= ~(std::uint64_t{1} << (63 - lead));
    }
  }
  return out;
}

bool Bitmap::subset_of(const Bitmap& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::uint64_t o = i < other.words_.size() ? other.words_[i] : 0;
    if (words_[i] & ~o) return false;
  }
  return true;
}

Bitmap& Bitmap::operator|=(const Bitmap& other) noexcept {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) words_[i] |= other.words_[i];
  return *this;
}

void Bitmap::or_xor(KeyView key, KeyView reference) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] |= load_word_be(key, 8 * i) ^ load_word_be(reference, 8 * i);
  }
  if (nbits_ & 63) words_.back() &= ~std::uint64_t{0} << (64 - (nbits_ & 63));
}

std::vector<Byte> Bitmap::to_bytes() const {
  std::vector<Byte> out((nbits_ + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Byte>(words_[i / 8] >> (56 - 8 * (i % 8)));
  }
  return out;
}

Bitmap Bitmap::from_bytes(std::span<const Byte> bytes, std::size_t nbits) {
  Bitmap b(nbits);
  const std::size_t n = std::min(bytes.size(), (nbits + 7) / 8);
  for (std::size_t i = 0; i < n; ++i) {
    b.words_[i / 8] |= std::uint64_t{bytes[i]} << (56 - 8 * (i % 8));
  }
  if (nbits & 63) b.words_.back() &= ~std::uint64_t{0} << (64 - (nbits & 63));
  return b;
}

std::uint64_t pext_portable(std::uint64_t src, std::uint64_t mask) noexcept {
  std::uint64_t out = 0;
  std::uint64_t bit = 1;
  while (mask) {
    const std::uint64_t lsb = mask & (~mask + 1);
    if (src & lsb) out |= bit;
    mask ^= lsb;
    bit <<= 1;
  }
  return out;
}

std::uint64_t pdep_portable(std::uint64_t src, std::uint64_t mask) noexcept {
  std::uint64_t out = 0;
  std::uint64_t bit = 1;
  while (mask) {
    const std::uint64_t lsb = mask & (~mask + 1);
    if (src & bit) out |= lsb;
    mask ^= lsb;
    bit <<= 1;
  }
  return out;
}

#if defined(__x86_64__) && defined(__GNUC__)
namespace {
__attribute__((target("bmi2"))) std::uint64_t pext_bmi2(std::uint64_t s,
                                                         std::uint64_t m) noexcept {
  return _pext_u64(s, m);
}
__attribute__((target("bmi2"))) std::uint64_t pdep_bmi2(std::uint64_t s,
                                                         std::uint64_t m) noexcept {
  return _pdep_u64(s, m);
}
}  // namespace

bool hardware_bit_extract_available() noexcept {
  static const bool has = __builtin_cpu_supports("bmi2");
  return has;
}

std::uint64_t pext(std::uint64_t src, std::uint64_t mask) noexcept {
  return hardware_bit_extract_available() ? pext_bmi2(src, mask)
                                          : pext_portable(src, mask);
}

std::uint64_t pdep(std::uint64_t src, std::uint64_t mask) noexcept {
  return hardware_bit_extract_available() ? pdep_bmi2(src, mask)
                                          : pdep_portable(src, mask);
}
#else
bool hardware_bit_extract_available() noexcept { return false; }
std::uint64_t pext(std::uint64_t src, std::uint64_t mask) noexcept {
  return pext_portable(src, mask);
}
std::uint64_t pdep(std::uint64_t src, std::uint64_t mask) noexcept {
  return pdep_portable(src, mask);
}
#endif

}  // namespace ckidx
