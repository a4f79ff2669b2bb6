#include "ckidx/dbits.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "ckidx/error.hpp"
#include "ckidx/extract.hpp"

namespace ckidx {

std::optional<BitPos> dbit_pair(KeyView a, KeyView b) noexcept {
  const std::size_t len = std::max(a.size(), b.size());
  for (std::size_t off = 0; off < len; off += 8) {
    const std::uint64_t x = load_word_be(a, off) ^ load_word_be(b, off);
    if (x) return static_cast<BitPos>(8 * off + static_cast<std::size_t>(std::countl_zero(x)));
  }
  return std::nullopt;
}

std::vector<BitPos> adjacent_dbits(std::span<const KeyView> sorted_keys) {
  std::vector<BitPos> out;
  if (sorted_keys.size() < 2) return out;
  out.reserve(sorted_keys.size() - 1);
  for (std::size_t i = 1; i < sorted_keys.size(); ++i) {
    const auto cmp = compare_keys(sorted_keys[i - 1], sorted_keys[i]).order;
    if (cmp == std::strong_ordering::equal) {
      throw Error(Errc::duplicate_key, "keys " + std::to_string(i - 1) + " and " +
                                           std::to_string(i) + " are equal");
    }
    if (cmp == std::strong_ordering::greater) {
      throw Error(Errc::unsorted_input, "key " + std::to_string(i) +
                                            " is smaller than its predecessor");
    }
    out.push_back(*dbit_pair(sorted_keys[i - 1], sorted_keys[i]));
  }
  return out;
}

Bitmap build_dbitmap(std::span<const KeyView> sorted_keys, std::size_t nbits) {
  Bitmap bm(nbits);
  for (BitPos d : adjacent_dbits(sorted_keys)) {
    if (d >= nbits) throw Error(Errc::out_of_range, "key longer than bitmap");
    bm.set(d);
  }
  return bm;
}

Bitmap build_variant_bitmap(std::span<const KeyView> keys, KeyView reference,
                            std::size_t nbits) {
  Bitmap bm(nbits);
  for (const auto& k : keys) bm.or_xor(k, reference);
  return bm;
}

DOffsetTable build_doffset(const Bitmap& bitmap) { return bitmap.positions(); }

std::vector<std::uint64_t> compress(KeyView key, const Bitmap& bitmap,
                                    RecordId record_id, std::uint64_t rid_mask) {
  return KeyCompressor(bitmap, rid_mask).compress(key, record_id);
}

namespace {

bool bit_at(KeyView key, BitPos pos) noexcept {
  const std::size_t byte = pos / 8;
  if (byte >= key.size()) return false;
  return (key[byte] >> (7 - pos % 8)) & 1u;
}

// True when slicing at `positions` keeps every adjacent distinct pair of the
// sorted keys strictly ordered.
bool slice_orders(const std::vector<std::vector<bool>>& sorted_bits,
                  const std::vector<bool>& distinct_from_prev,
                  std::span<const std::size_t> positions) {
  for (std::size_t i = 1; i < sorted_bits.size(); ++i) {
    if (!distinct_from_prev[i]) continue;
    int order = 0;
    for (std::size_t p : positions) {
      const bool a = sorted_bits[i - 1][p];
      const bool b = sorted_bits[i][p];
      if (a != b) {
        order = a < b ? -1 : 1;
        break;
      }
    }
    if (order != -1) return false;
  }
  return true;
}

}  // namespace

std::vector<BitPos> min_positions_bruteforce(std::span<const KeyView> keys,
                                             std::size_t max_candidates) {
  if (keys.size() < 2) return {};
  std::vector<KeyView> sorted(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end(), [](KeyView a, KeyView b) {
    return compare_keys(a, b).order == std::strong_ordering::less;
  });

  std::size_t max_len = 0;
  for (const auto& k : sorted) max_len = std::max(max_len, k.size());
  std::vector<BitPos> candidates;
  for (BitPos pos = 0; pos < 8 * max_len; ++pos) {
    const bool first = bit_at(sorted.front(), pos);
    for (const auto& k : sorted) {
      if (bit_at(k, pos) != first) {
        candidates.push_back(pos);
        break;
      }
    }
  }
  if (candidates.size() > max_candidates) {
    throw Error(Errc::search_space_too_large,
                std::to_string(candidates.size()) + " variant positions exceed " +
                    std::to_string(max_candidates));
  }

  std::vector<std::vector<bool>> bits(sorted.size(),
                                      std::vector<bool>(candidates.size()));
  std::vector<bool> distinct(sorted.size(), false);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      bits[i][c] = bit_at(sorted[i], candidates[c]);
    }
    if (i > 0) {
      distinct[i] = compare_keys(sorted[i - 1], sorted[i]).order !=
                    std::strong_ordering::equal;
    }
  }

  // Subsets of each size in lexicographic order of candidate indices.
  const std::size_t m = candidates.size();
  for (std::size_t size = 0; size <= m; ++size) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      if (slice_orders(bits, distinct, idx)) {
        std::vector<BitPos> out;
        for (auto i : idx) out.push_back(candidates[i]);
        return out;
      }
      // Next combination.
      std::size_t k = size;
      while (k > 0 && idx[k - 1] == m - size + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t j = k; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return {};  // unreachable: the full candidate set always orders the keys
}

}  // namespace ckidx
