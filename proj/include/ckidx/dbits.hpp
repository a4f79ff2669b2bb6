#pragma once

// Distinction-bit arithmetic over index keys.
//
// The distinction bit of two keys is the most significant position where they
// differ. For keys in sorted order, the distinction bit of any pair is the
// minimum over the adjacent distinction bits between them, so the adjacent
// positions alone are enough to order the whole set.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/keycodec.hpp"

namespace ckidx {

/// Most significant differing bit of the zero-padded keys, nullopt if equal.
std::optional<BitPos> dbit_pair(KeyView a, KeyView b) noexcept;

/// D_i for each adjacent pair of a strictly increasing key list.
std::vector<BitPos> adjacent_dbits(std::span<const KeyView> sorted_keys);

/// Bitmap of `nbits` positions holding exactly the adjacent distinction bits.
Bitmap build_dbitmap(std::span<const KeyView> sorted_keys, std::size_t nbits);

/// OR over (key XOR reference); zero positions are invariant.
Bitmap build_variant_bitmap(std::span<const KeyView> keys, KeyView reference,
                            std::size_t nbits);

/// offsets[i] = position of the (i+1)-st set bit.
using DOffsetTable = std::vector<BitPos>;
DOffsetTable build_doffset(const Bitmap& bitmap);

/// Packed bits of `key` at the bitmap's set positions, followed by the bits
/// of `record_id` selected by `rid_mask`, zero padded to whole words.
std::vector<std::uint64_t> compress(KeyView key, const Bitmap& bitmap,
                                    RecordId record_id, std::uint64_t rid_mask);

/// Exhaustive search for a smallest position set whose bit slice orders the
/// keys as the keys themselves are ordered. Ties are broken by the
/// lexicographically smallest position list. Only positions where the keys
/// vary are candidates; more than `max_candidates` of them is an error.
std::vector<BitPos> min_positions_bruteforce(std::span<const KeyView> keys,
                                             std::size_t max_candidates = 20);

}  // namespace ckidx
