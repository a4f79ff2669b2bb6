#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/dbits.hpp"
#include "ckidx/keycodec.hpp"

namespace ckidx {

/// Persistent compression state of one index.
///
/// Bits set in `dbitmap` are possibly distinction positions, bits set in
/// `variant_bitmap` are possibly variant positions relative to
/// `reference_key`. Both may hold stale ones after deletions; neither may
/// miss a live position. `rid_variant_mask` is the OR of every record ID ever
/// indexed, so unset bits are zero in all of them.
struct DSMetadata {
  Bitmap dbitmap;
  Bitmap variant_bitmap;
  IndexKey reference_key;
  std::uint64_t rid_variant_mask = 0;

  static DSMetadata empty(std::size_t key_bits) {
    return {Bitmap(key_bits), Bitmap(key_bits), IndexKey{}, 0};
  }
  [[nodiscard]] std::size_t key_bits() const noexcept { return dbitmap.size(); }

  friend bool operator==(const DSMetadata&, const DSMetadata&) = default;
};

/// Metadata maintenance for an insertion between `prev` and `next`. Sets at
/// most one D-bitmap position and returns whether it wrote one.
bool on_insert(DSMetadata& meta, std::optional<KeyView> prev, KeyView key,
               std::optional<KeyView> next, RecordId rid);

/// Deletions leave the metadata untouched: the D-bit of the new neighbours
/// is the smaller of the two removed ones, which is already set.
inline void on_delete(const DSMetadata& /*meta*/, KeyView /*deleted*/) noexcept {}

/// Fresh metadata from full keys in sorted order (duplicates allowed).
DSMetadata compute_metadata(std::span<const KeyView> sorted_keys,
                            std::span<const RecordId> rids, std::size_t key_bits);

/// Fresh metadata from compressed keys in sorted order. `doffset` maps
/// compressed bit indexes back to key positions and `compressed_key_bits`
/// is the number of key bits in each compressed key (record-ID bits follow).
/// `keys`/`rids` are the current rows in any order; the first key becomes the
/// new reference.
DSMetadata recompute(std::span<const std::vector<std::uint64_t>> sorted_compressed,
                     const DOffsetTable& doffset, std::size_t compressed_key_bits,
                     const DSMetadata& old_meta, std::span<const KeyView> keys,
                     std::span<const RecordId> rids);

/// DSM1 binary image.
std::vector<Byte> save(const DSMetadata& meta);
DSMetadata load(std::span<const Byte> bytes);
/// `expected_key_bits` guards against metadata of another schema.
DSMetadata load(std::span<const Byte> bytes, std::size_t expected_key_bits);

void save_file(const DSMetadata& meta, const std::string& path);
DSMetadata load_file(const std::string& path);

/// Human-readable dump listing bitmaps eight bytes per row.
std::string describe(const DSMetadata& meta);
std::string format_bitmap_rows(const Bitmap& bitmap);

}  // namespace ckidx
