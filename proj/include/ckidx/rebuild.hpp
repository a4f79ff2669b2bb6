#pragma once

// Index reconstruction: extract sort keys from the table pages, sort them
// with the row-column sort and build the tree bottom-up.
//
// With metadata the sort keys are compressed keys (extraction bitmap bits
// followed by the variable record-ID bits). Without metadata the full keys
// are sorted and the metadata is derived from the result.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/extract.hpp"
#include "ckidx/indextree.hpp"
#include "ckidx/metadata.hpp"
#include "ckidx/table.hpp"

namespace ckidx {

enum class SortMethod { full, compressed };

const char* method_name(SortMethod m) noexcept;

struct RebuildOptions {
  std::size_t threads = 1;
  BuildConfig cfg;
  std::size_t cache_bytes = 0;  // per thread; 0 selects default_cache_bytes()
  std::size_t forced_t = 0;
  ExtractPath path = ExtractPath::automatic;
  bool count_words = false;  // instrument the sort comparator
};

struct RebuildReport {
  SortMethod method = SortMethod::full;
  double extract_seconds = 0;
  double sort_seconds = 0;
  double build_seconds = 0;
  double total_seconds = 0;
  std::size_t key_count = 0;
  std::size_t sort_key_bytes = 0;   // word-rounded bits actually used
  std::size_t element_bytes = 0;    // in-memory sort element size
  std::size_t key_bits = 0;         // key bits per sort key
  std::size_t rid_bits = 0;
  std::size_t threads = 1;
  std::size_t height = 0;
  std::uint64_t comparisons = 0;    // with count_words
  std::uint64_t word_comparisons = 0;

  [[nodiscard]] double words_per_comparison() const noexcept {
    return comparisons ? static_cast<double>(word_comparisons) /
                             static_cast<double>(comparisons)
                       : 0.0;
  }
};

struct RebuildResult {
  IndexTree tree;
  DSMetadata meta;
  RebuildReport report;
};

/// Extraction bitmap: the D-bitmap plus the variant positions inside the pk
/// bits following each of its positions, so partial keys can be rebuilt from
/// the compressed key and the reference key alone.
Bitmap extraction_bitmap(const DSMetadata& meta, unsigned pk_bits);

/// Compressed sort keys of every live row, `words` words each, ordered by
/// page then row.
struct SortKeyArray {
  std::size_t words = 0;
  std::vector<std::uint64_t> data;

  [[nodiscard]] std::size_t size() const noexcept { return words ? data.size() / words : 0; }
  [[nodiscard]] std::span<const std::uint64_t> at(std::size_t i) const noexcept {
    return {data.data() + i * words, words};
  }
};

SortKeyArray extract_phase(const Table& table, const KeyCompressor& compressor,
                           std::size_t threads, ExtractPath path = ExtractPath::automatic);

/// Bulk build over rows already in (key, record ID) order. Uses full keys.
IndexTree build_sorted(const Table& table, std::span<const RecordId> sorted_rids,
                       const BuildConfig& cfg, std::size_t threads = 1);

/// Height of a tree made by building one subtree per block and linking the
/// subtree roots under new levels.
std::size_t linked_roots_height(std::span<const std::size_t> block_sizes,
                                const BuildConfig& cfg);

/// Full pipeline. `meta == nullptr` is the first build (full-key sort).
RebuildResult reconstruct(const Table& table, const DSMetadata* meta,
                          const RebuildOptions& opts = {});

/// Largest sort-key width, in words, the pipeline accepts.
inline constexpr std::size_t kMaxSortKeyWords = 128;

}  // namespace ckidx
