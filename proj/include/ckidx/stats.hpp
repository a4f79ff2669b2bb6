#pragma once

// Size and work metrics of a dataset under key compression.

#include <cstddef>
#include <cstdint>
#include <string>

#include "ckidx/metadata.hpp"
#include "ckidx/table.hpp"

namespace ckidx {

struct StatsOptions {
  bool measure_words = true;  // run both sorts with a counting comparator
  unsigned pk_bits = 32;      // for the extended extraction size
  std::size_t threads = 1;
};

struct DatasetStats {
  std::size_t key_count = 0;
  std::size_t min_key_bytes = 0;
  std::size_t max_key_bytes = 0;
  double avg_key_bytes = 0;
  std::size_t full_key_bits = 0;
  std::size_t distinction_bits = 0;
  std::size_t rid_variant_bits = 0;
  double compression_ratio = 0;
  std::size_t full_sort_key_bytes = 0;        // full key + 8-byte record ID
  std::size_t compressed_sort_key_bytes = 0;  // distinction bits + record-ID bits
  double sort_key_ratio = 0;
  std::size_t extraction_bits = 0;            // with the partial-key extension
  std::size_t extended_sort_key_bytes = 0;
  double wcc_full = 0;        // words per comparison
  double wcc_compressed = 0;
  double word_comparison_ratio = 0;
};

/// `meta` should come from a fresh build so its D-bitmap holds exactly the
/// distinction positions.
DatasetStats compute_stats(const Table& table, const DSMetadata& meta,
                           const StatsOptions& opts = {});

/// Aligned two-column report.
std::string format_stats(const DatasetStats& s);

}  // namespace ckidx
