#pragma once

// Invariant suites shared by the tests and the `verify` command.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ckidx/indextree.hpp"
#include "ckidx/metadata.hpp"
#include "ckidx/table.hpp"

namespace ckidx {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Sorted (key, record ID) order of the live rows, by full-key comparison.
std::vector<RecordId> sorted_rows(const Table& table);

/// All-pairs distinction positions equal the adjacent ones, and every pair's
/// position is the minimum over the adjacent positions between them. Runs on
/// random samples of the table's distinct keys.
CheckResult check_dbit_theorems(const Table& table, std::size_t samples,
                                std::size_t max_sample_size, std::uint64_t seed);

/// Sorting compressed keys (D-bitmap bits and record-ID bits) gives the same
/// row order as sorting full keys.
CheckResult check_compressed_order(const Table& table, const DSMetadata& meta);

/// The metadata covers the table: every adjacent distinction position and
/// every variant position is set, and the record-ID mask covers every row.
CheckResult check_metadata_covers(const Table& table, const DSMetadata& meta);

/// Structural invariants plus agreement with the full-key order.
CheckResult check_tree(const IndexTree& tree);

}  // namespace ckidx
