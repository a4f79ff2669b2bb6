#include "ckidx/verify.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ckidx/dbits.hpp"
#include "ckidx/extract.hpp"

namespace ckidx {

namespace {

std::vector<RecordId> live_rows(const Table& table) {
  std::vector<RecordId> rows;
  rows.reserve(table.live_rows());
  for (RecordId r = 0; r < table.slots(); ++r) {
    if (table.live(r)) rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<RecordId> sorted_rows(const Table& table) {
  auto rows = live_rows(table);
  std::sort(rows.begin(), rows.end(), [&](RecordId a, RecordId b) {
    const auto c = compare_keys(table.key(a), table.key(b)).order;
    return c < 0 || (c == 0 && a < b);
  });
  return rows;
}

CheckResult check_dbit_theorems(const Table& table, std::size_t samples,
                                std::size_t max_sample_size, std::uint64_t seed) {
  CheckResult res{"distinction bit theorems", true, ""};
  const auto rows = sorted_rows(table);
  std::vector<KeyView> distinct;
  for (RecordId r : rows) {
    if (distinct.empty() || compare_keys(distinct.back(), table.key(r)).order != 0) {
      distinct.push_back(table.key(r));
    }
  }
  if (distinct.size() < 2) return res;
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples && res.passed; ++s) {
    const std::size_t k = std::min<std::size_t>(
        distinct.size(), 2 + rng() % std::max<std::size_t>(1, max_sample_size - 1));
    std::vector<std::size_t> pick(distinct.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    std::vector<std::size_t> chosen;
    std::sample(pick.begin(), pick.end(), std::back_inserter(chosen), k, rng);
    std::vector<KeyView> keys;
    for (std::size_t i : chosen) keys.push_back(distinct[i]);
    const auto adj = adjacent_dbits(keys);
    const std::set<BitPos> adj_set(adj.begin(), adj.end());
    std::set<BitPos> all;
    for (std::size_t i = 0; i < keys.size() && res.passed; ++i) {
      BitPos running = ~BitPos{0};
      for (std::size_t j = i + 1; j < keys.size(); ++j) {
        running = std::min(running, adj[j - 1]);
        const auto d = dbit_pair(keys[i], keys[j]);
        if (!d || *d != running) {
          res.passed = false;
          res.detail = "pair distinction bit differs from the adjacent minimum";
          break;
        }
        all.insert(*d);
      }
    }
    if (res.passed && all != adj_set) {
      res.passed = false;
      res.detail = "all-pairs positions differ from adjacent positions";
    }
  }
  return res;
}

CheckResult check_compressed_order(const Table& table, const DSMetadata& meta) {
  CheckResult res{"compressed key order", true, ""};
  const auto expected = sorted_rows(table);
  const KeyCompressor comp(meta.dbitmap, meta.rid_variant_mask);
  const std::size_t w = comp.word_count();
  std::vector<std::uint64_t> packed(expected.size() * w);
  auto rows = live_rows(table);
  std::vector<std::size_t> slot(table.slots());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    slot[rows[i]] = i;
    if (w) comp.compress(table.row(rows[i]), rows[i], packed.data() + i * w);
  }
  std::sort(rows.begin(), rows.end(), [&](RecordId a, RecordId b) {
    const std::uint64_t* x = packed.data() + slot[a] * w;
    const std::uint64_t* y = packed.data() + slot[b] * w;
    return std::lexicographical_compare(x, x + w, y, y + w);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] != expected[i]) {
      res.passed = false;
      res.detail = "order differs at rank " + std::to_string(i);
      break;
    }
  }
  return res;
}

CheckResult check_metadata_covers(const Table& table, const DSMetadata& meta) {
  CheckResult res{"metadata coverage", true, ""};
  if (meta.key_bits() != table.schema().max_key_bits()) {
    res.passed = false;
    res.detail = "metadata width differs from the schema";
    return res;
  }
  const auto rows = sorted_rows(table);
  std::size_t missing_d = 0;
  std::size_t missing_v = 0;
  std::uint64_t rid_or = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const KeyView k = table.key(rows[i]);
    rid_or |= rows[i];
    if (i > 0) {
      const auto d = dbit_pair(table.key(rows[i - 1]), k);
      if (d && !meta.dbitmap.test(*d)) ++missing_d;
    }
    Bitmap v(meta.key_bits());
    v.or_xor(k, meta.reference_key);
    if (!v.subset_of(meta.variant_bitmap)) ++missing_v;
  }
  if (missing_d || missing_v || (rid_or & ~meta.rid_variant_mask)) {
    res.passed = false;
    res.detail = std::to_string(missing_d) + " distinction positions and " +
                 std::to_string(missing_v) + " keys with variant positions uncovered";
    if (rid_or & ~meta.rid_variant_mask) res.detail += ", record-ID mask incomplete";
  }
  return res;
}

CheckResult check_tree(const IndexTree& tree) {
  CheckResult res{"tree structure", true, ""};
  const auto problems = tree.verify();
  if (!problems.empty()) {
    res.passed = false;
    res.detail = std::to_string(problems.size()) + " violations, first: " + problems.front();
    return res;
  }
  if (tree.scan_rids() != sorted_rows(tree.table())) {
    res.passed = false;
    res.detail = "scan order differs from the full-key order of the table";
  }
  return res;
}

}  // namespace ckidx
