// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Optional arguments select criteria by number.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "ckidx/datagen.hpp"
#include "ckidx/dataset_io.hpp"
#include "ckidx/dbits.hpp"
#include "ckidx/extract.hpp"
#include "ckidx/indextree.hpp"
#include "ckidx/metadata.hpp"
#include "ckidx/rcsort.hpp"
#include "ckidx/rebuild.hpp"
#include "ckidx/stats.hpp"
#include "support.hpp"

using namespace ckidx;
using namespace ckidx::test;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Structural results of every tree built by the other criteria.
struct TreeLedger {
  std::size_t trees = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void check(const IndexTree& tree, const BuildConfig& cfg, const std::string& where) {
    ++trees;
    auto problems = tree.verify();
    if (tree.height() != expected_height(tree.size(), cfg)) {
      problems.push_back("height " + std::to_string(tree.height()) + ", closed form " +
                         std::to_string(expected_height(tree.size(), cfg)));
    }
    if (!problems.empty()) {
      if (failures++ == 0) first_failure = where + ": " + problems.front();
    }
  }
};

TreeLedger g_trees;

// ---- 1 -------------------------------------------------------------------

Value random_value(const ColumnType& c, std::mt19937_64& rng) {
  switch (c.kind) {
    case ColumnKind::int32:
      return std::int64_t(rng() % 50) - 25 + (rng() % 8 == 0 ? std::int64_t(rng() % 2000000) : 0);
    case ColumnKind::int64:
      return static_cast<std::int64_t>(rng() % 3 == 0 ? rng() : rng() % 100) - 50;
    case ColumnKind::float64:
      return (static_cast<double>(rng() % 400) - 200) / 8.0;
    case ColumnKind::decimal: {
      if (rng() % 30 == 0) return Null{};
      __int128 lim = 1;
      for (unsigned i = 0; i < std::min<unsigned>(c.precision, 6); ++i) lim *= 10;
      return Decimal{static_cast<__int128>(rng() % static_cast<std::uint64_t>(lim)) *
                     ((rng() & 1) ? 1 : -1)};
    }
    case ColumnKind::fixed_string: {
      std::string s(c.length, ' ');
      for (auto& ch : s) ch = static_cast<char>('a' + rng() % 3);
      return s;
    }
    case ColumnKind::varstring: {
      std::string s(rng() % (c.length + 1), ' ');
      for (auto& ch : s) ch = static_cast<char>('m' + rng() % 3);
      return s;
    }
  }
  return Null{};
}

Schema random_schema(std::mt19937_64& rng, int round) {
  const std::vector<ColumnType> pool{
      ColumnType::int32(),          ColumnType::int64(),        ColumnType::float64(),
      ColumnType::decimal(2, 0),    ColumnType::decimal(9, 3),  ColumnType::decimal(38, 10),
      ColumnType::fixed_string(5),  ColumnType::varstring(7),   ColumnType::varstring(30)};
  std::vector<ColumnType> cols;
  // The first rounds cover every type alone, the rest mix them.
  if (round < static_cast<int>(pool.size())) {
    cols.push_back(pool[static_cast<std::size_t>(round)]);
  } else {
    const std::size_t k = 1 + rng() % 4;
    for (std::size_t i = 0; i < k; ++i) cols.push_back(pool[rng() % pool.size()]);
  }
  return Schema(cols);
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::size_t mismatches = 0, keys_total = 0;
  for (int round = 0; round < 200; ++round) {
    const Schema schema = random_schema(rng, round);
    const auto n = static_cast<std::size_t>(
        std::exp(std::log(10.0) + (std::log(1e5) - std::log(10.0)) *
                                      static_cast<double>(rng() % 1000001) / 1e6));
    Table t(schema);
    std::vector<std::vector<Value>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      // Every fifth row repeats an earlier one.
      if (!rows.empty() && rng() % 5 == 0) {
        t.append(encode_row(rows[rng() % rows.size()], schema));
        continue;
      }
      std::vector<Value> row;
      for (const auto& c : schema.columns()) row.push_back(random_value(c, rng));
      t.append(encode_row(row, schema));
      rows.push_back(std::move(row));
    }
    keys_total += n;

    const auto full_order = oracle_order(t);
    Bitmap dbm(schema.max_key_bits());
    std::uint64_t rid_mask = 0;
    for (std::size_t i = 0; i < full_order.size(); ++i) {
      rid_mask |= full_order[i];
      if (i == 0) continue;
      if (auto d = naive_dbit(t.key(full_order[i - 1]), t.key(full_order[i]))) dbm.set(*d);
    }
    std::vector<std::vector<std::uint64_t>> comp(t.slots());
    for (RecordId r = 0; r < t.slots(); ++r) comp[r] = compress(t.key(r), dbm, r, rid_mask);
    std::vector<RecordId> comp_order(t.slots());
    std::iota(comp_order.begin(), comp_order.end(), 0);
    std::sort(comp_order.begin(), comp_order.end(),
              [&](RecordId a, RecordId b) { return comp[a] < comp[b]; });
    // Distinct-key permutation: the first row of each key group.
    auto distinct = [&](const std::vector<RecordId>& order) {
      std::vector<RecordId> out;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || naive_compare(t.key(order[i - 1]), t.key(order[i])) != 0) {
          out.push_back(order[i]);
        }
      }
      return out;
    };
    if (distinct(comp_order) != distinct(full_order) || comp_order != full_order) ++mismatches;

    // The same property through the pipeline, with metadata from the oracle.
    DSMetadata meta = DSMetadata::empty(schema.max_key_bits());
    meta.dbitmap = dbm;
    meta.reference_key = IndexKey(t.key(0));
    for (RecordId r = 0; r < t.slots(); ++r) meta.variant_bitmap.or_xor(t.key(r), meta.reference_key);
    meta.rid_variant_mask = rid_mask;
    RebuildOptions o;
    o.threads = 1 + static_cast<std::size_t>(round % 4);
    const RebuildResult res = reconstruct(t, &meta, o);
    if (res.tree.scan_rids() != full_order) ++mismatches;
    g_trees.check(res.tree, o.cfg, "criterion 1 round " + std::to_string(round));
  }
  const double secs = since(t0);
  Outcome out;
  out.pass = mismatches == 0 && secs < 120;
  out.detail = "200 datasets, " + std::to_string(keys_total) + " keys, " +
               std::to_string(mismatches) + " mismatches, " + std::to_string(secs) + " s";
  return out;
}

// ---- 2 -------------------------------------------------------------------

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::size_t failures = 0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t len = 1 + rng() % 8;
    const std::size_t target = 2 + rng() % 63;
    std::set<std::vector<Byte>> s;
    for (std::size_t tries = 0; s.size() < target && tries < 10000; ++tries) {
      std::vector<Byte> k(len);
      const unsigned mode = round % 3;
      for (auto& b : k) {
        b = static_cast<Byte>(mode == 0 ? rng() : (mode == 1 ? rng() % 4 : (rng() % 8 ? 0 : rng())));
      }
      s.insert(k);
    }
    if (s.size() < 2) continue;
    std::vector<KeyView> keys(s.begin(), s.end());
    const auto d = adjacent_dbits(keys);
    std::set<BitPos> pairs;
    bool ok = true;
    for (std::size_t i = 0; i < keys.size() && ok; ++i) {
      for (std::size_t j = i + 1; j < keys.size(); ++j) {
        const auto pd = naive_dbit(keys[i], keys[j]);
        const BitPos m = *std::min_element(d.begin() + static_cast<std::ptrdiff_t>(i),
                                           d.begin() + static_cast<std::ptrdiff_t>(j));
        if (!pd || *pd != m) {
          ok = false;
          break;
        }
        pairs.insert(*pd);
      }
    }
    const auto pos = build_dbitmap(keys, 64).positions();
    if (!ok || std::set<BitPos>(pos.begin(), pos.end()) != pairs) ++failures;
  }
  const double secs = since(t0);
  return {failures == 0 && secs < 30,
          "1000 key sets, " + std::to_string(failures) + " failures, " + std::to_string(secs) +
              " s"};
}

// ---- 3 -------------------------------------------------------------------

Outcome criterion3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1003);
  std::size_t mismatches = 0;
  const Schema schema({ColumnType::varstring(6), ColumnType::int32()});
  for (int seq = 0; seq < 100; ++seq) {
    Table t(schema);
    IndexTree tree(t);
    DSMetadata meta = DSMetadata::empty(schema.max_key_bits());
    std::vector<RecordId> live;
    const unsigned insert_pct = 50 + static_cast<unsigned>(seq % 4) * 5;
    for (int op = 0; op < 10000; ++op) {
      if (live.empty() || rng() % 100 < insert_pct) {
        std::string s(rng() % 7, ' ');
        for (auto& c : s) c = static_cast<char>('a' + rng() % 3);
        const std::vector<Value> row{s, std::int64_t(rng() % 40)};
        const RecordId r = t.append(encode_row(row, schema));
        tree.insert(r, &meta);
        live.push_back(r);
      } else {
        const std::size_t i = rng() % live.size();
        const RecordId r = live[i];
        live[i] = live.back();
        live.pop_back();
        tree.erase(r, &meta);
        t.erase(r);
      }
    }
    RebuildOptions o;
    o.threads = 1 + static_cast<std::size_t>(seq % 3);
    const RebuildResult full = reconstruct(t, nullptr, o);
    const RebuildResult comp = reconstruct(t, &meta, o);
    if (comp.tree.scan_rids() != full.tree.scan_rids() ||
        full.tree.scan_rids() != tree.scan_rids()) {
      ++mismatches;
    }
    g_trees.check(full.tree, o.cfg, "criterion 3 full " + std::to_string(seq));
    g_trees.check(comp.tree, o.cfg, "criterion 3 compressed " + std::to_string(seq));
  }
  const double secs = since(t0);
  return {mismatches == 0 && secs < 300,
          "100 sequences of 10000 operations, " + std::to_string(mismatches) +
              " mismatches, " + std::to_string(secs) + " s"};
}

// ---- 4 -------------------------------------------------------------------

struct E48 {
  std::array<std::uint64_t, 6> w;
};
struct E48Less {
  bool operator()(const E48& a, const E48& b) const { return a.w < b.w; }
};

Outcome criterion4() {
  const auto t0 = Clock::now();
  std::size_t failures = 0, runs = 0;
  for (std::size_t n : {std::size_t{1000}, std::size_t{100000}, std::size_t{1000000}}) {
    std::mt19937_64 rng(n);
    std::vector<E48> input(n);
    for (auto& e : input) {
      // Narrow leading words force deep comparisons and many ties.
      e.w[0] = rng() % 3;
      e.w[1] = rng() % 5;
      for (std::size_t i = 2; i < 6; ++i) e.w[i] = rng();
    }
    auto ref = input;
    std::sort(ref.begin(), ref.end(), E48Less{});
    std::vector<E48> temp(n);
    for (std::size_t p : {1, 2, 4, 8}) {
      for (std::size_t t : {1, 2, 3}) {
        ++runs;
        auto v = input;
        rcsort::SortParams prm;
        prm.p = p;
        prm.elem_bytes = sizeof(E48);
        prm.cache_bytes = 256 * 1024;
        prm.forced_t = t;
        const auto finals = rcsort::row_column_sort(std::span(v), std::span(temp), prm, E48Less{});
        bool ok = std::equal(v.begin(), v.end(), ref.begin(),
                             [](const E48& a, const E48& b) { return a.w == b.w; });
        ok = ok && finals.size() == p;
        for (std::size_t i = 0; ok && i < p; ++i) {
          const std::size_t expect = i + 1 < p ? n / p : n - (p - 1) * (n / p);
          ok = finals[i].size() == expect && finals[i].begin == i * (n / p);
        }
        // Partition of the t*p sorted blocks taken directly.
        const auto blocks = rcsort::tile(0, n, t * p);
        std::vector<E48> sorted_blocks = input;
        std::vector<std::span<const E48>> spans;
        for (const auto& b : blocks) {
          std::sort(sorted_blocks.begin() + static_cast<std::ptrdiff_t>(b.begin),
                    sorted_blocks.begin() + static_cast<std::ptrdiff_t>(b.end), E48Less{});
          spans.emplace_back(sorted_blocks.data() + b.begin, b.size());
        }
        const auto split = rcsort::perfect_partition<E48>(spans, p, E48Less{}, p);
        const auto ranks = rcsort::column_ranks(n, p);
        for (std::size_t j = 0; ok && j < p; ++j) {
          ok = split.column_size(j) == ranks[j + 1] - ranks[j];
          if (!ok || j + 1 == p) continue;
          // Boundary: max of column j does not exceed min of column j+1.
          const E48* hi = nullptr;
          const E48* lo = nullptr;
          for (std::size_t b = 0; b < spans.size(); ++b) {
            if (split.cut[j + 1][b] > split.cut[j][b]) {
              const E48& x = spans[b][split.cut[j + 1][b] - 1];
              if (!hi || E48Less{}(*hi, x)) hi = &x;
            }
            if (split.cut[j + 2][b] > split.cut[j + 1][b]) {
              const E48& x = spans[b][split.cut[j + 1][b]];
              if (!lo || E48Less{}(x, *lo)) lo = &x;
            }
          }
          ok = !(hi && lo && E48Less{}(*lo, *hi));
        }
        if (!ok) ++failures;
      }
    }
  }
  const double secs = since(t0);
  return {failures == 0 && secs < 180,
          std::to_string(runs) + " sorts (p 1/2/4/8, t 1/2/3, n 1e3/1e5/1e6), " +
              std::to_string(failures) + " failures, " + std::to_string(secs) + " s"};
}

// ---- 5 -------------------------------------------------------------------

Outcome criterion5() {
  const auto t0 = Clock::now();
  struct Row {
    int id;
    std::size_t n;
    double ratio;
  };
  const Row rows[] = {{1, 48, 1.40}, {4, 72, 2.00}, {9, 112, 3.00}};
  bool pass = true;
  std::string detail;
  for (const Row& row : rows) {
    const Table t = make_table(zipf_generate({2.5, row.n, 0, 1000000, 7}));
    RebuildOptions o;
    const RebuildResult first = reconstruct(t, nullptr, o);
    g_trees.check(first.tree, o.cfg, "criterion 5 row " + std::to_string(row.id));
    StatsOptions so;
    so.measure_words = false;
    const DatasetStats s = compute_stats(t, first.meta, so);
    const bool size_ok = s.compressed_sort_key_bytes + 8 >= 40 && s.compressed_sort_key_bytes <= 48;
    const bool ratio_ok = std::abs(s.sort_key_ratio - row.ratio) <= 0.2 + 1e-9;
    pass = pass && size_ok && ratio_ok;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%srow %d: full %zu B, compressed %zu B (%zu+%zu bits)%s, ratio %.2f vs %.2f%s",
                  detail.empty() ? "" : "; ", row.id, s.full_sort_key_bytes,
                  s.compressed_sort_key_bytes, s.distinction_bits, s.rid_variant_bits,
                  size_ok ? "" : " [size off]", s.sort_key_ratio, row.ratio,
                  ratio_ok ? "" : " [ratio off]");
    detail += buf;
  }
  const double secs = since(t0);
  detail += "; " + std::to_string(secs) + " s";
  return {pass && secs < 180, detail};
}

// ---- 6, 7 ----------------------------------------------------------------

double median_total(const Table& t, const DSMetadata* meta, const RebuildOptions& o, int runs,
                    const std::string& tag) {
  std::vector<double> totals;
  for (int i = 0; i < runs; ++i) {
    const RebuildResult r = reconstruct(t, meta, o);
    g_trees.check(r.tree, o.cfg, tag);
    totals.push_back(r.report.total_seconds);
  }
  std::sort(totals.begin(), totals.end());
  return totals[totals.size() / 2];
}

const Table& zipf112() {
  static const Table t = make_table(zipf_generate({2.5, 112, 0, 1000000, 7}));
  return t;
}

const DSMetadata& zipf112_meta() {
  static const DSMetadata m = reconstruct(zipf112(), nullptr, RebuildOptions{}).meta;
  return m;
}

Outcome criterion6() {
  const Table& t = zipf112();
  const DSMetadata& meta = zipf112_meta();
  RebuildOptions o;
  o.threads = 1;
  const double full = median_total(t, nullptr, o, 3, "criterion 6 full");
  const double comp = median_total(t, &meta, o, 3, "criterion 6 compressed");
  const double improve = (full - comp) / full;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "Zipf(2.5,112,0) 1M keys, 1 thread: full %.3f s, compressed %.3f s, "
                "ratio %.2f, improvement %.1f%% (floor 15%%)",
                full, comp, full / comp, 100 * improve);
  return {improve >= 0.15, buf};
}

Outcome criterion7() {
  const Table& t = zipf112();
  const DSMetadata& meta = zipf112_meta();
  RebuildOptions o1, o4;
  o1.threads = 1;
  o4.threads = 4;
  const double one = median_total(t, &meta, o1, 3, "criterion 7 p=1");
  const double four = median_total(t, &meta, o4, 3, "criterion 7 p=4");
  const RebuildResult a = reconstruct(t, &meta, o1);
  const RebuildResult b = reconstruct(t, &meta, o4);
  const bool identical = a.tree.scan_rids() == b.tree.scan_rids();
  const double speedup = one / four;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "compressed rebuild 1M keys: 1 worker %.3f s, 4 workers %.3f s, speedup %.2fx "
                "(floor 2x), scan identical: %s, hardware threads: %u",
                one, four, speedup, identical ? "yes" : "no",
                std::thread::hardware_concurrency());
  return {identical && speedup >= 2.0, buf};
}

// ---- 8, 9 ----------------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  o.pass = g_trees.failures == 0 && g_trees.trees > 0;
  o.detail = std::to_string(g_trees.trees) + " trees checked (fanout, height = closed form, " +
             "leaf chain, partial keys), " + std::to_string(g_trees.failures) + " failures";
  if (!g_trees.first_failure.empty()) o.detail += "; first: " + g_trees.first_failure;
  return o;
}

Outcome criterion9() {
  const std::vector<IndexKey> keys{bits_key("0000"), bits_key("0001"), bits_key("0110"),
                                   bits_key("1011")};
  const auto v = views(keys);
  const auto greedy = build_dbitmap(v, 8).positions();
  const auto minimum = min_positions_bruteforce(v);
  auto fmt = [](const std::vector<BitPos>& p) {
    std::string s = "{";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + "}";
  };
  return {minimum.size() < greedy.size() && minimum == std::vector<BitPos>{2, 3},
          "keys 0000 0001 0110 1011: distinction positions " + fmt(greedy) + ", minimum " +
              fmt(minimum)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
