#include "ckidx/rebuild.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

#include "ckidx/dbits.hpp"
#include "ckidx/error.hpp"
#include "ckidx/parallel.hpp"
#include "ckidx/rcsort.hpp"
#include "sortkey.hpp"

namespace ckidx {

const char* method_name(SortMethod m) noexcept {
  return m == SortMethod::full ? "full" : "compressed";
}

namespace {

using Clock = std::chrono::steady_clock;
using namespace detail;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// How tree entries are derived from sort keys: the first key_bits bits of a
// sort key are key bits at positions doffset[0..), followed by rid bits.
struct Layout {
  SortMethod method = SortMethod::full;
  std::size_t key_bits = 0;
  std::size_t key_words = 0;  // full method: words of key before the rid word
  KeyCompressor compressor;   // compressed method
  unsigned pk = 0;
  std::vector<BitPos> doffset;
  // Per key position d: the pk window after d.
  std::vector<std::uint32_t> next_c;    // sort-key index of the first bit after d
  std::vector<std::uint32_t> win_mask;  // window bits carried in the sort key
  std::vector<std::uint32_t> ref_win;   // remaining window bits, from the reference
  bool fixed_len = false;
  std::uint16_t key_len = 0;
};

std::uint32_t window_bit(unsigned pk, std::size_t d, std::size_t q) {
  return std::uint32_t{1} << (pk - 1 - (q - d - 1));
}

Layout full_layout(const Table& table, unsigned pk) {
  Layout lay;
  lay.method = SortMethod::full;
  lay.key_bits = table.schema().max_key_bits();
  lay.key_words = table.schema().key_words();
  lay.pk = pk;
  lay.doffset.resize(lay.key_bits);
  lay.next_c.resize(lay.key_bits);
  lay.win_mask.assign(lay.key_bits, 0);
  lay.ref_win.assign(lay.key_bits, 0);
  for (std::size_t d = 0; d < lay.key_bits; ++d) {
    lay.doffset[d] = static_cast<BitPos>(d);
    lay.next_c[d] = static_cast<std::uint32_t>(d + 1);
    for (std::size_t q = d + 1; q <= d + pk && q < lay.key_bits; ++q) {
      lay.win_mask[d] |= window_bit(pk, d, q);
    }
  }
  return lay;
}

Layout compressed_layout(const Table& table, const DSMetadata& meta, unsigned pk) {
  Layout lay;
  lay.method = SortMethod::compressed;
  const Bitmap e = extraction_bitmap(meta, pk);
  lay.compressor = KeyCompressor(e, meta.rid_variant_mask);
  lay.key_bits = lay.compressor.key_bit_count();
  lay.pk = pk;
  lay.doffset = build_doffset(e);
  const std::size_t nbits = table.schema().max_key_bits();
  lay.next_c.resize(nbits);
  lay.win_mask.assign(nbits, 0);
  lay.ref_win.assign(nbits, 0);
  std::uint32_t rank = 0;
  for (std::size_t d = 0; d < nbits; ++d) {
    if (e.test(d)) ++rank;
    lay.next_c[d] = rank;
    for (std::size_t q = d + 1; q <= d + pk && q < nbits; ++q) {
      if (e.test(q)) lay.win_mask[d] |= window_bit(pk, d, q);
    }
    lay.ref_win[d] = partial_key_of(meta.reference_key, static_cast<BitPos>(d), pk) &
                     ~lay.win_mask[d];
  }
  return lay;
}

void set_fixed_length(Layout& lay, const Table& table) {
  const Schema& s = table.schema();
  lay.fixed_len = s.fixed_width();
  lay.key_len = static_cast<std::uint16_t>(s.max_key_bytes());
}

template <std::size_t W>
struct Codec {
  const Layout& lay;
  const Table& table;

  [[nodiscard]] RecordId rid(const Elem<W>& e) const noexcept {
    if (lay.method == SortMethod::full) return e.w[lay.key_words];
    return lay.compressor.record_id(e.w);
  }
  /// Sort-key index of the first differing key bit, key_bits if none.
  [[nodiscard]] std::size_t diff(const Elem<W>& a, const Elem<W>& b) const noexcept {
    const std::size_t c = first_diff_bit(a.w, b.w, W);
    return std::min(c, lay.key_bits);
  }
  [[nodiscard]] std::uint32_t partial(const Elem<W>& e, std::size_t d) const noexcept {
    const std::uint32_t m = lay.win_mask[d];
    if (m == 0) return lay.ref_win[d];
    const auto cnt = static_cast<unsigned>(std::popcount(m));
    const std::uint64_t v = read_bits(std::span<const std::uint64_t>(e.w, W), lay.next_c[d], cnt);
    const std::uint32_t top = cnt == 32 ? ~0u : ((1u << cnt) - 1u) << (lay.pk - cnt);
    const std::uint32_t bits = m == top ? static_cast<std::uint32_t>(v << (lay.pk - cnt))
                                        : static_cast<std::uint32_t>(pdep(v, m));
    return bits | lay.ref_win[d];
  }
  [[nodiscard]] std::uint16_t key_len(RecordId r) const noexcept {
    return lay.fixed_len ? lay.key_len : table.key_length(r);
  }

  template <class Entry>
  void fill(Entry& entry, const Elem<W>* prev, const Elem<W>& cur, RecordId r) const noexcept {
    entry.key_len = key_len(r);
    if (!prev) {
      entry.dbit_pos = 0;
      entry.partial_key = 0;
      return;
    }
    const std::size_t c = diff(*prev, cur);
    if (c >= lay.key_bits) {
      entry.dbit_pos = kEqualDbit;
      entry.partial_key = 0;
      return;
    }
    const BitPos d = lay.doffset[c];
    entry.dbit_pos = static_cast<std::uint16_t>(d);
    entry.partial_key = partial(cur, d);
  }
};

struct LevelPlan {
  std::vector<std::size_t> count;  // nodes per level, leaves first
  std::vector<std::size_t> span;   // sort keys per full node
  std::vector<NodeRef> base;
  std::size_t total = 0;
};

LevelPlan plan_levels(std::size_t n, const BuildConfig& cfg) {
  LevelPlan plan;
  if (n == 0) return plan;
  const std::size_t f0 = cfg.leaf_fill();
  const std::size_t f1 = cfg.inner_fill();
  plan.count.push_back((n + f0 - 1) / f0);
  plan.span.push_back(f0);
  while (plan.count.back() > 1) {
    plan.count.push_back((plan.count.back() + f1 - 1) / f1);
    plan.span.push_back(plan.span.back() * f1);
  }
  return plan;
}

// Builds the tree over sorted sort keys. Nodes of each level are laid out
// contiguously, so every node's references are known up front. Worker w
// builds the complete subtrees under a contiguous run of level-j nodes; the
// levels above j are built afterwards by the caller thread. The result does
// not depend on the number of workers.
template <std::size_t W>
void build_tree(IndexTree& tree, std::span<const Elem<W>> keys, const Codec<W>& codec,
                const BuildConfig& cfg, std::size_t p, Bitmap* dbitmap) {
  const std::size_t n = keys.size();
  tree.clear();
  if (n == 0) return;
  LevelPlan plan = plan_levels(n, cfg);
  const std::size_t levels = plan.count.size();
  const NodeRef first = tree.allocate_block(std::accumulate(
      plan.count.begin(), plan.count.end(), std::size_t{0}));
  NodeRef at = first;
  for (std::size_t l = 0; l < levels; ++l) {
    plan.base.push_back(at);
    at += plan.count[l];
  }
  const std::size_t f1 = cfg.inner_fill();

  auto highest_index = [&](std::size_t level, std::size_t m) {
    return std::min((m + 1) * plan.span[level], n) - 1;
  };

  auto build_leaf = [&](std::size_t k) {
    Node& node = tree.node(plan.base[0] + k);
    node = Node{};
    LeafNode& leaf = node.leaf;
    const std::size_t b = k * plan.span[0];
    const std::size_t e = std::min(b + plan.span[0], n);
    leaf.hdr.kind = NodeKind::leaf;
    leaf.hdr.level = 0;
    leaf.hdr.count = static_cast<std::uint16_t>(e - b);
    leaf.hdr.prev = k > 0 ? plan.base[0] + k - 1 : kNoNode;
    leaf.next = k + 1 < plan.count[0] ? plan.base[0] + k + 1 : kNoNode;
    for (std::size_t i = b; i < e; ++i) {
      LeafEntry& entry = leaf.entries[i - b];
      entry.record_id = codec.rid(keys[i]);
      codec.fill(entry, i == b ? nullptr : &keys[i - 1], keys[i], entry.record_id);
    }
    leaf.hdr.highest_key = leaf.entries[e - b - 1].record_id;
  };

  auto build_inner = [&](std::size_t level, std::size_t k) {
    Node& node = tree.node(plan.base[level] + k);
    node = Node{};
    InnerNode& inner = node.inner;
    const std::size_t b = k * f1;
    const std::size_t e = std::min(b + f1, plan.count[level - 1]);
    inner.hdr.kind = NodeKind::inner;
    inner.hdr.level = static_cast<std::uint32_t>(level);
    inner.hdr.count = static_cast<std::uint16_t>(e - b);
    inner.hdr.prev = kNoNode;
    for (std::size_t m = b; m < e; ++m) {
      InnerEntry& entry = inner.entries[m - b];
      const std::size_t h = highest_index(level - 1, m);
      entry.child = plan.base[level - 1] + m;
      entry.highest_key = codec.rid(keys[h]);
      codec.fill(entry, m == b ? nullptr : &keys[highest_index(level - 1, m - 1)], keys[h],
                 entry.highest_key);
    }
    inner.hdr.highest_key = inner.entries[e - b - 1].highest_key;
  };

  // Level whose nodes are split among the workers.
  std::size_t split_level = levels - 1;
  std::size_t workers = 1;
  if (p > 1) {
    for (std::size_t l = levels - 1; l-- > 0;) {
      if (plan.count[l] >= 4 * p) {
        split_level = l;
        workers = p;
        break;
      }
    }
  }

  std::vector<Bitmap> local_bits(workers);
  auto subtree_work = [&](std::size_t w) {
    const std::size_t nj = plan.count[split_level];
    const std::size_t a = w * nj / workers;
    const std::size_t z = (w + 1) * nj / workers;
    std::size_t factor = 1;
    for (std::size_t l = split_level + 1; l-- > 0;) {
      const std::size_t from = a * factor;
      const std::size_t to = std::min(z * factor, plan.count[l]);
      for (std::size_t k = from; k < to; ++k) {
        if (l == 0) {
          build_leaf(k);
        } else {
          build_inner(l, k);
        }
      }
      factor *= l == 0 ? 1 : f1;
    }
    if (dbitmap) {
      const std::size_t from = std::max<std::size_t>(1, a * plan.span[split_level]);
      const std::size_t to = std::min(z * plan.span[split_level], n);
      Bitmap bits(dbitmap->size());
      for (std::size_t i = from; i < to; ++i) {
        const std::size_t c = codec.diff(keys[i - 1], keys[i]);
        if (c < codec.lay.key_bits) bits.set(codec.lay.doffset[c]);
      }
      local_bits[w] = std::move(bits);
    }
  };
  run_workers(workers, subtree_work);

  for (std::size_t l = split_level + 1; l < levels; ++l) {
    for (std::size_t k = 0; k < plan.count[l]; ++k) build_inner(l, k);
  }
  if (dbitmap) {
    for (const Bitmap& b : local_bits) *dbitmap |= b;
  }
  tree.adopt(plan.base[levels - 1], levels, plan.base[0], n);
}

// Per-page output offsets of the live rows, and the page split among workers.
struct PageSplit {
  std::vector<std::size_t> offset;  // page -> first output slot
  std::size_t rows = 0;
};

PageSplit page_offsets(const Table& table) {
  PageSplit s;
  s.offset.resize(table.page_count() + 1);
  for (std::size_t pg = 0; pg < table.page_count(); ++pg) {
    s.offset[pg] = s.rows;
    s.rows += table.page_live_rows(pg);
  }
  s.offset[table.page_count()] = s.rows;
  return s;
}

std::optional<RecordId> first_live_row(const Table& table) {
  for (RecordId r = 0; r < table.slots(); ++r) {
    if (table.live(r)) return r;
  }
  return std::nullopt;
}

struct ScanTotals {
  std::vector<std::uint64_t> variant;  // OR of (row XOR reference) words
  std::uint64_t rid_or = 0;
};

// Walks the live rows of the pages assigned to each worker, calling
// emit(slot, rid, row) and folding every row into the variant words.
template <class Emit>
ScanTotals scan_rows(const Table& table, const PageSplit& split, std::size_t p,
                     const std::uint64_t* ref_words, Emit&& emit) {
  const std::size_t kw = table.schema().key_words();
  const std::size_t pages = table.page_count();
  const std::size_t workers = std::max<std::size_t>(1, std::min(p, pages));
  std::vector<ScanTotals> local(workers);
  run_workers(workers, [&](std::size_t w) {
    ScanTotals t;
    t.variant.assign(kw, 0);
    const std::size_t pb = w * pages / workers;
    const std::size_t pe = (w + 1) * pages / workers;
    for (std::size_t pg = pb; pg < pe; ++pg) {
      std::size_t slot = split.offset[pg];
      for (RecordId r = table.page_first(pg); r < table.page_end(pg); ++r) {
        if (!table.live(r)) continue;
        const Byte* row = table.row(r);
        for (std::size_t i = 0; i < kw; ++i) {
          std::uint64_t v;
          std::memcpy(&v, row + 8 * i, 8);
          if constexpr (std::endian::native == std::endian::little) v = __builtin_bswap64(v);
          t.variant[i] |= v ^ ref_words[i];
        }
        t.rid_or |= r;
        emit(slot++, r, row);
      }
    }
    local[w] = std::move(t);
  });
  ScanTotals all;
  all.variant.assign(kw, 0);
  for (const auto& t : local) {
    for (std::size_t i = 0; i < kw; ++i) all.variant[i] |= t.variant[i];
    all.rid_or |= t.rid_or;
  }
  return all;
}

}  // namespace

Bitmap extraction_bitmap(const DSMetadata& meta, unsigned pk_bits) {
  Bitmap e = meta.dbitmap;
  const std::size_t nbits = e.size();
  for (BitPos d : meta.dbitmap.positions()) {
    for (std::size_t q = std::size_t{d} + 1; q <= std::size_t{d} + pk_bits && q < nbits; ++q) {
      if (meta.variant_bitmap.test(q)) e.set(q);
    }
  }
  return e;
}

SortKeyArray extract_phase(const Table& table, const KeyCompressor& compressor,
                           std::size_t threads, ExtractPath path) {
  SortKeyArray out;
  out.words = compressor.word_count();
  const PageSplit split = page_offsets(table);
  out.data.assign(split.rows * out.words, 0);
  const std::vector<std::uint64_t> zero(table.schema().key_words(), 0);
  scan_rows(table, split, threads, zero.data(), [&](std::size_t slot, RecordId r, const Byte* row) {
    if (out.words) compressor.compress(row, r, out.data.data() + slot * out.words, path);
  });
  return out;
}

std::size_t linked_roots_height(std::span<const std::size_t> block_sizes,
                                const BuildConfig& cfg) {
  std::size_t h = 0;
  std::size_t roots = 0;
  for (std::size_t b : block_sizes) {
    if (b == 0) continue;
    h = std::max(h, expected_height(b, cfg));
    ++roots;
  }
  while (roots > 1) {
    roots = (roots + cfg.inner_fill() - 1) / cfg.inner_fill();
    ++h;
  }
  return h;
}

IndexTree build_sorted(const Table& table, std::span<const RecordId> sorted_rids,
                       const BuildConfig& cfg, std::size_t threads) {
  cfg.validate();
  IndexTree tree(table, cfg.pk_bits);
  Layout lay = full_layout(table, cfg.pk_bits);
  set_fixed_length(lay, table);
  auto run = [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const std::size_t n = sorted_rids.size();
    auto keys = make_elems<W>(n);
    const std::size_t kw = lay.key_words;
    for (std::size_t i = 0; i < n; ++i) {
      Elem<W>& e = keys[i];
      std::fill(std::begin(e.w), std::end(e.w), 0);
      const KeyView k = table.key(sorted_rids[i]);
      for (std::size_t j = 0; j < kw; ++j) e.w[j] = load_word_be(k, 8 * j);
      e.w[kw] = sorted_rids[i];
    }
    const Codec<W> codec{lay, table};
    build_tree<W>(tree, std::span<const Elem<W>>(keys.get(), n), codec, cfg, threads, nullptr);
  };
  dispatch_width(lay.key_words + 1, run);
  return tree;
}

RebuildResult reconstruct(const Table& table, const DSMetadata* meta,
                          const RebuildOptions& opts) {
  opts.cfg.validate();
  const auto t0 = Clock::now();
  const std::size_t p = std::max<std::size_t>(1, opts.threads);
  const std::size_t cache = opts.cache_bytes ? opts.cache_bytes : default_cache_bytes(p);
  const std::size_t key_bits = table.schema().max_key_bits();
  if (meta && meta->key_bits() != key_bits) {
    throw Error(Errc::size_mismatch, "metadata covers " + std::to_string(meta->key_bits()) +
                                         " key bits, table keys have " +
                                         std::to_string(key_bits));
  }

  Layout lay = meta ? compressed_layout(table, *meta, opts.cfg.pk_bits)
                    : full_layout(table, opts.cfg.pk_bits);
  set_fixed_length(lay, table);

  RebuildResult result{IndexTree(table, opts.cfg.pk_bits), DSMetadata::empty(key_bits), {}};
  RebuildReport& rep = result.report;
  rep.method = lay.method;
  rep.threads = p;
  rep.key_count = table.live_rows();
  if (meta) {
    rep.key_bits = lay.compressor.key_bit_count();
    rep.rid_bits = lay.compressor.rid_bit_count();
  } else {
    rep.key_bits = key_bits;
    rep.rid_bits = 64;
  }
  const std::size_t words = meta ? lay.compressor.word_count() : lay.key_words + 1;
  rep.sort_key_bytes = 8 * words;

  const auto first = first_live_row(table);
  std::vector<std::uint64_t> ref_words(table.schema().key_words(), 0);
  if (first) {
    const KeyView k = table.key(*first);
    result.meta.reference_key = IndexKey(k);
    for (std::size_t i = 0; i < ref_words.size(); ++i) ref_words[i] = load_word_be(k, 8 * i);
  }

  auto run = [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    rep.element_bytes = sizeof(Elem<W>);
    const auto te = Clock::now();
    const PageSplit split = page_offsets(table);
    const std::size_t n = split.rows;
    auto keys = make_elems<W>(n);
    ScanTotals totals;
    if (lay.method == SortMethod::compressed) {
      const std::size_t used = lay.compressor.word_count();
      totals = scan_rows(table, split, p, ref_words.data(),
                         [&](std::size_t slot, RecordId r, const Byte* row) {
                           Elem<W>& e = keys[slot];
                           if constexpr (W > 1) {
                             for (std::size_t i = used; i < W; ++i) e.w[i] = 0;
                           }
                           if (used == 0) e.w[0] = 0;
                           lay.compressor.compress(row, r, e.w, opts.path);
                         });
    } else {
      const std::size_t kw = lay.key_words;
      totals = scan_rows(table, split, p, ref_words.data(),
                         [&](std::size_t slot, RecordId r, const Byte* row) {
                           Elem<W>& e = keys[slot];
                           for (std::size_t i = 0; i < kw; ++i) {
                             std::uint64_t v;
                             std::memcpy(&v, row + 8 * i, 8);
                             if constexpr (std::endian::native == std::endian::little) {
                               v = __builtin_bswap64(v);
                             }
                             e.w[i] = v;
                           }
                           e.w[kw] = r;
                           for (std::size_t i = kw + 1; i < W; ++i) e.w[i] = 0;
                         });
    }
    const auto ts = Clock::now();
    rep.extract_seconds = seconds_between(te, ts);

    const std::span<Elem<W>> span(keys.get(), n);
    if (opts.count_words) {
      CountSink sink;
      sort_elems<W>(span, p, cache, opts.forced_t, CountingLess<W>(&sink));
      rep.comparisons = sink.comparisons.load();
      rep.word_comparisons = sink.words.load();
    } else {
      sort_elems<W>(span, p, cache, opts.forced_t, WordLess<W>{});
    }
    const auto tb = Clock::now();
    rep.sort_seconds = seconds_between(ts, tb);

    const Codec<W> codec{lay, table};
    Bitmap dbits(key_bits);
    build_tree<W>(result.tree, std::span<const Elem<W>>(keys.get(), n), codec, opts.cfg, p,
                  &dbits);
    result.meta.dbitmap = std::move(dbits);
    Bitmap variant(key_bits);
    std::copy(totals.variant.begin(), totals.variant.end(), variant.words().begin());
    result.meta.variant_bitmap = std::move(variant);
    result.meta.rid_variant_mask = totals.rid_or;
    keys.reset();
    rep.build_seconds = seconds_between(tb, Clock::now());
  };
  dispatch_width(words, run);

  rep.height = result.tree.height();
  rep.total_seconds = seconds_between(t0, Clock::now());
  return result;
}

}  // namespace ckidx
