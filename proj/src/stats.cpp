#include "ckidx/stats.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <limits>

#include "ckidx/extract.hpp"
#include "ckidx/parallel.hpp"
#include "ckidx/rebuild.hpp"
#include "sortkey.hpp"

namespace ckidx {

namespace {

std::size_t round_words(std::size_t bits) { return 8 * ((bits + 63) / 64); }

// Average words per comparison while sorting sort keys produced by fill(i, words).
template <class Fill>
double sort_word_cost(std::size_t n, std::size_t words, std::size_t threads, Fill&& fill) {
  double result = 0;
  auto run = [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    auto keys = detail::make_elems<W>(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(std::begin(keys[i].w), std::end(keys[i].w), 0);
      fill(i, keys[i].w);
    }
    detail::CountSink sink;
    detail::sort_elems<W>(std::span<detail::Elem<W>>(keys.get(), n), threads,
                          default_cache_bytes(threads), 0, detail::CountingLess<W>(&sink));
    const auto c = sink.comparisons.load();
    result = c ? static_cast<double>(sink.words.load()) / static_cast<double>(c) : 0.0;
  };
  detail::dispatch_width(std::max<std::size_t>(words, 1), run);
  return result;
}

}  // namespace

DatasetStats compute_stats(const Table& table, const DSMetadata& meta, const StatsOptions& opts) {
  DatasetStats s;
  std::vector<RecordId> rows;
  rows.reserve(table.live_rows());
  std::size_t total_bytes = 0;
  s.min_key_bytes = std::numeric_limits<std::size_t>::max();
  for (RecordId r = 0; r < table.slots(); ++r) {
    if (!table.live(r)) continue;
    rows.push_back(r);
    const std::size_t len = table.key_length(r);
    total_bytes += len;
    s.min_key_bytes = std::min(s.min_key_bytes, len);
    s.max_key_bytes = std::max(s.max_key_bytes, len);
  }
  s.key_count = rows.size();
  if (rows.empty()) s.min_key_bytes = 0;
  s.avg_key_bytes = rows.empty() ? 0.0 : static_cast<double>(total_bytes) / static_cast<double>(rows.size());
  s.full_key_bits = 8 * s.max_key_bytes;
  s.distinction_bits = meta.dbitmap.popcount();
  s.rid_variant_bits = static_cast<std::size_t>(std::popcount(meta.rid_variant_mask));
  s.compression_ratio = static_cast<double>(s.full_key_bits) /
                        static_cast<double>(std::max<std::size_t>(1, s.distinction_bits));
  s.full_sort_key_bytes = round_words(s.full_key_bits) + 8;
  s.compressed_sort_key_bytes = std::max<std::size_t>(8, round_words(s.distinction_bits + s.rid_variant_bits));
  s.sort_key_ratio = static_cast<double>(s.full_sort_key_bytes) /
                     static_cast<double>(s.compressed_sort_key_bytes);
  s.extraction_bits = extraction_bitmap(meta, opts.pk_bits).popcount();
  s.extended_sort_key_bytes = std::max<std::size_t>(8, round_words(s.extraction_bits + s.rid_variant_bits));

  if (opts.measure_words && !rows.empty()) {
    const std::size_t kw = table.schema().key_words();
    s.wcc_full = sort_word_cost(rows.size(), kw + 1, opts.threads,
                                [&](std::size_t i, std::uint64_t* w) {
                                  const KeyView k = table.key(rows[i]);
                                  for (std::size_t j = 0; j < kw; ++j) w[j] = load_word_be(k, 8 * j);
                                  w[kw] = rows[i];
                                });
    const KeyCompressor comp(meta.dbitmap, meta.rid_variant_mask);
    s.wcc_compressed = sort_word_cost(rows.size(), comp.word_count(), opts.threads,
                                      [&](std::size_t i, std::uint64_t* w) {
                                        comp.compress(table.row(rows[i]), rows[i], w);
                                      });
    s.word_comparison_ratio = s.wcc_compressed > 0 ? s.wcc_full / s.wcc_compressed : 0.0;
  }
  return s;
}

std::string format_stats(const DatasetStats& s) {
  std::string out;
  char line[128];
  auto row = [&](const char* name, const char* fmt, auto v) {
    char val[64];
    std::snprintf(val, sizeof val, fmt, v);
    std::snprintf(line, sizeof line, "%-34s %s\n", name, val);
    out += line;
  };
  row("# keys", "%zu", s.key_count);
  row("shortest key (bytes)", "%zu", s.min_key_bytes);
  row("average key (bytes)", "%.2f", s.avg_key_bytes);
  row("longest key (bytes)", "%zu", s.max_key_bytes);
  row("# bits in full key", "%zu", s.full_key_bits);
  row("# distinction bits in keys", "%zu", s.distinction_bits);
  row("# variant bits in record IDs", "%zu", s.rid_variant_bits);
  row("compression ratio", "%.2f", s.compression_ratio);
  row("full sort key (bytes)", "%zu", s.full_sort_key_bytes);
  row("compressed sort key (bytes)", "%zu", s.compressed_sort_key_bytes);
  row("sort key ratio", "%.2f", s.sort_key_ratio);
  row("extraction bits with partial keys", "%zu", s.extraction_bits);
  row("extended sort key (bytes)", "%zu", s.extended_sort_key_bytes);
  row("words per comparison, full", "%.3f", s.wcc_full);
  row("words per comparison, compressed", "%.3f", s.wcc_compressed);
  row("word comparison ratio", "%.2f", s.word_comparison_ratio);
  return out;
}

}  // namespace ckidx
