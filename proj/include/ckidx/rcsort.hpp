#pragma once

// Row-column sort: a barrier-phased parallel comparison sort.
//
//   1. The array is cut into t*p blocks, t per worker. Each block is cut into
//      cache-sized sub-blocks that are quicksorted in place and then merged
//      with a loser tree into the temp array.
//   2. The t*p sorted blocks are split into p rank columns (a perfect
//      partition); worker i computes the cut at rank i*n/p.
//   3. Worker i merges column i of every block into final block i of the key
//      array.
//
// Only the comparator is used to order elements, so any element size works.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

#include "ckidx/error.hpp"
#include "ckidx/parallel.hpp"

namespace ckidx::rcsort {

inline constexpr std::size_t kInsertionThreshold = 16;

struct SortParams {
  std::size_t n = 0;
  std::size_t p = 1;
  std::size_t elem_bytes = 1;
  std::size_t cache_bytes = std::size_t{2} << 20;  // per thread
  std::size_t forced_t = 0;                        // 0: derive from n, p, c

  /// Elements per cache budget.
  [[nodiscard]] std::size_t c() const noexcept {
    return std::max<std::size_t>(1, cache_bytes / std::max<std::size_t>(1, elem_bytes));
  }
  /// Blocks per worker, chosen so that n/(tpc) ~ tp.
  [[nodiscard]] std::size_t t() const noexcept {
    if (forced_t) return forced_t;
    const double root = std::sqrt(static_cast<double>(n) / static_cast<double>(c()));
    return std::max<std::size_t>(1, static_cast<std::size_t>(root / static_cast<double>(p)));
  }
};

/// Half-open element range [begin, end).
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

/// k blocks tiling [begin, begin + n); the last one absorbs the remainder.
inline std::vector<BlockRange> tile(std::size_t begin, std::size_t n, std::size_t k) {
  std::vector<BlockRange> out(k);
  const std::size_t step = n / k;
  for (std::size_t i = 0; i < k; ++i) {
    out[i].begin = begin + i * step;
    out[i].end = i + 1 == k ? begin + n : begin + (i + 1) * step;
  }
  return out;
}

/// Rank boundaries of p columns over n elements: p + 1 values.
inline std::vector<std::size_t> column_ranks(std::size_t n, std::size_t p) {
  std::vector<std::size_t> r(p + 1);
  for (std::size_t i = 0; i < p; ++i) r[i] = i * (n / p);
  r[p] = n;
  return r;
}

namespace detail {

template <class T, class Less>
void insertion_sort(T* first, T* last, Less& less) {
  for (T* i = first + 1; i < last; ++i) {
    if (!less(*i, *(i - 1))) continue;
    T v = std::move(*i);
    T* j = i;
    do {
      *j = std::move(*(j - 1));
      --j;
    } while (j > first && less(v, *(j - 1)));
    *j = std::move(v);
  }
}

template <class T, class Less>
T* median3(T* a, T* b, T* c, Less& less) {
  if (less(*a, *b)) {
    if (less(*b, *c)) return b;
    return less(*a, *c) ? c : a;
  }
  if (less(*a, *c)) return a;
  return less(*b, *c) ? c : b;
}

}  // namespace detail

/// Quicksort around the pseudo-median of nine, insertion sort below
/// kInsertionThreshold elements.
template <class T, class Less>
void basic_sort(T* first, T* last, Less& less) {
  while (last - first > static_cast<std::ptrdiff_t>(kInsertionThreshold)) {
    const std::ptrdiff_t n = last - first;
    T* mid = first + n / 2;
    T* pivot_pos;
    if (n > 40) {
      const std::ptrdiff_t s = n / 8;
      pivot_pos = detail::median3(
          detail::median3(first, first + s, first + 2 * s, less),
          detail::median3(mid - s, mid, mid + s, less),
          detail::median3(last - 1 - 2 * s, last - 1 - s, last - 1, less), less);
    } else {
      pivot_pos = detail::median3(first, mid, last - 1, less);
    }
    std::swap(*first, *pivot_pos);
    const T pivot = *first;

    // Hoare partition; both halves are non-empty.
    T* i = first - 1;
    T* j = last;
    while (true) {
      do ++i; while (less(*i, pivot));
      do --j; while (less(pivot, *j));
      if (i >= j) break;
      std::swap(*i, *j);
    }
    T* split = j + 1;
    if (split - first < last - split) {
      basic_sort(first, split, less);
      first = split;
    } else {
      basic_sort(split, last, less);
      last = split;
    }
  }
  detail::insertion_sort(first, last, less);
}

template <class T, class Less>
void basic_sort(std::span<T> range, Less less) {
  if (range.size() > 1) basic_sort(range.data(), range.data() + range.size(), less);
}

/// Merges sorted runs into `out` with a loser tree: ceil(log2 x) comparator
/// calls per output element. Ties go to the lower run index.
template <class T, class Less>
void multiway_merge(std::span<const std::span<const T>> runs, T* out, Less less) {
  const std::size_t k = runs.size();
  if (k == 0) return;
  if (k == 1) {
    std::copy(runs[0].begin(), runs[0].end(), out);
    return;
  }
  const std::size_t leaves = std::bit_ceil(k);
  std::vector<const T*> cur(leaves, nullptr);
  std::vector<const T*> end(leaves, nullptr);
  std::size_t total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    cur[i] = runs[i].data();
    end[i] = runs[i].data() + runs[i].size();
    total += runs[i].size();
  }
  // Does run a come out before run b?
  auto beats = [&](std::size_t a, std::size_t b) -> bool {
    if (cur[a] == end[a]) return false;
    if (cur[b] == end[b]) return true;
    return a < b ? !less(*cur[b], *cur[a]) : less(*cur[a], *cur[b]);
  };

  std::vector<std::size_t> loser(leaves);
  std::vector<std::size_t> winner(2 * leaves);
  for (std::size_t i = 0; i < leaves; ++i) winner[leaves + i] = i;
  for (std::size_t node = leaves - 1; node >= 1; --node) {
    const std::size_t l = winner[2 * node];
    const std::size_t r = winner[2 * node + 1];
    if (beats(l, r)) {
      winner[node] = l;
      loser[node] = r;
    } else {
      winner[node] = r;
      loser[node] = l;
    }
  }
  std::size_t top = winner[1];
  for (std::size_t produced = 0; produced < total; ++produced) {
    *out++ = *cur[top]++;
    for (std::size_t node = (top + leaves) / 2; node >= 1; node /= 2) {
      if (beats(loser[node], top)) std::swap(loser[node], top);
    }
  }
}

/// Per-block cut positions such that exactly x elements lie before the cuts
/// and none of them is greater than any element after the cuts. Equal
/// elements are assigned in block order, so cuts for growing x are monotone.
template <class T, class Less>
std::vector<std::size_t> x_split(std::span<const std::span<const T>> blocks,
                                 std::size_t x, Less less) {
  const std::size_t k = blocks.size();
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  if (x > total) {
    throw Error(Errc::out_of_range, "split rank " + std::to_string(x) + " exceeds " +
                                        std::to_string(total) + " elements");
  }
  std::vector<std::size_t> lo(k, 0), hi(k), lb(k), ub(k);
  for (std::size_t i = 0; i < k; ++i) hi[i] = blocks[i].size();

  while (true) {
    std::size_t pick = k;
    std::size_t widest = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (hi[i] - lo[i] > widest) {
        widest = hi[i] - lo[i];
        pick = i;
      }
    }
    if (pick == k) return lo;

    const T& v = blocks[pick][lo[pick] + widest / 2];
    std::size_t below = 0, through = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& b = blocks[j];
      lb[j] = static_cast<std::size_t>(
          std::lower_bound(b.begin(), b.end(), v, less) - b.begin());
      ub[j] = static_cast<std::size_t>(
          std::upper_bound(b.begin() + static_cast<std::ptrdiff_t>(lb[j]), b.end(), v, less) -
          b.begin());
      below += lb[j];
      through += ub[j];
    }
    if (below <= x && x <= through) {
      std::size_t remaining = x - below;
      std::vector<std::size_t> cut(lb);
      for (std::size_t j = 0; j < k && remaining > 0; ++j) {
        const std::size_t take = std::min(remaining, ub[j] - lb[j]);
        cut[j] += take;
        remaining -= take;
      }
      return cut;
    }
    if (through < x) {
      for (std::size_t j = 0; j < k; ++j) lo[j] = std::max(lo[j], ub[j]);
    } else {
      for (std::size_t j = 0; j < k; ++j) hi[j] = std::min(hi[j], lb[j]);
    }
  }
}

/// cut[j][b] = offset inside block b where column j starts; j = 0..p.
struct Split {
  std::vector<std::vector<std::size_t>> cut;

  [[nodiscard]] std::size_t columns() const noexcept {
    return cut.empty() ? 0 : cut.size() - 1;
  }
  [[nodiscard]] std::size_t column_size(std::size_t j) const noexcept {
    std::size_t s = 0;
    for (std::size_t b = 0; b < cut[j].size(); ++b) s += cut[j + 1][b] - cut[j][b];
    return s;
  }
};

/// Perfect p-partition of sorted blocks; worker i computes the cut at rank
/// i * n/p.
template <class T, class Less>
Split perfect_partition(std::span<const std::span<const T>> blocks, std::size_t p,
                        Less less, std::size_t workers = 1) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  const auto ranks = column_ranks(n, p);
  Split s;
  s.cut.assign(p + 1, std::vector<std::size_t>(blocks.size(), 0));
  for (std::size_t b = 0; b < blocks.size(); ++b) s.cut[p][b] = blocks[b].size();
  auto work = [&](std::size_t w) {
    Less local = less;
    for (std::size_t i = w; i < p; i += std::max<std::size_t>(1, workers)) {
      if (i > 0) s.cut[i] = x_split(blocks, ranks[i], local);
    }
  };
  run_workers(std::max<std::size_t>(1, std::min(workers, p)), work);
  return s;
}

/// Sorts `keys` using `temp` (same size) as scratch. Returns the p final
/// blocks of `keys`; their concatenation is the sorted array and block i was
/// produced by worker i.
template <class T, class Less>
std::vector<BlockRange> row_column_sort(std::span<T> keys, std::span<T> temp,
                                        const SortParams& params, Less less) {
  const std::size_t n = keys.size();
  const std::size_t p = std::max<std::size_t>(1, params.p);
  if (temp.size() < n) throw Error(Errc::size_mismatch, "temp array smaller than input");
  SortParams prm = params;
  prm.n = n;
  prm.p = p;
  const std::size_t t = prm.t();
  const std::size_t c = prm.c();
  const std::size_t tp = t * p;
  const auto init = tile(0, n, tp);

  // Phase 1: sort sub-blocks, merge each block into temp.
  run_workers(p, [&](std::size_t w) {
    Less local = less;
    for (std::size_t j = 0; j < t; ++j) {
      const BlockRange blk = init[w * t + j];
      const std::size_t subs = std::max<std::size_t>(1, blk.size() / c);
      const auto sub = tile(blk.begin, blk.size(), subs);
      std::vector<std::span<const T>> runs;
      runs.reserve(sub.size());
      for (const auto& sb : sub) {
        basic_sort(keys.subspan(sb.begin, sb.size()), local);
        runs.emplace_back(keys.data() + sb.begin, sb.size());
      }
      multiway_merge<T>(runs, temp.data() + blk.begin, local);
    }
  });

  // Phase 2: perfect partition of the sorted blocks.
  std::vector<std::span<const T>> sorted;
  sorted.reserve(tp);
  for (const auto& blk : init) sorted.emplace_back(temp.data() + blk.begin, blk.size());
  const Split split = perfect_partition<T>(sorted, p, less, p);

  // Phase 3: column merges into the final blocks.
  const auto ranks = column_ranks(n, p);
  run_workers(p, [&](std::size_t w) {
    Less local = less;
    std::vector<std::span<const T>> runs;
    runs.reserve(tp);
    for (std::size_t b = 0; b < tp; ++b) {
      const std::size_t from = split.cut[w][b];
      const std::size_t to = split.cut[w + 1][b];
      runs.push_back(sorted[b].subspan(from, to - from));
    }
    multiway_merge<T>(runs, keys.data() + ranks[w], local);
  });

  std::vector<BlockRange> finals(p);
  for (std::size_t i = 0; i < p; ++i) finals[i] = {ranks[i], ranks[i + 1]};
  return finals;
}

}  // namespace ckidx::rcsort
