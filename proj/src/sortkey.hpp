#pragma once

// Fixed-width sort keys shared by the rebuild pipeline and the statistics.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <span>
#include <string>
#include <type_traits>

#include "ckidx/error.hpp"
#include "ckidx/rcsort.hpp"

namespace ckidx::detail {

template <std::size_t W>
struct Elem {
  std::uint64_t w[W];
};

template <std::size_t W>
struct WordLess {
  bool operator()(const Elem<W>& a, const Elem<W>& b) const noexcept {
    for (std::size_t i = 0; i < W; ++i) {
      if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
    }
    return false;
  }
};

struct CountSink {
  std::atomic<std::uint64_t> comparisons{0};
  std::atomic<std::uint64_t> words{0};
};

// Counts locally; every copy starts from zero and adds its counts to the
// shared sink when destroyed.
template <std::size_t W>
class CountingLess {
 public:
  explicit CountingLess(CountSink* sink) : sink_(sink) {}
  CountingLess(const CountingLess& o) : sink_(o.sink_) {}
  CountingLess& operator=(const CountingLess& o) {
    flush();
    sink_ = o.sink_;
    return *this;
  }
  ~CountingLess() { flush(); }

  bool operator()(const Elem<W>& a, const Elem<W>& b) noexcept {
    ++comparisons_;
    for (std::size_t i = 0; i < W; ++i) {
      if (a.w[i] != b.w[i]) {
        words_ += i + 1;
        return a.w[i] < b.w[i];
      }
    }
    words_ += W;
    return false;
  }

 private:
  void flush() noexcept {
    if (comparisons_ == 0) return;
    sink_->comparisons += comparisons_;
    sink_->words += words_;
    comparisons_ = 0;
    words_ = 0;
  }

  CountSink* sink_;
  std::uint64_t comparisons_ = 0;
  std::uint64_t words_ = 0;
};

constexpr std::size_t kWidths[] = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12,
                                   13, 14, 15, 16, 20, 24, 32, 48, 64, 96, 128};

template <std::size_t I = 0, class F>
void dispatch_width(std::size_t words, F& f) {
  if constexpr (I == std::size(kWidths)) {
    throw Error(Errc::unsupported, "sort keys of " + std::to_string(words) +
                                       " words exceed the supported maximum");
  } else {
    if (words <= kWidths[I]) {
      f(std::integral_constant<std::size_t, kWidths[I]>{});
      return;
    }
    dispatch_width<I + 1>(words, f);
  }
}

template <std::size_t W>
std::unique_ptr<Elem<W>[]> make_elems(std::size_t n) {
  return std::make_unique_for_overwrite<Elem<W>[]>(std::max<std::size_t>(n, 1));
}

template <std::size_t W, class Less>
void sort_elems(std::span<Elem<W>> keys, std::size_t p, std::size_t cache, std::size_t forced_t,
                Less less) {
  auto temp = make_elems<W>(keys.size());
  rcsort::SortParams prm;
  prm.n = keys.size();
  prm.p = p;
  prm.elem_bytes = sizeof(Elem<W>);
  prm.cache_bytes = cache;
  prm.forced_t = forced_t;
  rcsort::row_column_sort<Elem<W>>(keys, std::span<Elem<W>>(temp.get(), keys.size()), prm,
                                   less);
}


}  // namespace ckidx::detail
