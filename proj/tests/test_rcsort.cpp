#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>

#include "ckidx/error.hpp"
#include "ckidx/rcsort.hpp"

using namespace ckidx;
using namespace ckidx::rcsort;

namespace {

struct E48 {
  std::array<std::uint64_t, 6> w;
  friend bool operator==(const E48&, const E48&) = default;
};
struct E48Less {
  bool operator()(const E48& a, const E48& b) const { return a.w < b.w; }
};

std::vector<E48> random_e48(std::size_t n, std::uint64_t seed, unsigned spread = 0) {
  std::mt19937_64 rng(seed);
  std::vector<E48> v(n);
  for (auto& e : v) {
    for (auto& x : e.w) x = spread ? rng() % spread : rng();
  }
  return v;
}

auto less_int = [](int a, int b) { return a < b; };

}  // namespace

TEST_CASE("basic sort") {
  std::vector<int> sorted(1000);
  std::iota(sorted.begin(), sorted.end(), 0);
  auto a = sorted;
  basic_sort(std::span(a), less_int);
  CHECK(a == sorted);

  std::vector<int> rev(sorted.rbegin(), sorted.rend());
  basic_sort(std::span(rev), less_int);
  CHECK(rev == sorted);

  std::vector<int> same(5000, 7);
  basic_sort(std::span(same), less_int);
  CHECK(same == std::vector<int>(5000, 7));

  std::mt19937_64 rng(31);
  for (std::size_t n : {0, 1, 2, 15, 16, 17, 41, 1000, 100000}) {
    std::vector<int> v(n);
    for (auto& x : v) x = static_cast<int>(rng() % (n / 3 + 1));
    auto ref = v;
    std::sort(ref.begin(), ref.end());
    basic_sort(std::span(v), less_int);
    REQUIRE(v == ref);
  }
}

TEST_CASE("multiway merge") {
  SUBCASE("one run is a copy") {
    const std::vector<int> r{1, 3, 5};
    std::vector<std::span<const int>> runs{r};
    std::vector<int> out(3);
    multiway_merge<int>(runs, out.data(), less_int);
    CHECK(out == r);
  }
  SUBCASE("two interleaved runs") {
    const std::vector<int> a{1, 3, 5, 7}, b{2, 4, 6, 8, 9};
    std::vector<std::span<const int>> runs{a, b};
    std::vector<int> out(9), ref(9);
    multiway_merge<int>(runs, out.data(), less_int);
    std::merge(a.begin(), a.end(), b.begin(), b.end(), ref.begin());
    CHECK(out == ref);
  }
  SUBCASE("sixteen random runs, some empty") {
    std::mt19937_64 rng(32);
    for (int round = 0; round < 50; ++round) {
      std::vector<std::vector<int>> data(16);
      std::vector<int> all;
      for (auto& d : data) {
        d.resize(rng() % 40);
        for (auto& x : d) x = static_cast<int>(rng() % 50);
        std::sort(d.begin(), d.end());
        all.insert(all.end(), d.begin(), d.end());
      }
      std::vector<std::span<const int>> runs(data.begin(), data.end());
      std::vector<int> out(all.size());
      multiway_merge<int>(runs, out.data(), less_int);
      std::sort(all.begin(), all.end());
      REQUIRE(out == all);
    }
  }
}

TEST_CASE("x-split") {
  // n = 32, four sorted blocks; the last block holds only large values and
  // contributes nothing to the 8 smallest.
  const std::vector<int> b0{0, 3, 6, 9, 12, 15, 18, 21}, b1{1, 4, 7, 10, 13, 16, 19, 22},
      b2{2, 5, 8, 11, 14, 17, 20, 23}, b3{24, 25, 26, 27, 28, 29, 30, 31};
  std::vector<std::span<const int>> blocks{b0, b1, b2, b3};
  CHECK(x_split<int>(blocks, 0, less_int) == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(x_split<int>(blocks, 32, less_int) == std::vector<std::size_t>{8, 8, 8, 8});
  const auto cut = x_split<int>(blocks, 8, less_int);
  CHECK(cut == std::vector<std::size_t>{3, 3, 2, 0});
  CHECK_THROWS_AS(x_split<int>(blocks, 33, less_int), Error);

  std::mt19937_64 rng(33);
  for (int round = 0; round < 200; ++round) {
    const std::size_t k = 1 + rng() % 8;
    std::vector<std::vector<int>> data(k);
    std::vector<int> all;
    for (auto& d : data) {
      d.resize(rng() % 20);
      for (auto& x : d) x = static_cast<int>(rng() % 15);
      std::sort(d.begin(), d.end());
      all.insert(all.end(), d.begin(), d.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::span<const int>> bl(data.begin(), data.end());
    const std::size_t x = rng() % (all.size() + 1);
    const auto c = x_split<int>(bl, x, less_int);
    std::vector<int> low;
    std::size_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      total += c[i];
      low.insert(low.end(), data[i].begin(), data[i].begin() + static_cast<std::ptrdiff_t>(c[i]));
    }
    REQUIRE(total == x);
    std::sort(low.begin(), low.end());
    REQUIRE(std::equal(low.begin(), low.end(), all.begin()));
  }
}

TEST_CASE("perfect partition") {
  std::mt19937_64 rng(34);
  for (std::size_t p : {1, 2, 3, 4, 8}) {
    std::vector<std::vector<int>> data(6);
    std::vector<int> all;
    for (auto& d : data) {
      d.resize(48);
      for (auto& x : d) x = static_cast<int>(rng() % 30);
      std::sort(d.begin(), d.end());
      all.insert(all.end(), d.begin(), d.end());
    }
    std::vector<std::span<const int>> bl(data.begin(), data.end());
    const Split s = perfect_partition<int>(bl, p, less_int, p);
    REQUIRE(s.columns() == p);
    std::vector<int> joined;
    int prev_max = -1;
    for (std::size_t j = 0; j < p; ++j) {
      if (all.size() % p == 0) REQUIRE(s.column_size(j) == all.size() / p);
      std::vector<int> col;
      for (std::size_t b = 0; b < bl.size(); ++b) {
        REQUIRE(s.cut[j][b] <= s.cut[j + 1][b]);
        col.insert(col.end(), data[b].begin() + static_cast<std::ptrdiff_t>(s.cut[j][b]),
                   data[b].begin() + static_cast<std::ptrdiff_t>(s.cut[j + 1][b]));
      }
      std::sort(col.begin(), col.end());
      if (!col.empty()) {
        REQUIRE(prev_max <= col.front());
        prev_max = col.back();
      }
      joined.insert(joined.end(), col.begin(), col.end());
    }
    std::sort(all.begin(), all.end());
    REQUIRE(joined == all);
  }
}

TEST_CASE("row-column sort: 32 elements, p = 4, c = 2, t = 1") {
  std::vector<int> v(32);
  std::iota(v.begin(), v.end(), 0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(35));
  std::vector<int> temp(32);
  SortParams prm;
  prm.p = 4;
  prm.elem_bytes = 1;
  prm.cache_bytes = 2;
  prm.forced_t = 1;
  const auto finals = row_column_sort(std::span(v), std::span(temp), prm, less_int);
  REQUIRE(finals.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(finals[i] == BlockRange{8 * i, 8 * i + 8});
  std::vector<int> ref(32);
  std::iota(ref.begin(), ref.end(), 0);
  CHECK(v == ref);
}

TEST_CASE("row-column sort over 48-byte elements") {
  const auto input = random_e48(100000, 36, 4);
  auto ref = input;
  std::sort(ref.begin(), ref.end(), E48Less{});
  for (std::size_t p : {1, 2, 4, 8}) {
    for (std::size_t t : {0, 1, 2, 3}) {
      auto v = input;
      std::vector<E48> temp(v.size());
      SortParams prm;
      prm.p = p;
      prm.elem_bytes = sizeof(E48);
      prm.cache_bytes = 64 * 1024;
      prm.forced_t = t;
      const auto finals = row_column_sort(std::span(v), std::span(temp), prm, E48Less{});
      REQUIRE(v == ref);
      REQUIRE(finals.size() == p);
      for (std::size_t i = 0; i < p; ++i) {
        REQUIRE(finals[i].size() == (i + 1 == p ? v.size() - (p - 1) * (v.size() / p)
                                                : v.size() / p));
      }
    }
  }
}

TEST_CASE("sort parameters") {
  SortParams prm;
  prm.n = 1000000;
  prm.p = 4;
  prm.elem_bytes = 48;
  prm.cache_bytes = 2 << 20;
  CHECK(prm.c() == (2u << 20) / 48);
  const double t = static_cast<double>(prm.t());
  CHECK(t >= 1);
  CHECK(tile(0, 10, 3) == std::vector<BlockRange>{{0, 3}, {3, 6}, {6, 10}});
  CHECK(column_ranks(10, 3) == std::vector<std::size_t>{0, 3, 6, 10});
  std::vector<int> small(4), temp(2);
  CHECK_THROWS_AS(row_column_sort(std::span(small), std::span(temp), SortParams{}, less_int),
                  Error);
}
