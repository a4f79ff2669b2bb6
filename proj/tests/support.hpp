#pragma once

// Reference implementations used as oracles by the tests.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/dataset_io.hpp"
#include "ckidx/keycodec.hpp"
#include "ckidx/table.hpp"

namespace ckidx::test {

inline int bit_at(KeyView k, std::size_t pos) {
  const std::size_t byte = pos / 8;
  if (byte >= k.size()) return 0;
  return (k[byte] >> (7 - pos % 8)) & 1;
}

/// Bit-by-bit scan for the first differing position.
inline std::optional<BitPos> naive_dbit(KeyView a, KeyView b) {
  const std::size_t n = 8 * std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (bit_at(a, i) != bit_at(b, i)) return static_cast<BitPos>(i);
  }
  return std::nullopt;
}

/// Byte-wise comparison with zero padding.
inline int naive_compare(KeyView a, KeyView b) {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int x = i < a.size() ? a[i] : 0;
    const int y = i < b.size() ? b[i] : 0;
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

/// Bits of `key` at the set positions then the masked record-ID bits, one
/// int per bit.
inline std::vector<int> naive_gather(KeyView key, const Bitmap& bm, RecordId rid,
                                     std::uint64_t mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < bm.size(); ++i) {
    if (bm.test(i)) out.push_back(bit_at(key, i));
  }
  for (int b = 63; b >= 0; --b) {
    if ((mask >> b) & 1) out.push_back(static_cast<int>((rid >> b) & 1));
  }
  return out;
}

inline std::vector<int> word_bits(const std::vector<std::uint64_t>& w, std::size_t n) {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>((w[i / 64] >> (63 - i % 64)) & 1);
  return out;
}

/// Key from a string of '0'/'1' characters, zero padded to whole bytes.
inline IndexKey bits_key(const std::string& bits) {
  std::vector<Byte> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') bytes[i / 8] |= static_cast<Byte>(0x80 >> (i % 8));
  }
  return IndexKey(std::move(bytes));
}

inline std::vector<KeyView> views(const std::vector<IndexKey>& keys) {
  std::vector<KeyView> v;
  for (const auto& k : keys) v.push_back(k.view());
  return v;
}

/// Full-key (key, rid) order of every live row.
inline std::vector<RecordId> oracle_order(const Table& t) {
  std::vector<RecordId> rows;
  for (RecordId r = 0; r < t.slots(); ++r) {
    if (t.live(r)) rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [&](RecordId a, RecordId b) {
    const int c = naive_compare(t.key(a), t.key(b));
    return c != 0 ? c < 0 : a < b;
  });
  return rows;
}

/// Fixed-width random keys over a small alphabet so that duplicates and
/// long shared prefixes occur.
inline KeySet random_keys(std::size_t n, std::size_t len, unsigned alphabet,
                          std::uint64_t seed) {
  KeySet ks(Schema({ColumnType::fixed_string(static_cast<std::uint32_t>(len))}));
  std::mt19937_64 rng(seed);
  std::vector<Byte> k(len);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& b : k) b = static_cast<Byte>('a' + rng() % alphabet);
    ks.add(k);
  }
  return ks;
}

}  // namespace ckidx::test
