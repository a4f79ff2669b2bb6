#pragma once

// Zipf(s, n, m) synthetic keys: n-byte keys made of 8-byte words whose first
// m bytes are a fixed character and whose other bytes are letters drawn
// independently with P(rank k) proportional to k^-s over 'a'..'z'.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ckidx/dataset_io.hpp"

namespace ckidx {

inline constexpr Byte kZipfPrefixChar = 'a';
inline constexpr std::size_t kZipfLetters = 26;

struct ZipfSpec {
  double s = 1.0;
  std::size_t n = 8;
  std::size_t m = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Probability of each letter rank, 'a' first.
std::vector<double> zipf_pmf(double s, std::size_t ranks = kZipfLetters);

/// Keys with schema fixed_string(n), deterministic in the seed.
KeySet zipf_generate(const ZipfSpec& spec);

}  // namespace ckidx
