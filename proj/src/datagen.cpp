#include "ckidx/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ckidx/error.hpp"

namespace ckidx {

void ZipfSpec::validate() const {
  if (!(s >= 0.0) || !std::isfinite(s)) throw Error(Errc::invalid_value, "exponent must be >= 0");
  if (n == 0 || n % 8 != 0) throw Error(Errc::invalid_value, "key bytes must be a positive multiple of 8");
  if (n > 0xFFFF) throw Error(Errc::invalid_value, "key bytes must be at most 65535");
  if (m >= 8) throw Error(Errc::invalid_value, "fixed bytes per word must be below 8");
}

std::vector<double> zipf_pmf(double s, std::size_t ranks) {
  std::vector<double> p(ranks);
  double total = 0;
  for (std::size_t k = 0; k < ranks; ++k) {
    p[k] = std::pow(static_cast<double>(k + 1), -s);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

KeySet zipf_generate(const ZipfSpec& spec) {
  spec.validate();
  const auto pmf = zipf_pmf(spec.s);
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  cdf.back() = 1.0;

  std::mt19937_64 rng(spec.seed);
  auto letter = [&] {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    return static_cast<Byte>('a' + std::min(k, kZipfLetters - 1));
  };

  KeySet keys{Schema({ColumnType::fixed_string(static_cast<std::uint32_t>(spec.n))})};
  keys.reserve(spec.count, spec.count * spec.n);
  std::vector<Byte> key(spec.n);
  for (std::size_t i = 0; i < spec.count; ++i) {
    for (std::size_t b = 0; b < spec.n; ++b) {
      key[b] = b % 8 < spec.m ? kZipfPrefixChar : letter();
    }
    keys.add(key);
  }
  return keys;
}

}  // namespace ckidx
