#include "ckidx/keycodec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ckidx/error.hpp"

namespace ckidx {

namespace {

using u128 = unsigned __int128;

u128 pow10(unsigned digits) {
  u128 v = 1;
  for (unsigned i = 0; i < digits; ++i) v *= 10;
  return v;
}

constexpr Byte kDecimalSignBit = 0x01;
constexpr Byte kDecimalPresentBit = 0x02;

}  // namespace

ColumnType ColumnType::decimal(unsigned precision, unsigned scale) {
  if (precision < 1 || precision > 38 || scale > precision) {
    throw Error(Errc::invalid_value,
                "decimal(" + std::to_string(precision) + "," +
                    std::to_string(scale) + ") outside 0 <= n <= m <= 38");
  }
  return {ColumnKind::decimal, static_cast<std::uint8_t>(precision),
          static_cast<std::uint8_t>(scale), 0};
}

std::size_t decimal_magnitude_bytes(unsigned precision) {
  // Smallest b with 2^(8b) >= 10^m, i.e. ceil(log2(10^m) / 8).
  const u128 limit = pow10(precision);
  std::size_t bytes = 1;
  while (bytes < 16 && (u128{1} << (8 * bytes)) < limit) ++bytes;
  return bytes;
}

std::size_t ColumnType::max_bytes() const {
  switch (kind) {
    case ColumnKind::int32: return 4;
    case ColumnKind::int64: return 8;
    case ColumnKind::float64: return 8;
    case ColumnKind::decimal: return 1 + decimal_magnitude_bytes(precision);
    case ColumnKind::fixed_string: return length;
    case ColumnKind::varstring: return std::size_t{length} + 1;
  }
  return 0;
}

Schema::Schema(std::vector<ColumnType> columns) : columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    max_key_bytes_ += c.max_bytes();
    fixed_width_ = fixed_width_ && c.fixed_width();
  }
}

void encode_int(std::int64_t value, unsigned width, std::vector<Byte>& out) {
  if (width == 4) {
    if (value < std::numeric_limits<std::int32_t>::min() ||
        value > std::numeric_limits<std::int32_t>::max()) {
      throw Error(Errc::out_of_range, "value does not fit int32");
    }
    const auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(value)) ^
                   0x80000000u;
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<Byte>(u >> s));
  } else if (width == 8) {
    const auto u = static_cast<std::uint64_t>(value) ^ (std::uint64_t{1} << 63);
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<Byte>(u >> s));
  } else {
    throw Error(Errc::unsupported, "integer width must be 4 or 8");
  }
}

void encode_float(double value, std::vector<Byte>& out) {
  if (std::isnan(value)) throw Error(Errc::invalid_value, "NaN is not orderable");
  auto u = std::bit_cast<std::uint64_t>(value);
  // -0.0 lands just below +0.0.
  u = (u >> 63) ? ~u : u ^ (std::uint64_t{1} << 63);
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<Byte>(u >> s));
}

void encode_decimal(const Value& value, const ColumnType& type,
                    std::vector<Byte>& out) {
  const std::size_t mag_bytes = decimal_magnitude_bytes(type.precision);
  Byte header = 0;
  u128 magnitude = 0;
  if (std::holds_alternative<Null>(value)) {
    header = 0;
  } else if (const auto* d = std::get_if<Decimal>(&value)) {
    const bool negative = d->unscaled < 0;
    magnitude = negative ? static_cast<u128>(-(d->unscaled + 1)) + 1
                         : static_cast<u128>(d->unscaled);
    if (magnitude >= pow10(type.precision)) {
      throw Error(Errc::overflow, "decimal value exceeds " +
                                      std::to_string(type.precision) + " digits");
    }
    header = kDecimalPresentBit | (negative ? kDecimalSignBit : 0);
  } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
    // Integer literal for a decimal column: scale it up.
    const bool negative = *i < 0;
    magnitude = negative ? static_cast<u128>(-(*i + 1)) + 1 : static_cast<u128>(*i);
    magnitude *= pow10(type.scale);
    if (magnitude >= pow10(type.precision)) {
      throw Error(Errc::overflow, "decimal value exceeds " +
                                      std::to_string(type.precision) + " digits");
    }
    header = kDecimalPresentBit | (negative ? kDecimalSignBit : 0);
  } else {
    throw Error(Errc::invalid_value, "decimal column expects a decimal value");
  }

  const bool negative = header & kDecimalSignBit;
  header ^= kDecimalSignBit;
  if (negative) magnitude = ~magnitude;
  out.push_back(header);
  for (std::size_t b = mag_bytes; b-- > 0;) {
    out.push_back(static_cast<Byte>(magnitude >> (8 * b)));
  }
}

void encode_fixed_string(std::string_view value, std::uint32_t len,
                         std::vector<Byte>& out) {
  if (value.size() != len) {
    throw Error(Errc::length_mismatch, "fixed string of length " +
                                           std::to_string(value.size()) +
                                           ", expected " + std::to_string(len));
  }
  out.insert(out.end(), value.begin(), value.end());
}

void encode_varstring(std::string_view value, std::uint32_t max_len,
                      std::vector<Byte>& out) {
  if (value.size() > max_len) {
    throw Error(Errc::over_length, "string of length " +
                                       std::to_string(value.size()) +
                                       " exceeds " + std::to_string(max_len));
  }
  if (value.find('\0') != std::string_view::npos) {
    throw Error(Errc::embedded_null, "variable-size string contains 0x00");
  }
  out.insert(out.end(), value.begin(), value.end());
  out.push_back(0);
}

void encode_value(const Value& value, const ColumnType& type,
                  std::vector<Byte>& out) {
  if (type.kind == ColumnKind::decimal) {
    encode_decimal(value, type, out);
    return;
  }
  if (std::holds_alternative<Null>(value)) {
    throw Error(Errc::invalid_value, "null is only defined for decimal columns");
  }
  switch (type.kind) {
    case ColumnKind::int32:
    case ColumnKind::int64: {
      const auto* i = std::get_if<std::int64_t>(&value);
      if (!i) throw Error(Errc::invalid_value, "integer column expects an integer");
      encode_int(*i, type.kind == ColumnKind::int32 ? 4 : 8, out);
      return;
    }
    case ColumnKind::float64: {
      const auto* d = std::get_if<double>(&value);
      if (!d) throw Error(Errc::invalid_value, "float column expects a double");
      encode_float(*d, out);
      return;
    }
    case ColumnKind::fixed_string:
    case ColumnKind::varstring: {
      const auto* s = std::get_if<std::string>(&value);
      if (!s) throw Error(Errc::invalid_value, "string column expects a string");
      if (type.kind == ColumnKind::fixed_string) {
        encode_fixed_string(*s, type.length, out);
      } else {
        encode_varstring(*s, type.length, out);
      }
      return;
    }
    case ColumnKind::decimal: break;
  }
}

IndexKey encode_row(std::span<const Value> values, const Schema& schema) {
  const auto& cols = schema.columns();
  if (values.size() != cols.size()) {
    throw Error(Errc::invalid_value, "row has " + std::to_string(values.size()) +
                                         " values, schema has " +
                                         std::to_string(cols.size()));
  }
  IndexKey key;
  key.bytes.reserve(schema.max_key_bytes());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    encode_value(values[i], cols[i], key.bytes);
  }
  return key;
}

KeyComparison compare_keys(KeyView a, KeyView b) noexcept {
  const std::size_t len = std::max(a.size(), b.size());
  KeyComparison r;
  for (std::size_t off = 0; off < len; off += 8) {
    const std::uint64_t wa = load_word_be(a, off);
    const std::uint64_t wb = load_word_be(b, off);
    ++r.words;
    if (wa != wb) {
      r.order = wa < wb ? std::strong_ordering::less : std::strong_ordering::greater;
      return r;
    }
  }
  return r;
}

}  // namespace ckidx
