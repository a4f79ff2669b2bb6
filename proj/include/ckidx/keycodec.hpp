#pragma once

// Order-preserving binary encodings for index key columns.
//
// Every encoder produces a byte string whose lexicographic order (with the
// shorter string padded by zero bytes) equals the order of the source values.
// Multi-column keys are plain concatenations of the column fragments.

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ckidx {

using Byte = std::uint8_t;
using KeyView = std::span<const Byte>;
using RecordId = std::uint64_t;

/// Owning index key. Bit 0 is the most significant bit of byte 0.
struct IndexKey {
  std::vector<Byte> bytes;

  IndexKey() = default;
  explicit IndexKey(std::vector<Byte> b) : bytes(std::move(b)) {}
  explicit IndexKey(KeyView v) : bytes(v.begin(), v.end()) {}

  [[nodiscard]] KeyView view() const noexcept { return bytes; }
  [[nodiscard]] std::size_t size() const noexcept { return bytes.size(); }
  operator KeyView() const noexcept { return bytes; }  // NOLINT

  friend bool operator==(const IndexKey&, const IndexKey&) = default;
};

enum class ColumnKind : std::uint8_t {
  int32 = 1,
  int64 = 2,
  float64 = 3,
  decimal = 4,
  fixed_string = 5,
  varstring = 6,
};

struct ColumnType {
  ColumnKind kind = ColumnKind::int64;
  std::uint8_t precision = 0;  // decimal: total digits
  std::uint8_t scale = 0;      // decimal: digits right of the point
  std::uint32_t length = 0;    // fixed_string: exact length, varstring: max

  static ColumnType int32() { return {ColumnKind::int32, 0, 0, 0}; }
  static ColumnType int64() { return {ColumnKind::int64, 0, 0, 0}; }
  static ColumnType float64() { return {ColumnKind::float64, 0, 0, 0}; }
  static ColumnType decimal(unsigned precision, unsigned scale);
  static ColumnType fixed_string(std::uint32_t len) {
    return {ColumnKind::fixed_string, 0, 0, len};
  }
  static ColumnType varstring(std::uint32_t max_len) {
    return {ColumnKind::varstring, 0, 0, max_len};
  }

  /// Largest fragment this column can produce.
  [[nodiscard]] std::size_t max_bytes() const;
  [[nodiscard]] bool fixed_width() const noexcept {
    return kind != ColumnKind::varstring;
  }

  friend bool operator==(const ColumnType&, const ColumnType&) = default;
};

/// Byte width of the magnitude part of a decimal(m, n) fragment.
std::size_t decimal_magnitude_bytes(unsigned precision);

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnType> columns);

  [[nodiscard]] const std::vector<ColumnType>& columns() const noexcept {
    return columns_;
  }
  [[nodiscard]] std::size_t max_key_bytes() const noexcept {
    return max_key_bytes_;
  }
  [[nodiscard]] std::size_t max_key_bits() const noexcept {
    return 8 * max_key_bytes_;
  }
  /// Key storage is padded to whole 8-byte words.
  [[nodiscard]] std::size_t key_words() const noexcept {
    return (max_key_bytes_ + 7) / 8;
  }
  [[nodiscard]] bool fixed_width() const noexcept { return fixed_width_; }

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.columns_ == b.columns_;
  }

 private:
  std::vector<ColumnType> columns_;
  std::size_t max_key_bytes_ = 0;
  bool fixed_width_ = true;
};

/// Exact decimal: value = unscaled / 10^scale, scale taken from the column.
struct Decimal {
  __int128 unscaled = 0;
  friend auto operator<=>(const Decimal&, const Decimal&) = default;
};

struct Null {
  friend auto operator<=>(const Null&, const Null&) = default;
};

using Value = std::variant<Null, std::int64_t, double, Decimal, std::string>;

// Column encoders append their fragment to `out`.
void encode_int(std::int64_t value, unsigned width, std::vector<Byte>& out);
void encode_float(double value, std::vector<Byte>& out);
void encode_decimal(const Value& value, const ColumnType& type,
                    std::vector<Byte>& out);
void encode_fixed_string(std::string_view value, std::uint32_t len,
                         std::vector<Byte>& out);
void encode_varstring(std::string_view value, std::uint32_t max_len,
                      std::vector<Byte>& out);

void encode_value(const Value& value, const ColumnType& type,
                  std::vector<Byte>& out);
IndexKey encode_row(std::span<const Value> values, const Schema& schema);

/// Big-endian load of the 8-byte word starting at byte `offset`, zero padded
/// past the end of the key.
inline std::uint64_t load_word_be(KeyView key, std::size_t offset) noexcept {
  std::uint64_t w = 0;
  if (offset + 8 <= key.size()) {
    std::memcpy(&w, key.data() + offset, 8);
  } else if (offset < key.size()) {
    std::memcpy(&w, key.data() + offset, key.size() - offset);
  } else {
    return 0;
  }
  if constexpr (std::endian::native == std::endian::little) {
    w = __builtin_bswap64(w);
  }
  return w;
}

struct KeyComparison {
  std::strong_ordering order = std::strong_ordering::equal;
  std::size_t words = 0;  // word comparisons performed
};

/// Word-wise comparison, shorter key zero padded.
KeyComparison compare_keys(KeyView a, KeyView b) noexcept;

}  // namespace ckidx
