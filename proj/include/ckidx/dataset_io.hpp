#pragma once

// Dataset files.
//
// Binary form: "DKS1", u32 column count, per column (u8 kind, u8 precision,
// u8 scale, u32 length), then records of (u32 length, key bytes) until the
// end of the file. Integers are little endian. The text form holds one raw
// string per line and maps to a single varstring column.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ckidx/keycodec.hpp"
#include "ckidx/table.hpp"

namespace ckidx {

/// Encoded keys of one schema, stored back to back.
class KeySet {
 public:
  KeySet() = default;
  explicit KeySet(Schema schema) : schema_(std::move(schema)) {}

  [[nodiscard]] const Schema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::size_t size() const noexcept { return offsets_.size() - 1; }
  [[nodiscard]] bool empty() const noexcept { return size() == 0; }
  [[nodiscard]] KeyView key(std::size_t i) const noexcept {
    return {bytes_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  [[nodiscard]] std::size_t byte_size() const noexcept { return bytes_.size(); }

  void reserve(std::size_t keys, std::size_t bytes);
  void add(KeyView key);

  friend bool operator==(const KeySet&, const KeySet&) = default;

 private:
  Schema schema_;
  std::vector<Byte> bytes_;
  std::vector<std::size_t> offsets_{0};
};

std::vector<Byte> encode_dataset(const KeySet& keys);
KeySet decode_dataset(std::span<const Byte> image);

/// Newline-delimited raw strings; each becomes a varstring key.
KeySet parse_text_keys(std::string_view text);

void write_dataset_file(const KeySet& keys, const std::string& path);
/// Reads the binary form, or the text form when the magic is absent.
KeySet read_dataset_file(const std::string& path);

std::vector<Byte> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const Byte> bytes);

/// Appends every key to a new table; row i gets record ID i.
Table make_table(const KeySet& keys);

}  // namespace ckidx
