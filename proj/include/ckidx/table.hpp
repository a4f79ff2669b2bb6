#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ckidx/keycodec.hpp"

namespace ckidx {

/// In-memory table of encoded index keys stored in 64 KiB pages.
///
/// Rows live at a fixed stride of whole words, zero padded past their logical
/// length. A row's record ID is its insertion ordinal; erased rows keep their
/// slot and ID. Every page has eight bytes of slack so that word loads
/// starting inside the last row stay in bounds.
class Table {
 public:
  static constexpr std::size_t kPageBytes = 64 * 1024;
  static constexpr std::size_t kSlackBytes = 8;

  explicit Table(Schema schema);

  [[nodiscard]] const Schema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
  [[nodiscard]] std::size_t rows_per_page() const noexcept { return rows_per_page_; }
  [[nodiscard]] std::size_t page_count() const noexcept { return pages_.size(); }
  /// Slots ever appended, live or erased.
  [[nodiscard]] std::size_t slots() const noexcept { return lengths_.size(); }
  [[nodiscard]] std::size_t live_rows() const noexcept { return live_rows_; }
  [[nodiscard]] std::size_t page_live_rows(std::size_t page) const noexcept {
    return page_live_[page];
  }

  RecordId append(KeyView key);
  void erase(RecordId rid);
  [[nodiscard]] bool live(RecordId rid) const noexcept {
    return rid < live_.size() && live_[rid];
  }

  [[nodiscard]] KeyView key(RecordId rid) const noexcept {
    return {row(rid), lengths_[rid]};
  }
  [[nodiscard]] std::uint16_t key_length(RecordId rid) const noexcept {
    return lengths_[rid];
  }
  /// Start of the row's padded slot; readable for stride() + kSlackBytes.
  [[nodiscard]] const Byte* row(RecordId rid) const noexcept {
    return pages_[rid / rows_per_page_].get() + (rid % rows_per_page_) * stride_;
  }
  /// First slot of a page.
  [[nodiscard]] RecordId page_first(std::size_t page) const noexcept {
    return page * rows_per_page_;
  }
  [[nodiscard]] RecordId page_end(std::size_t page) const noexcept {
    const RecordId e = (page + 1) * rows_per_page_;
    return e < slots() ? e : slots();
  }

 private:
  Schema schema_;
  std::size_t stride_;
  std::size_t rows_per_page_;
  std::vector<std::unique_ptr<Byte[]>> pages_;
  std::vector<std::uint16_t> lengths_;
  std::vector<std::uint8_t> live_;
  std::vector<std::uint32_t> page_live_;
  std::size_t live_rows_ = 0;
};

}  // namespace ckidx
