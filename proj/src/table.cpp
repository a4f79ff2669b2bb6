#include "ckidx/table.hpp"

#include <algorithm>
#include <cstring>

#include "ckidx/error.hpp"

namespace ckidx {

Table::Table(Schema schema)
    : schema_(std::move(schema)),
      stride_(std::max<std::size_t>(8, schema_.key_words() * 8)),
      rows_per_page_(kPageBytes / stride_) {
  if (schema_.max_key_bytes() > 0xFFFF || rows_per_page_ == 0) {
    throw Error(Errc::unsupported, "keys of " + std::to_string(schema_.max_key_bytes()) +
                                       " bytes do not fit a table page");
  }
}

RecordId Table::append(KeyView key) {
  if (key.size() > schema_.max_key_bytes()) {
    throw Error(Errc::over_length, "key of " + std::to_string(key.size()) +
                                       " bytes exceeds schema maximum " +
                                       std::to_string(schema_.max_key_bytes()));
  }
  if (schema_.fixed_width() && key.size() != schema_.max_key_bytes()) {
    throw Error(Errc::length_mismatch, "fixed-width schema expects keys of " +
                                           std::to_string(schema_.max_key_bytes()) + " bytes");
  }
  const RecordId rid = lengths_.size();
  if (rid % rows_per_page_ == 0) {
    pages_.emplace_back(new Byte[kPageBytes + kSlackBytes]());
    page_live_.push_back(0);
  }
  Byte* dst = pages_.back().get() + (rid % rows_per_page_) * stride_;
  std::memcpy(dst, key.data(), key.size());
  lengths_.push_back(static_cast<std::uint16_t>(key.size()));
  live_.push_back(1);
  ++page_live_.back();
  ++live_rows_;
  return rid;
}

void Table::erase(RecordId rid) {
  if (!live(rid)) throw Error(Errc::not_found, "row " + std::to_string(rid) + " is not live");
  live_[rid] = 0;
  --page_live_[rid / rows_per_page_];
  --live_rows_;
}

}  // namespace ckidx
