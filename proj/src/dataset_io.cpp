#include "ckidx/dataset_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ckidx/error.hpp"

namespace ckidx {

namespace {

constexpr Byte kMagic[4] = {'D', 'K', 'S', '1'};

template <class T>
void put_le(std::vector<Byte>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<Byte>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const Byte> b) : b_(b) {}
  [[nodiscard]] bool done() const noexcept { return at_ == b_.size(); }
  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{b_[at_ + i]} << (8 * i));
    at_ += sizeof(T);
    return v;
  }
  KeyView take(std::size_t n, const char* what) {
    need(n, what);
    KeyView v = b_.subspan(at_, n);
    at_ += n;
    return v;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (b_.size() - at_ < n) throw Error(Errc::truncated, std::string("dataset ends inside ") + what);
  }
  std::span<const Byte> b_;
  std::size_t at_ = 0;
};

ColumnType column_from(std::uint8_t kind, std::uint8_t precision, std::uint8_t scale,
                       std::uint32_t length) {
  switch (static_cast<ColumnKind>(kind)) {
    case ColumnKind::int32: return ColumnType::int32();
    case ColumnKind::int64: return ColumnType::int64();
    case ColumnKind::float64: return ColumnType::float64();
    case ColumnKind::decimal: return ColumnType::decimal(precision, scale);
    case ColumnKind::fixed_string: return ColumnType::fixed_string(length);
    case ColumnKind::varstring: return ColumnType::varstring(length);
  }
  throw Error(Errc::invalid_value, "unknown column kind " + std::to_string(kind));
}

}  // namespace

void KeySet::reserve(std::size_t keys, std::size_t bytes) {
  offsets_.reserve(keys + 1);
  bytes_.reserve(bytes);
}

void KeySet::add(KeyView key) {
  if (key.size() > schema_.max_key_bytes()) {
    throw Error(Errc::over_length, "key of " + std::to_string(key.size()) +
                                       " bytes exceeds schema maximum " +
                                       std::to_string(schema_.max_key_bytes()));
  }
  if (schema_.fixed_width() && key.size() != schema_.max_key_bytes()) {
    throw Error(Errc::length_mismatch, "fixed-width key of " + std::to_string(key.size()) +
                                           " bytes, expected " +
                                           std::to_string(schema_.max_key_bytes()));
  }
  bytes_.insert(bytes_.end(), key.begin(), key.end());
  offsets_.push_back(bytes_.size());
}

std::vector<Byte> encode_dataset(const KeySet& keys) {
  std::vector<Byte> out(std::begin(kMagic), std::end(kMagic));
  const auto& cols = keys.schema().columns();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cols.size()));
  for (const ColumnType& c : cols) {
    out.push_back(static_cast<Byte>(c.kind));
    out.push_back(c.precision);
    out.push_back(c.scale);
    put_le<std::uint32_t>(out, c.length);
  }
  out.reserve(out.size() + keys.byte_size() + 4 * keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const KeyView k = keys.key(i);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
    out.insert(out.end(), k.begin(), k.end());
  }
  return out;
}

KeySet decode_dataset(std::span<const Byte> image) {
  if (image.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), image.begin())) {
    throw Error(Errc::bad_magic, "not a DKS1 dataset");
  }
  Reader r(image.subspan(4));
  const auto ncols = r.get<std::uint32_t>("schema");
  if (ncols == 0) throw Error(Errc::invalid_value, "schema without columns");
  std::vector<ColumnType> cols;
  for (std::uint32_t i = 0; i < ncols; ++i) {
    const auto kind = r.get<std::uint8_t>("schema");
    const auto precision = r.get<std::uint8_t>("schema");
    const auto scale = r.get<std::uint8_t>("schema");
    const auto length = r.get<std::uint32_t>("schema");
    cols.push_back(column_from(kind, precision, scale, length));
  }
  KeySet keys{Schema(std::move(cols))};
  keys.reserve(0, image.size());
  while (!r.done()) {
    const auto len = r.get<std::uint32_t>("record length");
    keys.add(r.take(len, "record"));
  }
  return keys;
}

KeySet parse_text_keys(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t longest = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    longest = std::max(longest, line.size());
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  const auto type = ColumnType::varstring(static_cast<std::uint32_t>(longest));
  KeySet keys{Schema({type})};
  std::vector<Byte> buf;
  for (std::string_view line : lines) {
    buf.clear();
    encode_varstring(line, type.length, buf);
    keys.add(buf);
  }
  return keys;
}

std::vector<Byte> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<Byte> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "cannot read " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const Byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "cannot write " + path);
}

void write_dataset_file(const KeySet& keys, const std::string& path) {
  write_file_bytes(path, encode_dataset(keys));
}

KeySet read_dataset_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 4 && std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    return decode_dataset(bytes);
  }
  return parse_text_keys(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Table make_table(const KeySet& keys) {
  Table table(keys.schema());
  for (std::size_t i = 0; i < keys.size(); ++i) table.append(keys.key(i));
  return table;
}

}  // namespace ckidx
