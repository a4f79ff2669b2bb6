#include "ckidx/metadata.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ckidx/error.hpp"

namespace ckidx {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'M', '1'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put_le(std::vector<Byte>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<Byte>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const Byte> b) : b_(b) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{b_[pos_ + i]} << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const Byte> take(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  [[nodiscard]] bool done() const noexcept { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) {
      throw Error(Errc::truncated, "metadata image ends at byte " + std::to_string(b_.size()));
    }
  }

  std::span<const Byte> b_;
  std::size_t pos_ = 0;
};

}  // namespace

bool on_insert(DSMetadata& meta, std::optional<KeyView> prev, KeyView key,
               std::optional<KeyView> next, RecordId rid) {
  if (!prev && !next && meta.reference_key.size() == 0 && meta.variant_bitmap.none()) {
    meta.reference_key = IndexKey(key);
  }
  meta.variant_bitmap.or_xor(key, meta.reference_key);
  meta.rid_variant_mask |= rid;

  std::optional<BitPos> left = prev ? dbit_pair(*prev, key) : std::nullopt;
  std::optional<BitPos> right = next ? dbit_pair(key, *next) : std::nullopt;
  std::optional<BitPos> target;
  if (left && right) {
    // The smaller one equals D-bit(prev, next), already present.
    target = std::max(*left, *right);
  } else {
    target = left ? left : right;
  }
  if (!target) return false;
  if (*target >= meta.dbitmap.size()) {
    throw Error(Errc::out_of_range, "key longer than metadata bitmap");
  }
  if (meta.dbitmap.test(*target)) return false;
  meta.dbitmap.set(*target);
  return true;
}

DSMetadata compute_metadata(std::span<const KeyView> sorted_keys,
                            std::span<const RecordId> rids, std::size_t key_bits) {
  DSMetadata meta = DSMetadata::empty(key_bits);
  if (sorted_keys.empty()) return meta;
  meta.reference_key = IndexKey(sorted_keys.front());
  for (std::size_t i = 0; i < sorted_keys.size(); ++i) {
    meta.variant_bitmap.or_xor(sorted_keys[i], meta.reference_key);
    if (i > 0) {
      if (auto d = dbit_pair(sorted_keys[i - 1], sorted_keys[i])) meta.dbitmap.set(*d);
    }
  }
  for (RecordId r : rids) meta.rid_variant_mask |= r;
  return meta;
}

DSMetadata recompute(std::span<const std::vector<std::uint64_t>> sorted_compressed,
                     const DOffsetTable& doffset, std::size_t compressed_key_bits,
                     const DSMetadata& old_meta, std::span<const KeyView> keys,
                     std::span<const RecordId> rids) {
  DSMetadata meta = DSMetadata::empty(old_meta.key_bits());
  for (std::size_t i = 1; i < sorted_compressed.size(); ++i) {
    const auto& a = sorted_compressed[i - 1];
    const auto& b = sorted_compressed[i];
    const std::size_t c = first_diff_bit(a.data(), b.data(), std::min(a.size(), b.size()));
    // A first difference inside the record-ID tail means equal keys.
    if (c < compressed_key_bits) meta.dbitmap.set(doffset.at(c));
  }
  if (!keys.empty()) meta.reference_key = IndexKey(keys.front());
  for (const auto& k : keys) meta.variant_bitmap.or_xor(k, meta.reference_key);
  for (RecordId r : rids) meta.rid_variant_mask |= r;
  return meta;
}

std::vector<Byte> save(const DSMetadata& meta) {
  if (meta.variant_bitmap.size() != meta.dbitmap.size()) {
    throw Error(Errc::size_mismatch, "bitmaps of different lengths");
  }
  std::vector<Byte> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta.key_bits()));
  const auto d = meta.dbitmap.to_bytes();
  const auto v = meta.variant_bitmap.to_bytes();
  out.insert(out.end(), d.begin(), d.end());
  out.insert(out.end(), v.begin(), v.end());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta.reference_key.size()));
  out.insert(out.end(), meta.reference_key.bytes.begin(), meta.reference_key.bytes.end());
  put_le<std::uint64_t>(out, meta.rid_variant_mask);
  return out;
}

DSMetadata load(std::span<const Byte> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw Error(Errc::bad_magic, "not a DSM1 metadata image");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) {
    throw Error(Errc::unsupported, "metadata version " + std::to_string(version));
  }
  const auto key_bits = r.get<std::uint32_t>();
  const std::size_t bitmap_bytes = (std::size_t{key_bits} + 7) / 8;
  DSMetadata meta;
  meta.dbitmap = Bitmap::from_bytes(r.take(bitmap_bytes), key_bits);
  meta.variant_bitmap = Bitmap::from_bytes(r.take(bitmap_bytes), key_bits);
  const auto ref_len = r.get<std::uint32_t>();
  if (ref_len > bitmap_bytes) {
    throw Error(Errc::size_mismatch, "reference key of " + std::to_string(ref_len) +
                                         " bytes exceeds key length");
  }
  meta.reference_key = IndexKey(r.take(ref_len));
  meta.rid_variant_mask = r.get<std::uint64_t>();
  if (!r.done()) throw Error(Errc::size_mismatch, "trailing bytes after metadata");
  return meta;
}

DSMetadata load(std::span<const Byte> bytes, std::size_t expected_key_bits) {
  DSMetadata meta = load(bytes);
  if (meta.key_bits() != expected_key_bits) {
    throw Error(Errc::size_mismatch, "metadata covers " + std::to_string(meta.key_bits()) +
                                         " key bits, schema has " +
                                         std::to_string(expected_key_bits));
  }
  return meta;
}

void save_file(const DSMetadata& meta, const std::string& path) {
  const auto bytes = save(meta);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::io, "cannot write " + path);
}

DSMetadata load_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot open " + path);
  std::vector<Byte> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return load(bytes);
}

std::string format_bitmap_rows(const Bitmap& bitmap) {
  const auto bytes = bitmap.to_bytes();
  std::ostringstream os;
  for (std::size_t row = 0; row < bytes.size(); row += 8) {
    const std::size_t end = std::min(bytes.size(), row + 8);
    std::string label = std::to_string(row + 1) + "-" + std::to_string(end);
    label.resize(std::max<std::size_t>(label.size(), 8), ' ');
    os << label << " |";
    for (std::size_t i = row; i < end; ++i) {
      os << ' ';
      for (int b = 7; b >= 0; --b) os << ((bytes[i] >> b) & 1 ? '1' : '0');
    }
    os << '\n';
  }
  return os.str();
}

std::string describe(const DSMetadata& meta) {
  std::ostringstream os;
  os << "key bits:           " << meta.key_bits() << '\n'
     << "distinction bits:   " << meta.dbitmap.popcount() << '\n'
     << "variant bits:       " << meta.variant_bitmap.popcount() << '\n'
     << "record-id bits:     " << std::popcount(meta.rid_variant_mask) << '\n'
     << "reference key len:  " << meta.reference_key.size() << "\n\n"
     << "D-bitmap (bytes | positions)\n"
     << format_bitmap_rows(meta.dbitmap) << '\n'
     << "variant bitmap (bytes | positions)\n"
     << format_bitmap_rows(meta.variant_bitmap);
  return os.str();
}

}  // namespace ckidx
