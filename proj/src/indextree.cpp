#include "ckidx/indextree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <sstream>

#include "ckidx/dbits.hpp"
#include "ckidx/error.hpp"

namespace ckidx {

namespace {

std::uint16_t stored_dbit(std::optional<BitPos> d) {
  return d ? static_cast<std::uint16_t>(*d) : kEqualDbit;
}

int order_of(std::strong_ordering o) {
  return o < 0 ? -1 : (o > 0 ? 1 : 0);
}

}  // namespace

std::size_t BuildConfig::leaf_fill() const {
  const auto f = static_cast<std::size_t>(std::floor(kLeafFanout * fill_factor + 1e-9));
  return std::clamp<std::size_t>(f, 1, kLeafFanout);
}

std::size_t BuildConfig::inner_fill() const {
  const auto f = static_cast<std::size_t>(std::floor(kInnerFanout * fill_factor + 1e-9));
  return std::clamp<std::size_t>(f, 2, kInnerFanout);
}

void BuildConfig::validate() const {
  if (!(fill_factor > 0.0 && fill_factor <= 1.0)) {
    throw Error(Errc::invalid_value, "fill factor must be in (0, 1]");
  }
  if (pk_bits > kMaxPartialKeyBits) {
    throw Error(Errc::invalid_value, "partial key width must be at most 32 bits");
  }
}

std::uint32_t partial_key_of(KeyView key, BitPos dbit_pos, unsigned pk_bits) {
  if (pk_bits == 0) return 0;
  const std::size_t start = std::size_t{dbit_pos} + 1;
  const std::uint64_t w = load_word_be(key, start / 8) << (start % 8);
  return static_cast<std::uint32_t>(w >> (64 - pk_bits));
}

std::size_t expected_height(std::size_t n, const BuildConfig& cfg) {
  if (n == 0) return 0;
  std::size_t level = (n + cfg.leaf_fill() - 1) / cfg.leaf_fill();
  std::size_t h = 1;
  while (level > 1) {
    level = (level + cfg.inner_fill() - 1) / cfg.inner_fill();
    ++h;
  }
  return h;
}

IndexTree::IndexTree(const Table& table, unsigned pk_bits)
    : table_(&table), pk_bits_(pk_bits) {
  if (pk_bits > kMaxPartialKeyBits) {
    throw Error(Errc::invalid_value, "partial key width must be at most 32 bits");
  }
  if (table.schema().max_key_bits() >= kEqualDbit) {
    throw Error(Errc::unsupported, "keys too long for 16-bit distinction positions");
  }
}

LeafEntry IndexTree::make_leaf_entry(RecordId rid) const {
  LeafEntry e{};
  e.record_id = rid;
  e.key_len = table_->key_length(rid);
  return e;
}

InnerEntry IndexTree::make_inner_entry(NodeRef child, RecordId highest) const {
  InnerEntry e{};
  e.child = child;
  e.highest_key = highest;
  e.key_len = table_->key_length(highest);
  return e;
}

LeafEntry IndexTree::make_leaf_entry(RecordId rid, std::optional<BitPos> dbit) const {
  LeafEntry e{};
  e.record_id = rid;
  e.key_len = table_->key_length(rid);
  e.dbit_pos = stored_dbit(dbit);
  e.partial_key = dbit ? partial_key_of(key_of(rid), *dbit, pk_bits_) : 0;
  return e;
}

InnerEntry IndexTree::make_inner_entry(NodeRef child, RecordId highest,
                                       std::optional<BitPos> dbit) const {
  InnerEntry e{};
  e.child = child;
  e.highest_key = highest;
  e.key_len = table_->key_length(highest);
  e.dbit_pos = stored_dbit(dbit);
  e.partial_key = dbit ? partial_key_of(key_of(highest), *dbit, pk_bits_) : 0;
  return e;
}

int IndexTree::compare_entry(RecordId a, KeyView key, RecordId rid) const noexcept {
  const int c = order_of(compare_keys(key_of(a), key).order);
  if (c != 0) return c;
  return a < rid ? -1 : (a > rid ? 1 : 0);
}

// Partial-key scan of one leaf. Returns the first entry whose key is >= key.
//
// Invariant while scanning entry i: key > k[i-1] and d = dbit(k[i-1], key),
// so key has a one at d. Entry i stores o = dbit(k[i-1], k[i]):
//   o < d   key has a zero at o where k[i] has a one, so key < k[i];
//   o > d   k[i] still matches k[i-1] at d, so key > k[i] with the same d;
//   o == d  both have a one at d; the stored bits after d decide, and a tie
//           over all pk bits falls back to the full key.
IndexTree::Locate IndexTree::locate_in_leaf(const LeafNode& leaf, KeyView key) const {
  const std::size_t count = leaf.hdr.count;
  if (count == 0) return {0, false};
  const KeyView first = key_of(leaf.entries[0].record_id);
  const auto c0 = compare_keys(key, first).order;
  if (c0 <= 0) return {0, c0 == 0};
  std::size_t d = *dbit_pair(first, key);
  for (std::size_t i = 1; i < count; ++i) {
    const LeafEntry& e = leaf.entries[i];
    if (e.dbit_pos == kEqualDbit) continue;
    const std::size_t o = e.dbit_pos;
    if (o < d) return {i, false};
    if (o > d) continue;
    if (pk_bits_ > 0) {
      const std::uint32_t mine = partial_key_of(key, static_cast<BitPos>(d), pk_bits_);
      const std::uint32_t diff = mine ^ e.partial_key;
      if (diff != 0) {
        const unsigned lead = std::countl_zero(diff) - (32 - pk_bits_);
        const std::uint32_t bit = mine >> (pk_bits_ - 1 - lead) & 1u;
        if (!bit) return {i, false};
        d = d + 1 + lead;
        continue;
      }
    }
    const KeyView full = key_of(e.record_id);
    const auto c = compare_keys(key, full).order;
    if (c <= 0) return {i, c == 0};
    d = *dbit_pair(full, key);
  }
  return {count, false};
}

std::size_t IndexTree::child_for(const InnerNode& inner, KeyView key,
                                 std::optional<RecordId> rid) const {
  std::size_t lo = 0;
  std::size_t hi = inner.hdr.count;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const RecordId h = inner.entries[mid].highest_key;
    const int c = rid ? compare_entry(h, key, *rid)
                      : order_of(compare_keys(key_of(h), key).order);
    if (c < 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::optional<RecordId> IndexTree::search(KeyView key) const {
  if (root_ == kNoNode) return std::nullopt;
  NodeRef n = root_;
  while (nodes_[n].hdr.kind == NodeKind::inner) {
    const InnerNode& inner = nodes_[n].inner;
    const std::size_t idx = child_for(inner, key, std::nullopt);
    if (idx == inner.hdr.count) return std::nullopt;
    n = inner.entries[idx].child;
  }
  const LeafNode& leaf = nodes_[n].leaf;
  const Locate loc = locate_in_leaf(leaf, key);
  if (!loc.found) return std::nullopt;
  return leaf.entries[loc.pos].record_id;
}

NodeRef IndexTree::new_node(NodeKind kind, std::uint32_t level) {
  NodeRef ref;
  if (!free_.empty()) {
    ref = free_.back();
    free_.pop_back();
  } else {
    ref = nodes_.size();
    nodes_.emplace_back();
  }
  Node& n = nodes_[ref];
  n = Node{};
  n.hdr.kind = kind;
  n.hdr.level = level;
  n.hdr.prev = kNoNode;
  if (kind == NodeKind::leaf) n.leaf.next = kNoNode;
  return ref;
}

NodeRef IndexTree::allocate_block(std::size_t count) {
  const NodeRef first = nodes_.size();
  nodes_.resize(nodes_.size() + count);
  return first;
}

void IndexTree::release(NodeRef ref) { free_.push_back(ref); }

void IndexTree::adopt(NodeRef root, std::size_t height, NodeRef first_leaf,
                      std::size_t size) {
  root_ = root;
  height_ = height;
  first_leaf_ = first_leaf;
  size_ = size;
}

void IndexTree::clear() {
  nodes_.clear();
  free_.clear();
  root_ = kNoNode;
  first_leaf_ = kNoNode;
  height_ = 0;
  size_ = 0;
}

void IndexTree::refresh_leaf(LeafNode& leaf) const {
  const std::size_t count = leaf.hdr.count;
  for (std::size_t i = 0; i < count; ++i) {
    const RecordId rid = leaf.entries[i].record_id;
    leaf.entries[i] =
        i == 0 ? make_leaf_entry(rid)
               : make_leaf_entry(rid, dbit_pair(key_of(leaf.entries[i - 1].record_id),
                                                key_of(rid)));
  }
  if (count) leaf.hdr.highest_key = leaf.entries[count - 1].record_id;
}

void IndexTree::refresh_inner(InnerNode& inner) const {
  const std::size_t count = inner.hdr.count;
  for (std::size_t i = 0; i < count; ++i) {
    const NodeRef child = inner.entries[i].child;
    const RecordId h = nodes_[child].hdr.highest_key;
    inner.entries[i] =
        i == 0 ? make_inner_entry(child, h)
               : make_inner_entry(child, h,
                                  dbit_pair(key_of(inner.entries[i - 1].highest_key),
                                            key_of(h)));
  }
  if (count) inner.hdr.highest_key = inner.entries[count - 1].highest_key;
}

void IndexTree::insert(RecordId rid, DSMetadata* meta) {
  if (!table_->live(rid)) throw Error(Errc::not_found, "row is not in the table");
  const KeyView key = key_of(rid);
  if (root_ == kNoNode) {
    root_ = new_node(NodeKind::leaf, 0);
    first_leaf_ = root_;
    height_ = 1;
    LeafNode& leaf = nodes_[root_].leaf;
    leaf.entries[0] = make_leaf_entry(rid);
    leaf.hdr.count = 1;
    leaf.hdr.highest_key = rid;
    size_ = 1;
    if (meta) on_insert(*meta, std::nullopt, key, std::nullopt, rid);
    return;
  }
  std::optional<RecordId> pred;
  const InsertResult r = insert_rec(root_, key, rid, pred, meta);
  if (r.split != kNoNode) {
    const NodeRef old = root_;
    root_ = new_node(NodeKind::inner, nodes_[old].hdr.level + 1);
    InnerNode& top = nodes_[root_].inner;
    top.entries[0].child = old;
    top.entries[1].child = r.split;
    top.hdr.count = 2;
    refresh_inner(top);
    ++height_;
  }
  ++size_;
}

IndexTree::InsertResult IndexTree::insert_rec(NodeRef n, KeyView key, RecordId rid,
                                              std::optional<RecordId>& pred,
                                              DSMetadata* meta) {
  if (nodes_[n].hdr.kind == NodeKind::inner) {
    std::size_t idx;
    {
      const InnerNode& inner = nodes_[n].inner;
      idx = std::min<std::size_t>(child_for(inner, key, rid), inner.hdr.count - 1);
      if (idx > 0) pred = inner.entries[idx - 1].highest_key;
    }
    const NodeRef child = nodes_[n].inner.entries[idx].child;
    const InsertResult below = insert_rec(child, key, rid, pred, meta);
    InnerNode& inner = nodes_[n].inner;
    InsertResult out;
    if (below.split == kNoNode && !below.highest_changed) return out;
    out.highest_changed = idx + 1 == inner.hdr.count;
    if (below.split == kNoNode) {
      refresh_inner(inner);
      return out;
    }
    InnerEntry all[kInnerFanout + 1];
    const std::size_t count = inner.hdr.count;
    std::copy_n(inner.entries, idx + 1, all);
    all[idx + 1].child = below.split;
    std::copy_n(inner.entries + idx + 1, count - idx - 1, all + idx + 2);
    if (count < kInnerFanout) {
      std::copy_n(all, count + 1, inner.entries);
      inner.hdr.count = static_cast<std::uint16_t>(count + 1);
      refresh_inner(inner);
      return out;
    }
    const std::size_t left = (kInnerFanout + 1 + 1) / 2;
    const std::uint32_t level = inner.hdr.level;
    const NodeRef right_ref = new_node(NodeKind::inner, level);
    InnerNode& l = nodes_[n].inner;
    InnerNode& r = nodes_[right_ref].inner;
    std::copy_n(all, left, l.entries);
    l.hdr.count = static_cast<std::uint16_t>(left);
    std::copy_n(all + left, kInnerFanout + 1 - left, r.entries);
    r.hdr.count = static_cast<std::uint16_t>(kInnerFanout + 1 - left);
    refresh_inner(l);
    refresh_inner(r);
    out.split = right_ref;
    return out;
  }

  LeafNode& leaf = nodes_[n].leaf;
  const std::size_t count = leaf.hdr.count;
  Locate loc = locate_in_leaf(leaf, key);
  std::size_t pos = loc.pos;
  if (loc.found) {
    while (pos < count && leaf.entries[pos].record_id < rid) {
      ++pos;
      if (pos < count && leaf.entries[pos].dbit_pos != kEqualDbit) break;
    }
  }
  std::optional<RecordId> a = pos > 0 ? std::optional<RecordId>(leaf.entries[pos - 1].record_id)
                                      : pred;
  std::optional<RecordId> b;
  if (pos < count) {
    b = leaf.entries[pos].record_id;
  } else if (leaf.next != kNoNode) {
    b = nodes_[leaf.next].leaf.entries[0].record_id;
  }
  const std::optional<KeyView> ka = a ? std::optional<KeyView>(key_of(*a)) : std::nullopt;
  const std::optional<KeyView> kb = b ? std::optional<KeyView>(key_of(*b)) : std::nullopt;
  if (meta) on_insert(*meta, ka, key, kb, rid);

  LeafEntry all[kLeafFanout + 1];
  std::copy_n(leaf.entries, pos, all);
  all[pos] = pos == 0 ? make_leaf_entry(rid) : make_leaf_entry(rid, dbit_pair(*ka, key));
  std::copy_n(leaf.entries + pos, count - pos, all + pos + 1);
  if (pos < count) all[pos + 1] = make_leaf_entry(*b, dbit_pair(key, *kb));

  InsertResult out;
  out.highest_changed = pos == count;
  if (count < kLeafFanout) {
    std::copy_n(all, count + 1, leaf.entries);
    leaf.hdr.count = static_cast<std::uint16_t>(count + 1);
    leaf.hdr.highest_key = leaf.entries[count].record_id;
    return out;
  }
  const std::size_t left = (kLeafFanout + 1 + 1) / 2;
  const NodeRef right_ref = new_node(NodeKind::leaf, 0);
  LeafNode& l = nodes_[n].leaf;
  LeafNode& r = nodes_[right_ref].leaf;
  std::copy_n(all, left, l.entries);
  l.hdr.count = static_cast<std::uint16_t>(left);
  l.hdr.highest_key = l.entries[left - 1].record_id;
  std::copy_n(all + left, kLeafFanout + 1 - left, r.entries);
  r.hdr.count = static_cast<std::uint16_t>(kLeafFanout + 1 - left);
  r.hdr.highest_key = r.entries[r.hdr.count - 1].record_id;
  r.entries[0] = make_leaf_entry(r.entries[0].record_id);
  r.next = l.next;
  r.hdr.prev = n;
  if (l.next != kNoNode) nodes_[l.next].hdr.prev = right_ref;
  l.next = right_ref;
  out.split = right_ref;
  return out;
}

void IndexTree::erase(RecordId rid, DSMetadata* meta) {
  const KeyView key = key_of(rid);
  if (root_ == kNoNode || !erase_rec(root_, key, rid)) {
    throw Error(Errc::not_found, "record is not indexed");
  }
  if (meta) on_delete(*meta, key);
  --size_;
  while (root_ != kNoNode) {
    Node& r = nodes_[root_];
    if (r.hdr.count == 0) {
      release(root_);
      root_ = kNoNode;
      first_leaf_ = kNoNode;
      height_ = 0;
    } else if (r.hdr.kind == NodeKind::inner && r.hdr.count == 1) {
      const NodeRef child = r.inner.entries[0].child;
      release(root_);
      root_ = child;
      --height_;
    } else {
      break;
    }
  }
}

RecordId IndexTree::erase_key(KeyView key, DSMetadata* meta) {
  const auto rid = search(key);
  if (!rid) throw Error(Errc::not_found, "key is not indexed");
  erase(*rid, meta);
  return *rid;
}

void IndexTree::unlink_leaf(NodeRef ref) {
  LeafNode& leaf = nodes_[ref].leaf;
  if (leaf.hdr.prev != kNoNode) {
    nodes_[leaf.hdr.prev].leaf.next = leaf.next;
  } else {
    first_leaf_ = leaf.next;
  }
  if (leaf.next != kNoNode) nodes_[leaf.next].hdr.prev = leaf.hdr.prev;
}

bool IndexTree::erase_rec(NodeRef n, KeyView key, RecordId rid) {
  if (nodes_[n].hdr.kind == NodeKind::leaf) {
    LeafNode& leaf = nodes_[n].leaf;
    const std::size_t count = leaf.hdr.count;
    const Locate loc = locate_in_leaf(leaf, key);
    if (!loc.found) return false;
    std::size_t pos = loc.pos;
    while (leaf.entries[pos].record_id != rid) {
      ++pos;
      if (pos >= count || leaf.entries[pos].dbit_pos != kEqualDbit) return false;
    }
    std::copy(leaf.entries + pos + 1, leaf.entries + count, leaf.entries + pos);
    leaf.hdr.count = static_cast<std::uint16_t>(count - 1);
    if (pos < count - 1) {
      const RecordId s = leaf.entries[pos].record_id;
      leaf.entries[pos] =
          pos == 0 ? make_leaf_entry(s)
                   : make_leaf_entry(s, dbit_pair(key_of(leaf.entries[pos - 1].record_id),
                                                  key_of(s)));
    }
    if (leaf.hdr.count) leaf.hdr.highest_key = leaf.entries[leaf.hdr.count - 1].record_id;
    return true;
  }

  const std::size_t idx = child_for(nodes_[n].inner, key, rid);
  if (idx == nodes_[n].inner.hdr.count) return false;
  const NodeRef child = nodes_[n].inner.entries[idx].child;
  if (!erase_rec(child, key, rid)) return false;
  InnerNode& inner = nodes_[n].inner;
  const Node& c = nodes_[child];
  if (c.hdr.count == 0) {
    if (c.hdr.kind == NodeKind::leaf) unlink_leaf(child);
    release(child);
    std::copy(inner.entries + idx + 1, inner.entries + inner.hdr.count, inner.entries + idx);
    --inner.hdr.count;
  } else {
    const std::size_t min_fill = c.hdr.kind == NodeKind::leaf ? kLeafMinFill : kInnerMinFill;
    if (c.hdr.count < min_fill && inner.hdr.count > 1) rebalance(inner, idx);
  }
  refresh_inner(inner);
  return true;
}

// Borrows one entry from an adjacent sibling when it can spare one,
// otherwise merges the pair into the left node.
void IndexTree::rebalance(InnerNode& parent, std::size_t idx) {
  const bool use_left = idx > 0;
  const std::size_t li = use_left ? idx - 1 : idx;
  const std::size_t ri = li + 1;
  const NodeRef lref = parent.entries[li].child;
  const NodeRef rref = parent.entries[ri].child;
  Node& l = nodes_[lref];
  Node& r = nodes_[rref];
  const bool is_leaf = l.hdr.kind == NodeKind::leaf;
  const std::size_t min_fill = is_leaf ? kLeafMinFill : kInnerMinFill;
  const Node& sibling = use_left ? l : r;

  if (sibling.hdr.count > min_fill) {
    if (is_leaf) {
      LeafNode& ll = l.leaf;
      LeafNode& rl = r.leaf;
      if (use_left) {
        std::copy_backward(rl.entries, rl.entries + rl.hdr.count,
                           rl.entries + rl.hdr.count + 1);
        rl.entries[0] = ll.entries[ll.hdr.count - 1];
      } else {
        ll.entries[ll.hdr.count] = rl.entries[0];
        std::copy(rl.entries + 1, rl.entries + rl.hdr.count, rl.entries);
      }
      ll.hdr.count = static_cast<std::uint16_t>(ll.hdr.count + (use_left ? -1 : 1));
      rl.hdr.count = static_cast<std::uint16_t>(rl.hdr.count + (use_left ? 1 : -1));
      refresh_leaf(ll);
      refresh_leaf(rl);
    } else {
      InnerNode& li_ = l.inner;
      InnerNode& ri_ = r.inner;
      if (use_left) {
        std::copy_backward(ri_.entries, ri_.entries + ri_.hdr.count,
                           ri_.entries + ri_.hdr.count + 1);
        ri_.entries[0] = li_.entries[li_.hdr.count - 1];
      } else {
        li_.entries[li_.hdr.count] = ri_.entries[0];
        std::copy(ri_.entries + 1, ri_.entries + ri_.hdr.count, ri_.entries);
      }
      li_.hdr.count = static_cast<std::uint16_t>(li_.hdr.count + (use_left ? -1 : 1));
      ri_.hdr.count = static_cast<std::uint16_t>(ri_.hdr.count + (use_left ? 1 : -1));
      refresh_inner(li_);
      refresh_inner(ri_);
    }
    return;
  }

  if (is_leaf) {
    LeafNode& ll = l.leaf;
    LeafNode& rl = r.leaf;
    std::copy_n(rl.entries, rl.hdr.count, ll.entries + ll.hdr.count);
    ll.hdr.count = static_cast<std::uint16_t>(ll.hdr.count + rl.hdr.count);
    refresh_leaf(ll);
    unlink_leaf(rref);
  } else {
    InnerNode& li_ = l.inner;
    InnerNode& ri_ = r.inner;
    std::copy_n(ri_.entries, ri_.hdr.count, li_.entries + li_.hdr.count);
    li_.hdr.count = static_cast<std::uint16_t>(li_.hdr.count + ri_.hdr.count);
    refresh_inner(li_);
  }
  release(rref);
  std::copy(parent.entries + ri + 1, parent.entries + parent.hdr.count, parent.entries + ri);
  --parent.hdr.count;
}

std::vector<RecordId> IndexTree::scan_rids() const {
  std::vector<RecordId> out;
  out.reserve(size_);
  scan([&](const LeafEntry& e) { out.push_back(e.record_id); });
  return out;
}

std::vector<RecordId> IndexTree::inorder_rids() const {
  std::vector<RecordId> out;
  out.reserve(size_);
  std::function<void(NodeRef)> walk = [&](NodeRef n) {
    const Node& node = nodes_[n];
    if (node.hdr.kind == NodeKind::leaf) {
      for (std::size_t i = 0; i < node.hdr.count; ++i) {
        out.push_back(node.leaf.entries[i].record_id);
      }
      return;
    }
    for (std::size_t i = 0; i < node.hdr.count; ++i) walk(node.inner.entries[i].child);
  };
  if (root_ != kNoNode) walk(root_);
  return out;
}

namespace {

template <class Entry>
void check_entry_fields(const IndexTree& tree, const Entry& e, RecordId key_rid,
                        std::optional<RecordId> prev_rid, const std::string& where,
                        std::vector<std::string>& out) {
  const KeyView key = tree.table().key(key_rid);
  if (e.key_len != key.size()) out.push_back(where + ": stored key length differs");
  if (!prev_rid) {
    if (e.dbit_pos != 0) out.push_back(where + ": first entry position is not 0");
    if (e.partial_key != 0) {
      out.push_back(where + ": first entry carries a partial key");
    }
    return;
  }
  const auto d = dbit_pair(tree.table().key(*prev_rid), key);
  if (!d) {
    if (e.dbit_pos != kEqualDbit) out.push_back(where + ": duplicate not marked equal");
    return;
  }
  if (e.dbit_pos != *d) {
    std::ostringstream s;
    s << where << ": distinction position " << e.dbit_pos << ", expected " << *d;
    out.push_back(s.str());
  } else if (e.partial_key != partial_key_of(key, *d, tree.pk_bits())) {
    out.push_back(where + ": partial key is wrong");
  }
}

}  // namespace

void IndexTree::verify_rec(NodeRef n, std::size_t depth, std::vector<NodeRef>& leaves,
                           std::vector<std::string>& out) const {
  const std::string where = "node " + std::to_string(n);
  if (n >= nodes_.size()) {
    out.push_back(where + ": reference out of range");
    return;
  }
  const Node& node = nodes_[n];
  const std::size_t count = node.hdr.count;
  if (count == 0) out.push_back(where + ": empty node");
  if (node.hdr.kind == NodeKind::leaf) {
    if (depth + 1 != height_) out.push_back(where + ": leaf at wrong depth");
    if (node.hdr.level != 0) out.push_back(where + ": leaf level is not 0");
    if (count > kLeafFanout) {
      out.push_back(where + ": leaf over fanout");
      return;
    }
    leaves.push_back(n);
    for (std::size_t i = 0; i < count; ++i) {
      const LeafEntry& e = node.leaf.entries[i];
      check_entry_fields(*this, e, e.record_id,
                         i ? std::optional<RecordId>(node.leaf.entries[i - 1].record_id)
                           : std::nullopt,
                         where + " entry " + std::to_string(i), out);
    }
    if (count && node.hdr.highest_key != node.leaf.entries[count - 1].record_id) {
      out.push_back(where + ": header highest key is not the last entry");
    }
    return;
  }
  if (node.hdr.kind != NodeKind::inner) {
    out.push_back(where + ": unknown node kind");
    return;
  }
  if (count > kInnerFanout) {
    out.push_back(where + ": inner node over fanout");
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const InnerEntry& e = node.inner.entries[i];
    const std::string ew = where + " entry " + std::to_string(i);
    if (e.child >= nodes_.size()) {
      out.push_back(ew + ": child out of range");
      continue;
    }
    const Node& child = nodes_[e.child];
    if (child.hdr.level + 1 != node.hdr.level) out.push_back(ew + ": child level mismatch");
    check_entry_fields(*this, e, e.highest_key,
                       i ? std::optional<RecordId>(node.inner.entries[i - 1].highest_key)
                         : std::nullopt,
                       ew, out);
    verify_rec(e.child, depth + 1, leaves, out);
    if (child.hdr.highest_key != e.highest_key) {
      out.push_back(ew + ": highest key is not the child's highest key");
    }
  }
  if (count && node.hdr.highest_key != node.inner.entries[count - 1].highest_key) {
    out.push_back(where + ": header highest key is not the last entry");
  }
}

std::vector<std::string> IndexTree::verify() const {
  std::vector<std::string> out;
  if (root_ == kNoNode) {
    if (size_ != 0) out.push_back("tree has no root but a nonzero size");
    if (height_ != 0) out.push_back("empty tree has nonzero height");
    if (first_leaf_ != kNoNode) out.push_back("empty tree has a leaf chain");
    return out;
  }
  if (nodes_[root_].hdr.level + 1 != height_) out.push_back("root level disagrees with height");
  std::vector<NodeRef> leaves;
  verify_rec(root_, 0, leaves, out);

  std::vector<NodeRef> chain;
  NodeRef prev = kNoNode;
  for (NodeRef n = first_leaf_; n != kNoNode && chain.size() <= leaves.size();
       n = nodes_[n].leaf.next) {
    if (nodes_[n].hdr.prev != prev) out.push_back("leaf chain back link broken");
    chain.push_back(n);
    prev = n;
  }
  if (chain != leaves) out.push_back("leaf chain does not match in-order leaves");

  std::size_t total = 0;
  std::optional<RecordId> last;
  for (NodeRef n : leaves) {
    const LeafNode& leaf = nodes_[n].leaf;
    for (std::size_t i = 0; i < leaf.hdr.count; ++i) {
      const RecordId rid = leaf.entries[i].record_id;
      if (!table_->live(rid)) out.push_back("entry references erased row " + std::to_string(rid));
      if (last && compare_entry(*last, key_of(rid), rid) >= 0) {
        out.push_back("entries out of order at row " + std::to_string(rid));
      }
      last = rid;
      ++total;
    }
  }
  if (total != size_) {
    out.push_back("entry count " + std::to_string(total) + " differs from size " +
                  std::to_string(size_));
  }
  return out;
}

}  // namespace ckidx
