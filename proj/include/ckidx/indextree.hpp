#pragma once

// Partial-key B+ tree over rows of a Table.
//
// Nodes are 256-byte slabs. Every entry stores the distinction bit position
// of its key against the previous entry's key in the same node together with
// the pk bits that follow that position, so leaf searches mostly run on the
// entries alone and dereference a full key only when the partial keys tie.
// The first entry of a node records position 0 and no partial key; searches
// always compare the full key of a node's first entry.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ckidx/bitmap.hpp"
#include "ckidx/keycodec.hpp"
#include "ckidx/metadata.hpp"
#include "ckidx/table.hpp"

namespace ckidx {

inline constexpr std::size_t kNodeBytes = 256;
inline constexpr std::size_t kLeafFanout = 14;
inline constexpr std::size_t kInnerFanout = 9;
inline constexpr std::size_t kLeafMinFill = 7;
inline constexpr std::size_t kInnerMinFill = 5;
inline constexpr unsigned kMaxPartialKeyBits = 32;
/// Stored position of an entry whose key equals its predecessor's.
inline constexpr std::uint16_t kEqualDbit = 0xFFFF;

using NodeRef = std::uint64_t;
inline constexpr NodeRef kNoNode = ~NodeRef{0};

struct LeafEntry {
  std::uint32_t partial_key;
  std::uint16_t dbit_pos;
  std::uint16_t key_len;
  RecordId record_id;
};

struct InnerEntry {
  std::uint32_t partial_key;
  std::uint16_t dbit_pos;
  std::uint16_t key_len;
  NodeRef child;
  RecordId highest_key;  // row holding the highest key under `child`
};

enum class NodeKind : std::uint8_t { leaf = 1, inner = 2 };

struct NodeHeader {
  NodeKind kind;
  std::uint8_t reserved0;
  std::uint16_t count;
  std::uint32_t level;  // 0 for leaves
  RecordId highest_key;
  NodeRef prev;  // leaves: previous leaf in key order
};

struct LeafNode {
  NodeHeader hdr;
  NodeRef next;
  LeafEntry entries[kLeafFanout];
};

struct InnerNode {
  NodeHeader hdr;
  InnerEntry entries[kInnerFanout];
  std::byte pad[kNodeBytes - sizeof(NodeHeader) - kInnerFanout * sizeof(InnerEntry)];
};

union alignas(64) Node {
  NodeHeader hdr;
  LeafNode leaf;
  InnerNode inner;
};

static_assert(sizeof(LeafEntry) == 16);
static_assert(sizeof(InnerEntry) == 24);
static_assert(sizeof(NodeHeader) == 24);
static_assert(sizeof(Node) == kNodeBytes);

struct BuildConfig {
  double fill_factor = 0.9;
  unsigned pk_bits = kMaxPartialKeyBits;

  [[nodiscard]] std::size_t leaf_fill() const;
  [[nodiscard]] std::size_t inner_fill() const;
  void validate() const;
};

/// The pk bits following `dbit_pos`, right aligned, zero past the key end.
std::uint32_t partial_key_of(KeyView key, BitPos dbit_pos, unsigned pk_bits);

/// Levels of a bulk-built tree over n keys.
std::size_t expected_height(std::size_t n, const BuildConfig& cfg);

class IndexTree {
 public:
  explicit IndexTree(const Table& table, unsigned pk_bits = kMaxPartialKeyBits);

  [[nodiscard]] const Table& table() const noexcept { return *table_; }
  [[nodiscard]] unsigned pk_bits() const noexcept { return pk_bits_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] NodeRef root() const noexcept { return root_; }
  [[nodiscard]] NodeRef first_leaf() const noexcept { return first_leaf_; }
  [[nodiscard]] std::size_t node_count() const noexcept {
    return nodes_.size() - free_.size();
  }
  [[nodiscard]] const Node& node(NodeRef ref) const noexcept { return nodes_[ref]; }
  [[nodiscard]] Node& node(NodeRef ref) noexcept { return nodes_[ref]; }

  /// Record ID of the first entry whose key equals `key`.
  [[nodiscard]] std::optional<RecordId> search(KeyView key) const;

  /// Indexes row `rid` of the table and maintains `meta` when given.
  void insert(RecordId rid, DSMetadata* meta = nullptr);
  /// Removes the entry of row `rid`. Metadata is left untouched.
  void erase(RecordId rid, DSMetadata* meta = nullptr);
  /// Removes the first entry equal to `key`; returns its record ID.
  RecordId erase_key(KeyView key, DSMetadata* meta = nullptr);

  template <class Fn>
  void scan(Fn&& fn) const {
    for (NodeRef n = first_leaf_; n != kNoNode; n = nodes_[n].leaf.next) {
      const LeafNode& leaf = nodes_[n].leaf;
      for (std::size_t i = 0; i < leaf.hdr.count; ++i) fn(leaf.entries[i]);
    }
  }
  [[nodiscard]] std::vector<RecordId> scan_rids() const;
  /// Recursive in-order traversal, independent of the leaf chain.
  [[nodiscard]] std::vector<RecordId> inorder_rids() const;

  /// Structural and partial-key invariant violations, empty when sound.
  [[nodiscard]] std::vector<std::string> verify() const;

  // Bulk-build interface.
  /// Appends `count` uninitialised nodes and returns the first reference.
  NodeRef allocate_block(std::size_t count);
  void adopt(NodeRef root, std::size_t height, NodeRef first_leaf, std::size_t size);
  void release(NodeRef ref);
  void clear();

  /// First entry of a node: position 0 and no partial key.
  [[nodiscard]] LeafEntry make_leaf_entry(RecordId rid) const;
  [[nodiscard]] InnerEntry make_inner_entry(NodeRef child, RecordId highest) const;
  /// Entry following one whose key differs at `dbit` (nullopt: equal keys).
  [[nodiscard]] LeafEntry make_leaf_entry(RecordId rid, std::optional<BitPos> dbit) const;
  [[nodiscard]] InnerEntry make_inner_entry(NodeRef child, RecordId highest,
                                            std::optional<BitPos> dbit) const;

 private:
  struct Locate {
    std::size_t pos;
    bool found;
  };
  struct InsertResult {
    NodeRef split = kNoNode;  // new right sibling
    bool highest_changed = false;
  };

  [[nodiscard]] KeyView key_of(RecordId rid) const noexcept { return table_->key(rid); }
  /// (key(a), a) < (key, rid)
  [[nodiscard]] int compare_entry(RecordId a, KeyView key, RecordId rid) const noexcept;
  [[nodiscard]] Locate locate_in_leaf(const LeafNode& leaf, KeyView key) const;
  [[nodiscard]] std::size_t child_for(const InnerNode& inner, KeyView key,
                                      std::optional<RecordId> rid) const;

  NodeRef new_node(NodeKind kind, std::uint32_t level);
  void refresh_leaf(LeafNode& leaf) const;
  void refresh_inner(InnerNode& inner) const;

  InsertResult insert_rec(NodeRef n, KeyView key, RecordId rid,
                          std::optional<RecordId>& pred, DSMetadata* meta);
  bool erase_rec(NodeRef n, KeyView key, RecordId rid);
  void rebalance(InnerNode& parent, std::size_t idx);
  void unlink_leaf(NodeRef ref);

  void verify_rec(NodeRef n, std::size_t depth, std::vector<NodeRef>& leaves,
                  std::vector<std::string>& out) const;

  const Table* table_;
  unsigned pk_bits_;
  std::vector<Node> nodes_;
  std::vector<NodeRef> free_;
  NodeRef root_ = kNoNode;
  NodeRef first_leaf_ = kNoNode;
  std::size_t height_ = 0;
  std::size_t size_ = 0;
};

}  // namespace ckidx
