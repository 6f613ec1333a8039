#pragma once

// Ground-truth channel and address abstractions shared by the tree
// algorithms: device ids, bit-prefix queries, slot signals and outcomes,
// and the perfect-cancellation rule.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sicqta {

/// Device address value in [0, 2^u). Rendered as a u-bit big-endian
/// string; the leftmost (most significant) bit is split first.
using DeviceId = std::uint32_t;

/// Sorted, duplicate-free id set. All set operations in the library
/// assume and preserve this ordering.
using IdSet = std::vector<DeviceId>;

/// Tree geometry: u address bits, N = 2^u attachable devices.
struct TreeParams {
  int u = 1;

  explicit TreeParams(int u_bits) : u(u_bits) {
    if (u < 1 || u > 24) {
      throw std::invalid_argument("TreeParams: u must be in [1, 24], got " +
                                  std::to_string(u));
    }
  }

  std::uint64_t device_count() const { return std::uint64_t{1} << u; }

  bool valid_id(DeviceId id) const { return id < device_count(); }
};

/// A bit-prefix of length 0..u addressing a subtree. The empty query
/// addresses all devices. `bits` holds the prefix value right-aligned.
struct Query {
  std::uint32_t bits = 0;
  int length = 0;

  Query() = default;
  Query(std::uint32_t bits_, int length_) : bits(bits_), length(length_) {}

  static Query root() { return Query{}; }

  /// Parse a '0'/'1' string; "" is the root query.
  static Query from_string(const std::string& s) {
    if (s.size() > 24) throw std::invalid_argument("Query: prefix too long");
    Query q;
    for (char c : s) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("Query: invalid character in prefix");
      q.bits = (q.bits << 1) | static_cast<std::uint32_t>(c - '0');
      ++q.length;
    }
    return q;
  }

  Query child(int bit) const {
    assert(bit == 0 || bit == 1);
    return Query{(bits << 1) | static_cast<std::uint32_t>(bit), length + 1};
  }

  /// The other child of this query's parent. Undefined for the root.
  Query sibling() const {
    assert(length > 0);
    return Query{bits ^ 1u, length};
  }

  Query parent() const {
    assert(length > 0);
    return Query{bits >> 1, length - 1};
  }

  bool is_root() const { return length == 0; }

  /// True iff this query is a (non-strict) ancestor of `other`.
  bool is_prefix_of(const Query& other) const {
    return length <= other.length &&
           (other.bits >> (other.length - length)) == bits;
  }

  std::string str() const {
    std::string s(static_cast<std::size_t>(length), '0');
    for (int i = 0; i < length; ++i)
      if (bits & (1u << (length - 1 - i))) s[static_cast<std::size_t>(i)] = '1';
    return s;
  }

  friend bool operator==(const Query& a, const Query& b) {
    return a.length == b.length && a.bits == b.bits;
  }
  friend bool operator!=(const Query& a, const Query& b) { return !(a == b); }
};

/// Render an id as its u-bit big-endian string.
inline std::string id_to_string(DeviceId id, const TreeParams& params) {
  std::string s(static_cast<std::size_t>(params.u), '0');
  for (int i = 0; i < params.u; ++i)
    if (id & (1u << (params.u - 1 - i))) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

/// Parse a u-bit big-endian id string; rejects wrong length or non-binary.
inline DeviceId id_from_string(const std::string& s, const TreeParams& params) {
  if (static_cast<int>(s.size()) != params.u)
    throw std::invalid_argument("device id '" + s + "' is not " +
                                std::to_string(params.u) + " bits long");
  DeviceId id = 0;
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("device id '" + s + "' has non-binary digit");
    id = (id << 1) | static_cast<DeviceId>(c - '0');
  }
  return id;
}

/// True iff the first |q| bits of the id equal the query.
inline bool matches(DeviceId id, const Query& q, const TreeParams& params) {
  if (q.length > params.u)
    throw std::invalid_argument("query longer than the address length u");
  if (!params.valid_id(id)) throw std::invalid_argument("device id out of range");
  if (q.length == 0) return true;
  return (id >> (params.u - q.length)) == q.bits;
}

/// What the gateway can observe about one slot.
enum class SlotKind { Idle, Success, Collision };

struct SlotOutcome {
  SlotKind kind = SlotKind::Idle;
  std::optional<DeviceId> decoded;  // set iff kind == Success

  static SlotOutcome idle() { return {SlotKind::Idle, std::nullopt}; }
  static SlotOutcome success(DeviceId id) { return {SlotKind::Success, id}; }
  static SlotOutcome collision() { return {SlotKind::Collision, std::nullopt}; }

  friend bool operator==(const SlotOutcome& a, const SlotOutcome& b) {
    return a.kind == b.kind && a.decoded == b.decoded;
  }
};

/// Collision-channel observation: pure function of |transmitters|.
/// 0 -> Idle, 1 -> Success carrying the transmitter's id, >=2 -> Collision.
inline SlotOutcome observe(const IdSet& transmitters) {
  if (transmitters.empty()) return SlotOutcome::idle();
  if (transmitters.size() == 1) return SlotOutcome::success(transmitters.front());
  return SlotOutcome::collision();
}

/// Perfect cancellation: subtract known decoded packets from a stored
/// residual. Returns residual \ known.
inline IdSet cancel(const IdSet& residual, const IdSet& known) {
  IdSet out;
  out.reserve(residual.size());
  std::set_difference(residual.begin(), residual.end(), known.begin(),
                      known.end(), std::back_inserter(out));
  return out;
}

/// One slot of a resolution transcript. `transmitters` is ground truth
/// hidden from gateway logic; `residual` is the slot signal's undecoded
/// leftover at the end of the run (equal to `transmitters` for runs
/// without SIC); `cancelled` lists ids recovered by chain cancellation
/// completing at this slot.
struct SlotRecord {
  int index = 0;  // 1-based
  Query query;
  SlotOutcome outcome;
  IdSet transmitters;
  IdSet cancelled;
  IdSet residual;
};

/// Full transcript of one contention resolution interval.
struct ResolutionTrace {
  TreeParams params;
  IdSet participants;
  std::vector<SlotRecord> slots;
  std::vector<std::pair<DeviceId, int>> decoded;  // id -> decoding slot, sorted by id

  int latency() const { return static_cast<int>(slots.size()); }

  std::optional<int> decoded_at(DeviceId id) const {
    auto it = std::lower_bound(decoded.begin(), decoded.end(), id,
                               [](const auto& p, DeviceId v) { return p.first < v; });
    if (it == decoded.end() || it->first != id) return std::nullopt;
    return it->second;
  }
};

/// Validates and normalizes a participant list: ids sorted, distinct,
/// in range for u.
inline IdSet make_participants(std::vector<DeviceId> ids, const TreeParams& params) {
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!params.valid_id(ids[i]))
      throw std::invalid_argument("device id " + std::to_string(ids[i]) +
                                  " out of range for u=" + std::to_string(params.u));
    if (i > 0 && ids[i] == ids[i - 1])
      throw std::invalid_argument("duplicate device id " +
                                  id_to_string(ids[i], params));
  }
  return ids;
}

/// The undecoded participants matching a query, i.e. the transmitter set
/// of that slot. Participants must be sorted; matching ids form a
/// contiguous value range.
inline IdSet answering_set(const IdSet& participants, const Query& q,
                           const TreeParams& params, const IdSet& already_decoded) {
  if (q.length > params.u)
    throw std::invalid_argument("query longer than the address length u");
  const int shift = params.u - q.length;
  const DeviceId lo = q.length == 0 ? 0 : (q.bits << shift);
  const std::uint64_t hi64 =
      q.length == 0 ? (std::uint64_t{1} << params.u)
                    : (static_cast<std::uint64_t>(q.bits) + 1) << shift;
  auto first = std::lower_bound(participants.begin(), participants.end(), lo);
  auto last = std::upper_bound(participants.begin(), participants.end(),
                               static_cast<DeviceId>(hi64 - 1));
  IdSet out;
  out.reserve(static_cast<std::size_t>(last - first));
  std::set_difference(first, last, already_decoded.begin(), already_decoded.end(),
                      std::back_inserter(out));
  return out;
}

namespace detail {

/// Insert into a sorted IdSet, keeping it sorted and duplicate-free.
inline void insert_sorted(IdSet& set, DeviceId id) {
  auto it = std::lower_bound(set.begin(), set.end(), id);
  if (it == set.end() || *it != id) set.insert(it, id);
}

inline bool contains_sorted(const IdSet& set, DeviceId id) {
  return std::binary_search(set.begin(), set.end(), id);
}

}  // namespace detail

}  // namespace sicqta
