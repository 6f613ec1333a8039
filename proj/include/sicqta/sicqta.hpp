#pragma once

// Gateway-side SICQTA: depth-first query generation with chained
// interference cancellation and query skipping.
//
// The gateway stores every collision signal. Each Success triggers a
// cancellation chain: decoded packets are subtracted from all stored
// residuals, and any residual reaching cardinality 1 decodes its
// remaining packet, to fixpoint. A stored slot whose residual reaches
// zero certifies that the whole subtree under its query is resolved;
// pending sibling queries covered by such a drained store are skipped
// without ever being transmitted. The chain counter k equals 1 plus the
// number of stored slots fully drained by the chain, so the skip of the
// k-1 most recent pending queries falls out of the coverage rule.
//
// A finite max cancellation depth marks collisions of more than that
// many packets unusable: they still read as collisions but are never
// cancelled against. Pending queries that can be neither certified
// resolved nor certified loaded are then transmitted directly instead
// of skipped.

#include <stdexcept>

#include "sicqta/core.hpp"

namespace sicqta {

struct StoredCollision {
  int slot = 0;  // 1-based slot index of the collision
  Query query;
  IdSet residual;  // signal minus decoded packets
  bool usable = true;
};

struct SicqtaState {
  TreeParams params;
  std::optional<int> max_cancel_depth;  // nullopt = perfect SIC
  std::vector<Query> pending;           // sibling stack, back = most recent
  std::vector<StoredCollision> store;
  IdSet decoded_ids;
  Query current;                    // query in flight
  bool sibling_unexplored = false;  // push sibling(current) on a busy slot
  int slot = 1;                     // index of the slot in flight
  bool terminated = false;
  int last_chain_k = 1;
  IdSet last_chain_decoded;  // ids recovered by the most recent chain

  explicit SicqtaState(TreeParams p, std::optional<int> depth = std::nullopt)
      : params(p), max_cancel_depth(depth), current(Query::root()) {
    if (depth && *depth < 1)
      throw std::invalid_argument("max_cancel_depth must be >= 1");
  }

  bool perfect_sic() const { return !max_cancel_depth.has_value(); }
};

struct ChainOutcome {
  IdSet newly_decoded;  // ids recovered by the chain, excluding the trigger
  int k = 1;            // 1 + stored slots fully drained by this chain
  int drained = 0;
};

namespace detail {

/// Deepest usable stored strict ancestor of `q`, or nullptr.
inline const StoredCollision* nearest_stored_ancestor(const SicqtaState& state,
                                                      const Query& q) {
  const StoredCollision* best = nullptr;
  for (const auto& sc : state.store) {
    if (!sc.usable || sc.query.length >= q.length) continue;
    if (!sc.query.is_prefix_of(q)) continue;
    if (!best || sc.query.length > best->query.length) best = &sc;
  }
  return best;
}

/// A query is certified resolved when a drained usable store covers it.
/// Residuals are nested along ancestor chains, so checking the nearest
/// stored ancestor suffices.
inline bool covered_by_drained_store(const SicqtaState& state, const Query& q) {
  const StoredCollision* s = nearest_stored_ancestor(state, q);
  return s != nullptr && s->residual.empty();
}

}  // namespace detail

/// Propagate one clean packet through the collision store: subtract every
/// decoded id from all usable residuals, decode any residual reaching
/// cardinality 1, repeat to fixpoint. Returns the ids recovered by the
/// chain and sets state.last_chain_k.
inline ChainOutcome chain_cancel(SicqtaState& state, DeviceId clean) {
  ChainOutcome out;
  detail::insert_sorted(state.decoded_ids, clean);
  std::vector<DeviceId> worklist{clean};
  while (!worklist.empty()) {
    const DeviceId id = worklist.back();
    worklist.pop_back();
    for (auto& sc : state.store) {
      if (!sc.usable || sc.residual.empty()) continue;
      auto it = std::lower_bound(sc.residual.begin(), sc.residual.end(), id);
      if (it == sc.residual.end() || *it != id) continue;
      sc.residual.erase(it);
      if (sc.residual.empty()) {
        ++out.drained;
      } else if (sc.residual.size() == 1) {
        const DeviceId rem = sc.residual.front();
        if (!detail::contains_sorted(state.decoded_ids, rem)) {
          sc.residual.clear();
          ++out.drained;
          detail::insert_sorted(state.decoded_ids, rem);
          detail::insert_sorted(out.newly_decoded, rem);
          worklist.push_back(rem);
        }
        // Otherwise rem is already queued in the worklist; its own pass
        // drains this slot.
      }
    }
  }
  out.k = 1 + out.drained;
  state.last_chain_k = out.k;
  state.last_chain_decoded = out.newly_decoded;
  return out;
}

/// Feed the outcome (and the slot's signal, which backs the stored
/// residual on a collision) observed for state.current. Returns the next
/// query to transmit, or nullopt on termination.
inline std::optional<Query> sicqta_step(SicqtaState& state,
                                        const SlotOutcome& outcome,
                                        const IdSet& signal) {
  if (state.terminated)
    throw std::logic_error("sicqta_step: scheduler already terminated");
  const Query q = state.current;
  const bool fresh = state.sibling_unexplored;

  auto advance = [&](int expected_pops) -> std::optional<Query> {
    int pops = 0;
    while (!state.pending.empty() &&
           detail::covered_by_drained_store(state, state.pending.back())) {
      state.pending.pop_back();
      ++pops;
    }
    if (state.perfect_sic() && expected_pops >= 0 && pops != expected_pops)
      throw std::logic_error(
          "sicqta_step: chain counter k disagrees with resolved pending queries");
    if (state.pending.empty()) {
      state.terminated = true;
      return std::nullopt;
    }
    Query top = state.pending.back();
    state.pending.pop_back();
    if (state.perfect_sic() && top.length < state.params.u) {
      // The next pending query is certified loaded: all remaining packets
      // of its nearest stored ancestor sit below it, so transmitting it
      // would only repeat the collision. Enter its subtree directly.
      state.current = top.child(0);
      state.sibling_unexplored = true;
    } else {
      state.current = top;
      state.sibling_unexplored = false;
    }
    return state.current;
  };

  ++state.slot;
  switch (outcome.kind) {
    case SlotKind::Collision: {
      if (q.length >= state.params.u)
        throw std::logic_error("sicqta_step: collision at leaf depth");
      const bool usable =
          state.perfect_sic() ||
          static_cast<int>(signal.size()) <= *state.max_cancel_depth;
      state.store.push_back(StoredCollision{state.slot - 1, q, signal, usable});
      if (fresh) state.pending.push_back(q.sibling());
      state.current = q.child(0);
      state.sibling_unexplored = true;
      return state.current;
    }
    case SlotKind::Idle: {
      state.last_chain_decoded.clear();
      if (!fresh) {
        // Directly transmitted query (root or uncertified pending): an
        // idle certifies its subtree resolved.
        return advance(-1);
      }
      // The parent held at least two packets and this child held none,
      // so the sibling subtree is loaded; skip its guaranteed collision.
      Query sib = q.sibling();
      if (sib.length < state.params.u) {
        state.current = sib.child(0);
        state.sibling_unexplored = true;
      } else {
        // Leaf sibling: nothing to descend into, transmit it as is.
        state.current = sib;
        state.sibling_unexplored = false;
      }
      return state.current;
    }
    case SlotKind::Success: {
      ChainOutcome chain = chain_cancel(state, *outcome.decoded);
      if (fresh) state.pending.push_back(q.sibling());
      return advance(chain.k - 1);
    }
  }
  throw std::logic_error("sicqta_step: unreachable outcome kind");
}

/// Run a complete SICQTA contention resolution. Every participant ends up
/// decoded exactly once, by a Success slot or by cancellation from a
/// stored collision; `decoded` records the slot at which the chain
/// completed. An empty participant set yields a single Idle root slot.
inline ResolutionTrace run_sicqta(const IdSet& participants, const TreeParams& params,
                                  std::optional<int> max_cancel_depth = std::nullopt) {
  ResolutionTrace trace{params, make_participants(participants, params), {}, {}};
  SicqtaState state(params, max_cancel_depth);
  while (true) {
    const Query q = state.current;
    const int slot_now = state.slot;
    IdSet transmitters =
        answering_set(trace.participants, q, params, state.decoded_ids);
    SlotOutcome outcome = observe(transmitters);
    SlotRecord rec{slot_now, q, outcome, transmitters, {}, {}};
    auto next = sicqta_step(state, outcome, transmitters);
    if (outcome.kind == SlotKind::Success) {
      trace.decoded.emplace_back(*outcome.decoded, slot_now);
      rec.cancelled = state.last_chain_decoded;
      for (DeviceId id : rec.cancelled) trace.decoded.emplace_back(id, slot_now);
    }
    trace.slots.push_back(std::move(rec));
    if (!next) break;
  }
  // Final residuals: what is left undecoded of each slot's signal.
  for (auto& rec : trace.slots) {
    for (const auto& sc : state.store) {
      if (sc.slot == rec.index) {
        rec.residual = sc.usable ? sc.residual : rec.transmitters;
        break;
      }
    }
  }
  std::sort(trace.decoded.begin(), trace.decoded.end());
  return trace;
}

}  // namespace sicqta
