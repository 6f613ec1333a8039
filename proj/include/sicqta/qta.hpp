#pragma once

// Gateway-side Query Tree Algorithm: deterministic prefix-query collision
// resolution without interference cancellation. Slot 1 queries the empty
// prefix; collision children are scheduled right behind the colliding
// query's still-pending sibling, which reproduces the per-subtree
// breadth-first slot ordering of the reference worked example.

#include <deque>
#include <stdexcept>

#include "sicqta/core.hpp"

namespace sicqta {

struct QtaState {
  TreeParams params;
  std::deque<Query> queue;  // pending queries, popped from the front
  int slot = 0;             // slots consumed so far
  bool terminated = false;

  explicit QtaState(TreeParams p) : params(p) {}
};

/// Advance the scheduler with the outcome observed for `current`.
/// Idle and Success just move on; a Collision enqueues both children of
/// `current` behind its pending sibling (at the tail if the sibling is
/// gone). Returns the next query to transmit, or nullopt once the queue
/// is exhausted.
inline std::optional<Query> qta_step(QtaState& state, const SlotOutcome& outcome,
                                     const Query& current) {
  if (state.terminated)
    throw std::logic_error("qta_step: scheduler already terminated");
  if (outcome.kind == SlotKind::Collision) {
    if (current.length >= state.params.u)
      throw std::logic_error("qta_step: collision reported at leaf depth");
    auto pos = state.queue.end();
    if (!current.is_root()) {
      const Query sib = current.sibling();
      for (auto it = state.queue.begin(); it != state.queue.end(); ++it) {
        if (*it == sib) {
          pos = it + 1;
          break;
        }
      }
    }
    pos = state.queue.insert(pos, current.child(0));
    state.queue.insert(pos + 1, current.child(1));
  }
  if (state.queue.empty()) {
    state.terminated = true;
    return std::nullopt;
  }
  Query next = state.queue.front();
  state.queue.pop_front();
  return next;
}

/// Run a complete QTA contention resolution for the given participant set.
/// Every participant is decoded exactly once via a Success slot; an empty
/// participant set yields a single Idle root slot.
inline ResolutionTrace run_qta(const IdSet& participants, const TreeParams& params) {
  ResolutionTrace trace{params, make_participants(participants, params), {}, {}};
  QtaState state(params);
  Query q = Query::root();
  IdSet none;
  while (true) {
    ++state.slot;
    IdSet transmitters = answering_set(trace.participants, q, params, none);
    SlotOutcome outcome = observe(transmitters);
    if (outcome.kind == SlotKind::Success)
      trace.decoded.emplace_back(*outcome.decoded, state.slot);
    trace.slots.push_back(SlotRecord{state.slot, q, outcome, transmitters,
                                     /*cancelled=*/{}, /*residual=*/transmitters});
    auto next = qta_step(state, outcome, q);
    if (!next) break;
    q = *next;
  }
  std::sort(trace.decoded.begin(), trace.decoded.end());
  return trace;
}

}  // namespace sicqta
