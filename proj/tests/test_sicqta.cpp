#include "doctest.h"
#include "sicqta/qta.hpp"
#include "sicqta/sicqta.hpp"
#include "support/reference_peeler.hpp"

using namespace sicqta;

namespace {

IdSet parse_ids(std::initializer_list<const char*> strs, const TreeParams& p) {
  IdSet out;
  for (const char* s : strs) out.push_back(id_from_string(s, p));
  std::sort(out.begin(), out.end());
  return out;
}

std::string outcome_letters(const ResolutionTrace& trace) {
  std::string s;
  for (const auto& rec : trace.slots) {
    switch (rec.outcome.kind) {
      case SlotKind::Idle: s += 'I'; break;
      case SlotKind::Success: s += 'S'; break;
      case SlotKind::Collision: s += 'C'; break;
    }
  }
  return s;
}

/// Ids decoded strictly before the given slot index.
IdSet decoded_before(const ResolutionTrace& trace, int slot) {
  IdSet out;
  for (const auto& [id, at] : trace.decoded)
    if (at < slot) out.push_back(id);
  return out;
}

}  // namespace

TEST_CASE("worst-case example resolves in 6 slots with two chain decodes") {
  TreeParams p(3);
  const IdSet devices = parse_ids({"000", "001", "100", "101"}, p);
  ResolutionTrace trace = run_sicqta(devices, p);
  REQUIRE(trace.latency() == 6);
  CHECK(outcome_letters(trace) == "CCCSCS");
  const char* queries[] = {"", "0", "00", "000", "10", "100"};
  for (int i = 0; i < 6; ++i)
    CHECK(trace.slots[static_cast<std::size_t>(i)].query.str() == queries[i]);
  CHECK(*trace.decoded_at(id_from_string("000", p)) == 4);
  CHECK(*trace.decoded_at(id_from_string("001", p)) == 4);
  CHECK(*trace.decoded_at(id_from_string("100", p)) == 6);
  CHECK(*trace.decoded_at(id_from_string("101", p)) == 6);
  // B and D are recovered by cancellation, A and C by their own slots.
  CHECK(trace.slots[3].cancelled == parse_ids({"001"}, p));
  CHECK(trace.slots[5].cancelled == parse_ids({"101"}, p));
}

TEST_CASE("full population resolves in exactly 2^u slots") {
  for (int u = 1; u <= 6; ++u) {
    TreeParams p(u);
    IdSet all;
    for (DeviceId id = 0; id < p.device_count(); ++id) all.push_back(id);
    ResolutionTrace trace = run_sicqta(all, p);
    CHECK(trace.latency() == static_cast<int>(p.device_count()));
    CHECK(trace.decoded.size() == all.size());
  }
}

TEST_CASE("empty and singleton populations use a single slot") {
  TreeParams p(3);
  ResolutionTrace idle = run_sicqta({}, p);
  REQUIRE(idle.latency() == 1);
  CHECK(idle.slots[0].outcome.kind == SlotKind::Idle);

  ResolutionTrace one = run_sicqta(parse_ids({"010"}, p), p);
  REQUIRE(one.latency() == 1);
  CHECK(one.slots[0].outcome.kind == SlotKind::Success);
}

TEST_CASE("chain cancellation drains nested stores and reports k") {
  TreeParams p(3);
  const DeviceId a = id_from_string("000", p);
  const DeviceId b = id_from_string("001", p);
  const DeviceId c = id_from_string("010", p);

  SUBCASE("two stored copies of the same pair give k=3") {
    SicqtaState state(p);
    state.store.push_back({2, Query::from_string("0"), {a, b}, true});
    state.store.push_back({3, Query::from_string("00"), {a, b}, true});
    ChainOutcome chain = chain_cancel(state, a);
    CHECK(chain.newly_decoded == IdSet{b});
    CHECK(chain.k == 3);
    CHECK(state.store[0].residual.empty());
    CHECK(state.store[1].residual.empty());
  }

  SUBCASE("empty store decodes nothing and k stays 1") {
    SicqtaState state(p);
    ChainOutcome chain = chain_cancel(state, a);
    CHECK(chain.newly_decoded.empty());
    CHECK(chain.k == 1);
  }

  SUBCASE("triple collision only shrinks to a pair") {
    SicqtaState state(p);
    state.store.push_back({1, Query::root(), {a, b, c}, true});
    ChainOutcome chain = chain_cancel(state, a);
    CHECK(chain.newly_decoded.empty());
    CHECK(chain.k == 1);
    CHECK(state.store[0].residual == IdSet{b, c});
  }
}

TEST_CASE("idle slot skips the sibling's guaranteed collision") {
  TreeParams p(3);
  // Both devices live under 01x, so 00x idles and 010 is queried next.
  ResolutionTrace trace = run_sicqta(parse_ids({"010", "011"}, p), p);
  REQUIRE(trace.latency() == 4);
  CHECK(trace.slots[2].query.str() == "00");
  CHECK(trace.slots[2].outcome.kind == SlotKind::Idle);
  CHECK(trace.slots[3].query.str() == "010");
  CHECK(trace.slots[3].outcome.kind == SlotKind::Success);
  CHECK(trace.decoded.size() == 2);
}

TEST_CASE("stepping after termination is a state error") {
  TreeParams p(3);
  SicqtaState state(p);
  CHECK_FALSE(sicqta_step(state, SlotOutcome::idle(), {}).has_value());
  CHECK(state.terminated);
  CHECK_THROWS_AS(sicqta_step(state, SlotOutcome::idle(), {}), std::logic_error);
}

TEST_CASE("exhaustive small trees: decode everyone, skip soundly, match peeler") {
  for (int u = 1; u <= 3; ++u) {
    TreeParams p(u);
    for (const IdSet& subset : testing::all_subsets(1 << u)) {
      ResolutionTrace trace = run_sicqta(subset, p);
      REQUIRE(trace.decoded.size() == subset.size());

      // Skip soundness: no transmitted query addresses an already fully
      // decoded nonempty device set.
      for (const auto& rec : trace.slots) {
        IdSet full;
        for (DeviceId id : subset)
          if (matches(id, rec.query, p)) full.push_back(id);
        if (full.empty()) continue;
        const IdSet known = decoded_before(trace, rec.index);
        CHECK_FALSE(std::includes(known.begin(), known.end(), full.begin(),
                                  full.end()));
      }

      // Set-based peeling replay decodes the same ids at the same slots.
      std::vector<Query> queries;
      for (const auto& rec : trace.slots) queries.push_back(rec.query);
      testing::PeelReplay ref = testing::peel_replay(subset, p, queries);
      CHECK(ref.decoded == trace.decoded);

      // SIC never loses against plain QTA.
      CHECK(trace.latency() <= run_qta(subset, p).latency());
    }
  }
}

TEST_CASE("finite cancellation depth still decodes everyone, never faster") {
  for (int u = 2; u <= 3; ++u) {
    TreeParams p(u);
    for (const IdSet& subset : testing::all_subsets(1 << u)) {
      const int unrestricted = run_sicqta(subset, p).latency();
      for (int depth : {1, 2, 3}) {
        ResolutionTrace trace = run_sicqta(subset, p, depth);
        REQUIRE(trace.decoded.size() == subset.size());
        CHECK(trace.latency() >= unrestricted);
        // A slot can never be queried twice.
        for (std::size_t i = 0; i < trace.slots.size(); ++i)
          for (std::size_t j = i + 1; j < trace.slots.size(); ++j)
            REQUIRE_FALSE(trace.slots[i].query == trace.slots[j].query);
      }
    }
  }
}

TEST_CASE("deep collisions are unusable under a finite cancellation depth") {
  TreeParams p(3);
  const IdSet devices = parse_ids({"000", "001", "100", "101"}, p);
  // Depth 2 keeps pair collisions usable: the root collision of four
  // packets is wasted, the per-branch pairs still chain.
  ResolutionTrace trace = run_sicqta(devices, p, 2);
  REQUIRE(trace.decoded.size() == 4);
  CHECK(trace.latency() >= 6);
  // The root slot keeps its full signal: nothing was cancelled from it.
  CHECK(trace.slots[0].residual == devices);
}
