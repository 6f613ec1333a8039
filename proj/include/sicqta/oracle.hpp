#pragma once

// Brute-force latency extremes: exact enumeration over all id subsets of
// a given size, or seeded sampling when enumeration is out of budget.
// Results are reduced with an associative combine (extreme latency,
// lexicographically smallest witness on ties), so parallel runs are
// reproducible regardless of worker count.

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "sicqta/bounds.hpp"
#include "sicqta/parallel.hpp"
#include "sicqta/qta.hpp"
#include "sicqta/sicqta.hpp"

namespace sicqta {

inline constexpr std::uint64_t kEnumerationBudget = 1'000'000;

namespace detail {

/// Binomial coefficient, saturating at `cap` to avoid overflow.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k,
                                     std::uint64_t cap) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - k + i) / i;
  }
  return result > cap ? cap + 1 : result;
}

/// The `rank`-th size-m subset of [0, n) in lexicographic order
/// (combinatorial number system).
inline IdSet unrank_combination(std::uint64_t rank, std::uint64_t n, int m) {
  IdSet out;
  out.reserve(static_cast<std::size_t>(m));
  std::uint64_t value = 0;
  // Ranks stay within the enumeration budget, so any count above it acts
  // as infinity; the small cap also keeps binomial_capped overflow-free.
  const std::uint64_t cap = kEnumerationBudget * 2;
  for (int remaining = m; remaining > 0; --remaining) {
    while (true) {
      const std::uint64_t below = binomial_capped(
          n - value - 1, static_cast<std::uint64_t>(remaining - 1), cap);
      if (rank < below) break;
      rank -= below;
      ++value;
    }
    out.push_back(static_cast<DeviceId>(value));
    ++value;
  }
  return out;
}

/// Advance a sorted combination to its lexicographic successor.
/// Returns false once the last combination has been consumed.
inline bool next_combination(IdSet& comb, std::uint64_t n) {
  const int m = static_cast<int>(comb.size());
  for (int i = m - 1; i >= 0; --i) {
    if (comb[static_cast<std::size_t>(i)] <
        static_cast<DeviceId>(n - static_cast<std::uint64_t>(m - i))) {
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < m; ++j)
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

enum class ExtremeKind { Worst, Best };

struct OracleBudget {
  enum class Mode { Enumerate, Sample };
  Mode mode = Mode::Enumerate;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static OracleBudget enumerate() { return {}; }
  static OracleBudget sampled(std::uint64_t n, std::uint64_t seed) {
    return {Mode::Sample, n, seed};
  }
};

struct OracleResult {
  int latency = 0;
  IdSet witness;
  bool exact = false;        // true only in enumeration mode
  std::uint64_t evaluated = 0;
};

inline int run_latency(Algorithm alg, const IdSet& ids, const TreeParams& params) {
  return alg == Algorithm::Qta ? run_qta(ids, params).latency()
                               : run_sicqta(ids, params).latency();
}

namespace detail {

struct Extreme {
  int latency = -1;
  IdSet witness;
  bool valid = false;
};

inline void combine(Extreme& into, int latency, const IdSet& ids, ExtremeKind kind) {
  const bool better =
      !into.valid ||
      (kind == ExtremeKind::Worst ? latency > into.latency : latency < into.latency) ||
      (latency == into.latency && ids < into.witness);
  if (better) {
    into.latency = latency;
    into.witness = ids;
    into.valid = true;
  }
}

inline OracleResult extreme_case_oracle(ExtremeKind kind, Algorithm alg, int m,
                                        const TreeParams& params,
                                        const OracleBudget& budget,
                                        unsigned workers) {
  if (m < 1 || static_cast<std::uint64_t>(m) > params.device_count())
    throw std::invalid_argument("oracle: M must satisfy 1 <= M <= 2^u");
  const std::uint64_t n = params.device_count();
  std::uint64_t total = 0;
  if (budget.mode == OracleBudget::Mode::Enumerate) {
    total = binomial_capped(n, static_cast<std::uint64_t>(m), kEnumerationBudget);
    if (total > kEnumerationBudget)
      throw std::invalid_argument(
          "oracle: C(2^u, M) exceeds the enumeration budget of 10^6 subsets; "
          "use sampled mode");
  } else {
    total = budget.samples;
    if (total == 0) throw std::invalid_argument("oracle: sample count must be > 0");
  }

  if (workers == 0) workers = default_worker_count();
  const std::uint64_t chunk_count = std::min<std::uint64_t>(workers, total);
  std::vector<Extreme> partial(chunk_count);
  const std::uint64_t chunk = (total + chunk_count - 1) / chunk_count;

  parallel_for(
      chunk_count,
      [&](std::uint64_t c) {
        const std::uint64_t begin = c * chunk;
        const std::uint64_t end = std::min(total, begin + chunk);
        Extreme local;
        if (budget.mode == OracleBudget::Mode::Enumerate) {
          IdSet ids = unrank_combination(begin, n, m);
          for (std::uint64_t i = begin; i < end; ++i) {
            combine(local, run_latency(alg, ids, params), ids, kind);
            if (i + 1 < end && !next_combination(ids, n))
              throw std::logic_error("oracle: combination stream exhausted early");
          }
        } else {
          for (std::uint64_t i = begin; i < end; ++i) {
            auto rng = rng_stream(budget.seed, i);
            IdSet ids = sample_distinct_ids(m, params, rng);
            combine(local, run_latency(alg, ids, params), ids, kind);
          }
        }
        partial[c] = std::move(local);
      },
      static_cast<unsigned>(chunk_count));

  Extreme result;
  for (const auto& p : partial)
    if (p.valid) combine(result, p.latency, p.witness, kind);
  return OracleResult{result.latency, result.witness,
                      budget.mode == OracleBudget::Mode::Enumerate, total};
}

}  // namespace detail

/// Exact maximum latency over all M-subsets (enumeration mode), or the
/// sampled maximum, which underestimates the true worst case.
inline OracleResult worst_case_oracle(Algorithm alg, int m, const TreeParams& params,
                                      const OracleBudget& budget = OracleBudget::enumerate(),
                                      unsigned workers = 0) {
  return detail::extreme_case_oracle(ExtremeKind::Worst, alg, m, params, budget,
                                     workers);
}

/// Exact minimum latency over all M-subsets, or the sampled minimum.
inline OracleResult best_case_oracle(Algorithm alg, int m, const TreeParams& params,
                                     const OracleBudget& budget = OracleBudget::enumerate(),
                                     unsigned workers = 0) {
  return detail::extreme_case_oracle(ExtremeKind::Best, alg, m, params, budget,
                                     workers);
}

}  // namespace sicqta
