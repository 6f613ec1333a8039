#pragma once

// Monte Carlo harnesses: batch resolution statistics over uniformly drawn
// activations (latency/throughput versus M), and a gated-access arrival
// simulation (packets arriving during a contention resolution interval
// wait for the next one). Trials run in parallel over private RNG
// streams; results are keyed by trial index, so identical configurations
// produce identical output for any worker count.

#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "sicqta/bounds.hpp"
#include "sicqta/parallel.hpp"
#include "sicqta/qta.hpp"
#include "sicqta/sicqta.hpp"

namespace sicqta {

/// Seed for sweep point `index` of a run seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index));
}

// --- batch resolutions ----------------------------------------------------

struct BatchConfig {
  int u = 6;
  int m = 1;
  int trials = 1;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Sicqta;
  std::optional<int> max_cancel_depth;
  unsigned workers = 0;  // 0 = SICQTA_WORKERS / hardware default

  void validate() const {
    TreeParams params(u);
    if (m < 0 || static_cast<std::uint64_t>(m) > params.device_count())
      throw std::invalid_argument("batch: M must satisfy 0 <= M <= 2^u");
    if (trials < 1) throw std::invalid_argument("batch: trials must be >= 1");
  }
};

struct BatchSample {
  int latency = 0;
  double throughput = 0.0;  // M / y
};

struct BatchStats {
  int u = 0;
  int m = 0;
  int trials = 0;
  std::vector<BatchSample> samples;  // indexed by trial
  double mean_latency = 0.0;
  int min_latency = 0;
  int max_latency = 0;
  int p1_latency = 0;
  int p50_latency = 0;
  int p99_latency = 0;
  double mean_throughput = 0.0;
  double min_throughput = 0.0;
  std::int64_t lower_bound = 0;  // perfect-SIC closed forms
  std::int64_t upper_bound = 0;
  int bound_violations = 0;
};

namespace detail {

inline int nearest_rank(const std::vector<int>& sorted, double percentile) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

}  // namespace detail

/// One resolution per trial over M ids drawn uniformly without
/// replacement; deterministic for a fixed seed.
inline BatchStats run_batch(const BatchConfig& cfg) {
  cfg.validate();
  TreeParams params(cfg.u);
  BatchStats stats;
  stats.u = cfg.u;
  stats.m = cfg.m;
  stats.trials = cfg.trials;
  stats.samples.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(
      static_cast<std::uint64_t>(cfg.trials),
      [&](std::uint64_t trial) {
        auto rng = rng_stream(cfg.seed, trial);
        const IdSet ids = sample_distinct_ids(cfg.m, params, rng);
        const ResolutionTrace trace =
            cfg.algorithm == Algorithm::Qta
                ? run_qta(ids, params)
                : run_sicqta(ids, params, cfg.max_cancel_depth);
        const int y = trace.latency();
        stats.samples[trial] =
            BatchSample{y, static_cast<double>(cfg.m) / static_cast<double>(y)};
      },
      cfg.workers);

  const LatencyBounds bounds = latency_bounds(cfg.algorithm, cfg.m, cfg.u);
  stats.lower_bound = bounds.lower;
  stats.upper_bound = bounds.upper;

  std::vector<int> latencies;
  latencies.reserve(stats.samples.size());
  double latency_sum = 0.0;
  double throughput_sum = 0.0;
  stats.min_throughput = stats.samples.front().throughput;
  for (const BatchSample& s : stats.samples) {
    latencies.push_back(s.latency);
    latency_sum += s.latency;
    throughput_sum += s.throughput;
    stats.min_throughput = std::min(stats.min_throughput, s.throughput);
    if (s.latency < bounds.lower || s.latency > bounds.upper)
      ++stats.bound_violations;
  }
  std::sort(latencies.begin(), latencies.end());
  stats.min_latency = latencies.front();
  stats.max_latency = latencies.back();
  stats.p1_latency = detail::nearest_rank(latencies, 1.0);
  stats.p50_latency = detail::nearest_rank(latencies, 50.0);
  stats.p99_latency = detail::nearest_rank(latencies, 99.0);
  stats.mean_latency = latency_sum / static_cast<double>(cfg.trials);
  stats.mean_throughput = throughput_sum / static_cast<double>(cfg.trials);
  return stats;
}

// --- gated continuous arrivals ---------------------------------------------

struct ArrivalConfig {
  int u = 6;
  double lambda = 0.5;  // mean packet arrivals per slot (Poisson)
  std::int64_t horizon = 200000;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Sicqta;
  std::optional<int> max_cancel_depth;
  std::int64_t warmup = -1;  // -1 = 10% of the horizon

  std::int64_t effective_warmup() const {
    return warmup >= 0 ? warmup : horizon / 10;
  }

  void validate() const {
    TreeParams params(u);
    (void)params;
    if (lambda < 0.0) throw std::invalid_argument("arrivals: lambda must be >= 0");
    if (horizon < 1) throw std::invalid_argument("arrivals: horizon must be >= 1");
    if (effective_warmup() >= horizon)
      throw std::invalid_argument("arrivals: horizon must exceed the warmup");
  }
};

struct ArrivalStats {
  double mean_delay = 0.0;   // arrival -> decode, packets arriving after warmup
  double throughput = 0.0;   // decoded packets per slot after warmup
  double mean_cri = 0.0;     // completed CRIs, idle CRIs included
  bool stable = true;
  std::int64_t arrivals = 0;
  std::int64_t decoded = 0;
  std::int64_t queued_at_end = 0;
  std::int64_t in_flight_at_end = 0;
  double mean_backlog = 0.0;
  std::int64_t max_backlog = 0;
  double mean_delay_q2 = 0.0;  // stability diagnostics: mean delay of
  double mean_delay_q4 = 0.0;  // packets decoded in each horizon quarter
};

/// Gated access: each CRI starts with the head-of-line packet of every
/// device backlogged when the previous CRI ended; packets arriving
/// mid-CRI wait. Per-device FIFO queues; empty-backlog slots count as
/// 1-slot idle CRIs.
inline ArrivalStats run_arrivals(const ArrivalConfig& cfg) {
  cfg.validate();
  const TreeParams params(cfg.u);
  const std::uint64_t n = params.device_count();
  const std::int64_t warmup = cfg.effective_warmup();
  auto rng = rng_stream(cfg.seed, 0);
  std::poisson_distribution<int> arrivals_per_slot(cfg.lambda);
  std::uniform_int_distribution<std::uint64_t> device_pick(0, n - 1);

  std::map<DeviceId, std::deque<std::int64_t>> queues;  // arrival slots
  std::int64_t backlog = 0;  // queued packets not yet contending

  ArrivalStats stats;
  double delay_sum = 0.0;
  std::int64_t delay_count = 0;
  std::int64_t decoded_after_warmup = 0;
  double cri_sum = 0.0;
  std::int64_t cri_count = 0;
  double backlog_sum = 0.0;
  double q2_sum = 0.0, q4_sum = 0.0;
  std::int64_t q2_count = 0, q4_count = 0;

  const std::int64_t q2_lo = cfg.horizon / 4, q2_hi = cfg.horizon / 2;
  const std::int64_t q4_lo = 3 * (cfg.horizon / 4);

  // Stability diagnostics: packets grouped by the quarter they were
  // decoded in, so a delay drift across the horizon shows up as a
  // quarter-over-quarter ratio.
  auto record_quarters = [&](std::int64_t arrival, std::int64_t decode_slot) {
    const double delay = static_cast<double>(decode_slot - arrival);
    if (decode_slot > q2_lo && decode_slot <= q2_hi) {
      q2_sum += delay;
      ++q2_count;
    } else if (decode_slot > q4_lo && decode_slot <= cfg.horizon) {
      q4_sum += delay;
      ++q4_count;
    }
  };

  std::int64_t slot = 1;
  while (slot <= cfg.horizon) {
    // Snapshot the contenders for the CRI starting at this slot.
    IdSet contenders;
    for (const auto& [id, q] : queues)
      if (!q.empty()) contenders.push_back(id);

    std::int64_t cri_len = 1;
    if (!contenders.empty()) {
      const ResolutionTrace trace =
          cfg.algorithm == Algorithm::Qta
              ? run_qta(contenders, params)
              : run_sicqta(contenders, params, cfg.max_cancel_depth);
      cri_len = trace.latency();
      for (const auto& [id, decode_idx] : trace.decoded) {
        const std::int64_t decode_slot = slot + decode_idx - 1;
        auto& q = queues[id];
        if (decode_slot <= cfg.horizon) {
          const std::int64_t arrival = q.front();
          q.pop_front();
          --backlog;
          ++stats.decoded;
          if (decode_slot > warmup) ++decoded_after_warmup;
          record_quarters(arrival, decode_slot);
          if (arrival > warmup) {
            delay_sum += static_cast<double>(decode_slot - arrival);
            ++delay_count;
          }
        } else {
          ++stats.in_flight_at_end;  // truncated by the horizon
          q.pop_front();  // keep it out of the queued count
          --backlog;
        }
      }
    }

    const std::int64_t cri_end = slot + cri_len - 1;
    if (cri_end <= cfg.horizon) {
      cri_sum += static_cast<double>(cri_len);
      ++cri_count;
    }

    // Arrivals during the CRI queue up for the next one.
    for (std::int64_t t = slot; t <= std::min(cri_end, cfg.horizon); ++t) {
      const int k = arrivals_per_slot(rng);
      for (int i = 0; i < k; ++i) {
        const auto dev = static_cast<DeviceId>(device_pick(rng));
        queues[dev].push_back(t);
        ++backlog;
        ++stats.arrivals;
      }
      backlog_sum += static_cast<double>(backlog);
      stats.max_backlog = std::max(stats.max_backlog, backlog);
    }
    slot = cri_end + 1;
  }

  for (const auto& [id, q] : queues)
    stats.queued_at_end += static_cast<std::int64_t>(q.size());

  stats.mean_delay = delay_count > 0 ? delay_sum / static_cast<double>(delay_count) : 0.0;
  stats.throughput = static_cast<double>(decoded_after_warmup) /
                     static_cast<double>(cfg.horizon - warmup);
  stats.mean_cri = cri_count > 0 ? cri_sum / static_cast<double>(cri_count) : 0.0;
  stats.mean_backlog = backlog_sum / static_cast<double>(cfg.horizon);
  stats.mean_delay_q2 = q2_count > 0 ? q2_sum / static_cast<double>(q2_count) : 0.0;
  stats.mean_delay_q4 = q4_count > 0 ? q4_sum / static_cast<double>(q4_count) : 0.0;
  stats.stable = q4_count == 0 || stats.mean_delay_q4 <= 2.0 * stats.mean_delay_q2;
  return stats;
}

// --- sweeps -----------------------------------------------------------------

/// One batch per M value; point seeds derive from (seed, point index).
inline std::vector<BatchStats> sweep_batch(const BatchConfig& base,
                                           const std::vector<int>& ms) {
  if (ms.empty()) throw std::invalid_argument("sweep: empty M range");
  std::vector<BatchStats> rows;
  rows.reserve(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    BatchConfig cfg = base;
    cfg.m = ms[i];
    cfg.seed = derive_seed(base.seed, i);
    rows.push_back(run_batch(cfg));
  }
  return rows;
}

/// One arrival simulation per lambda; point seeds derive from
/// (seed, point index).
inline std::vector<ArrivalStats> sweep_arrivals(const ArrivalConfig& base,
                                                const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("sweep: empty lambda range");
  std::vector<ArrivalStats> rows;
  rows.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    ArrivalConfig cfg = base;
    cfg.lambda = lambdas[i];
    cfg.seed = derive_seed(base.seed, i);
    rows.push_back(run_arrivals(cfg));
  }
  return rows;
}

/// Largest arrival rate the gated simulation sustains with stable delay,
/// located by bisection to the given resolution. Stability is judged by
/// the quarter-delay test of run_arrivals at the configured horizon.
inline double estimate_stability_threshold(ArrivalConfig base, double lo, double hi,
                                           double resolution = 0.005) {
  if (!(lo < hi) || resolution <= 0.0)
    throw std::invalid_argument("threshold: need lo < hi and resolution > 0");
  auto stable_at = [&](double lambda) {
    ArrivalConfig cfg = base;
    cfg.lambda = lambda;
    cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(lambda * 1e6));
    return run_arrivals(cfg).stable;
  };
  if (!stable_at(lo)) return lo;
  double good = lo, bad = hi;
  while (bad - good > resolution) {
    const double mid = 0.5 * (good + bad);
    if (stable_at(mid))
      good = mid;
    else
      bad = mid;
  }
  return good;
}

}  // namespace sicqta
