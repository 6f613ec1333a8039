#pragma once

// Closed-form worst/best-case latency bounds for QTA and SICQTA, and the
// skipped-slot decomposition connecting them. All logarithms are base 2.
// The raw formulas are defined for M >= 2 and throw below that; the
// latency_bounds helper short-circuits M in {0, 1} to the exact single
// slot value.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sicqta {

enum class Algorithm { Qta, Sicqta };

inline const char* algorithm_name(Algorithm a) {
  return a == Algorithm::Qta ? "qta" : "sicqta";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "qta") return Algorithm::Qta;
  if (s == "sicqta") return Algorithm::Sicqta;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected qta|sicqta)");
}

namespace detail {

inline int floor_log2(std::uint64_t m) {
  return std::bit_width(m) - 1;  // m >= 1
}

inline void require_m_range(std::int64_t m, int u, std::int64_t min_m,
                            const char* what) {
  if (u < 1 || u > 62) throw std::invalid_argument(std::string(what) + ": bad u");
  if (m < min_m)
    throw std::invalid_argument(std::string(what) + ": M must be >= " +
                                std::to_string(min_m));
  if (m > (std::int64_t{1} << u))
    throw std::invalid_argument(std::string(what) + ": M exceeds 2^u");
}

}  // namespace detail

/// Loose upper bound M * (u + 2 - log2 M), real-valued log, floored to
/// whole slots. Looser than qta_upper for large M and can cross it; kept
/// for reference, never used in validation.
inline std::int64_t qta_upper_loose(std::int64_t m, int u) {
  detail::require_m_range(m, u, 1, "qta_upper_loose");
  const auto um = static_cast<std::uint64_t>(m);
  if ((um & (um - 1)) == 0) {
    return m * (u + 2 - detail::floor_log2(um));  // exact at powers of two
  }
  const long double x =
      static_cast<long double>(m) * (u + 2 - std::log2(static_cast<long double>(m)));
  const long double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9L)
    throw std::logic_error("qta_upper_loose: log term too close to an integer");
  return static_cast<std::int64_t>(std::floor(x));
}

/// Tight upper bound floor(M/2) * 2 * (u + 1 - floor(log2(M/2))) - 1.
inline std::int64_t qta_upper(std::int64_t m, int u) {
  detail::require_m_range(m, u, 2, "qta_upper");
  const std::int64_t half = m / 2;
  const int log_half = detail::floor_log2(static_cast<std::uint64_t>(m)) - 1;
  return half * 2 * (u + 1 - log_half) - 1;
}

/// Lower bound 2M - 1.
inline std::int64_t qta_lower(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("qta_lower: M must be >= 1");
  return 2 * m - 1;
}

/// Slots SICQTA saves against the QTA worst case, split into skipped
/// idles and cancelled slots.
struct SkippedSlots {
  std::int64_t idle = 0;
  std::int64_t cancel = 0;
  std::int64_t total() const { return idle + cancel; }
};

inline SkippedSlots skipped_slots(std::int64_t m, int u) {
  detail::require_m_range(m, u, 2, "skipped_slots");
  const int log_m = detail::floor_log2(static_cast<std::uint64_t>(m));
  SkippedSlots s;
  s.idle = (m / 2) * (u - log_m);  // u - 1 - floor(log2(M/2))
  for (int i = 1; i <= log_m; ++i) s.cancel += m >> i;
  return s;
}

/// Upper bound floor(M/2)*(u+4-floor(log2 M)) - 1 - sum floor(M/2^i).
inline std::int64_t sicqta_upper(std::int64_t m, int u) {
  detail::require_m_range(m, u, 2, "sicqta_upper");
  const int log_m = detail::floor_log2(static_cast<std::uint64_t>(m));
  std::int64_t cancel = 0;
  for (int i = 1; i <= log_m; ++i) cancel += m >> i;
  return (m / 2) * (u + 4 - log_m) - 1 - cancel;
}

/// Lower bound: at least one slot per active device, and the root slot
/// is always consumed.
inline std::int64_t sicqta_lower(std::int64_t m) {
  if (m < 0) throw std::invalid_argument("sicqta_lower: M must be >= 0");
  return m > 1 ? m : 1;
}

struct LatencyBounds {
  std::int64_t lower = 1;
  std::int64_t upper = 1;
};

/// Bound sandwich for a resolution with M active devices. M in {0, 1}
/// resolves in exactly one slot; the closed forms cover M >= 2.
inline LatencyBounds latency_bounds(Algorithm alg, std::int64_t m, int u) {
  if (m <= 1) return {1, 1};
  if (alg == Algorithm::Qta) return {qta_lower(m), qta_upper(m, u)};
  return {sicqta_lower(m), sicqta_upper(m, u)};
}

/// All closed-form bound values for one (M, u) pair.
struct BoundsRow {
  std::int64_t m = 0;
  int u = 0;
  std::int64_t qta_lower = 0;
  std::int64_t qta_upper_loose = 0;
  std::int64_t qta_upper = 0;
  std::int64_t sic_lower = 0;
  std::int64_t sic_upper = 0;
  std::int64_t skip_total = 0;
  std::int64_t skip_idle = 0;
  std::int64_t skip_cancel = 0;
};

inline BoundsRow bounds_row(std::int64_t m, int u) {
  detail::require_m_range(m, u, 2, "bounds_row");
  const SkippedSlots s = skipped_slots(m, u);
  return BoundsRow{m,
                   u,
                   qta_lower(m),
                   qta_upper_loose(m, u),
                   qta_upper(m, u),
                   sicqta_lower(m),
                   sicqta_upper(m, u),
                   s.total(),
                   s.idle,
                   s.cancel};
}

}  // namespace sicqta
