#pragma once

// Density bookkeeping along directed streams: single-realization traces with
// checkpoints, seeded Monte Carlo over independent trials, and the coupled
// scan of the self-referential construction.
//
// Determinism contract: trial i always runs on the generator seeded with
// mix(seed, i), and reductions run in trial order with compensated
// summation, so results are bit-identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "randkol/core.hpp"
#include "randkol/errors.hpp"
#include "randkol/kahan.hpp"
#include "randkol/rng.hpp"
#include "randkol/sources.hpp"
#include "randkol/types.hpp"

namespace randkol {

struct TraceCheckpoint {
  std::uint64_t position = 0;
  std::uint64_t count_lo = 0;
  std::uint64_t count_hi = 0;
  double density_lo = 0.0;
  friend bool operator==(const TraceCheckpoint&, const TraceCheckpoint&) = default;
};

struct DensityTrace {
  std::vector<TraceCheckpoint> checkpoints;
  friend bool operator==(const DensityTrace&, const DensityTrace&) = default;
};

// Geometric checkpoint grid: 1024, 2048, ... doubling up to length, plus the
// final position.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t length) {
  if (length < 1) throw DomainError("default_checkpoints: length must be at least 1");
  std::vector<std::uint64_t> grid;
  for (std::uint64_t c = 1024; c < length; c *= 2) grid.push_back(c);
  grid.push_back(length);
  return grid;
}

namespace detail {

inline std::vector<std::uint64_t> normalized_checkpoints(
    std::span<const std::uint64_t> checkpoints, std::uint64_t length) {
  if (checkpoints.empty()) {
    throw DomainError("checkpoint list must be nonempty");
  }
  std::vector<std::uint64_t> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (cps.front() < 1 || cps.back() > length) {
    throw DomainError("checkpoints must lie in [1, length]");
  }
  return cps;
}

// Runs fn(trial) for trial = 0..trials-1, sharded over up to `threads`
// workers, and returns the results indexed by trial. Work items are
// independent, so the outcome does not depend on the shard count.
template <class F>
std::vector<double> run_trials(std::uint64_t trials, unsigned threads, F&& fn) {
  std::vector<double> results(trials, 0.0);
  if (threads <= 1 || trials <= 1) {
    for (std::uint64_t i = 0; i < trials; ++i) results[i] = fn(i);
    return results;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::uint64_t lo = trials * w / workers;
      const std::uint64_t hi = trials * (w + 1) / workers;
      try {
        for (std::uint64_t i = lo; i < hi; ++i) results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

// Streams `length` letters of the directed sequence and reports the count of
// the alphabet's lo (and hi) letters at the terminal position.
inline std::pair<std::uint64_t, std::uint64_t> terminal_counts(
    const SourceSpec& spec, std::uint64_t length, Seed seed,
    std::uint64_t pending_budget_bytes) {
  DirectedStream<SourceState> stream(SourceState(spec, seed), pending_budget_bytes);
  const Alphabet alpha = spec.alphabet();
  const Letter lo = alpha.lo();
  const Letter hi = alpha.hi();
  std::uint64_t count_lo = 0;
  std::uint64_t count_hi = 0;
  for (std::uint64_t i = 0; i < length; ++i) {
    const Letter x = *stream.next();
    count_lo += (x == lo);
    count_hi += (x == hi);
  }
  return {count_lo, count_hi};
}

}  // namespace detail

// Threads to use: an explicit request wins; 0 falls back to the
// RANDKOL_THREADS environment variable, then to the hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RANDKOL_THREADS")) {
    const unsigned long v = std::strtoul(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(std::min(v, 1024ul));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Single-realization density trace along a directed stream.
inline DensityTrace density_trace(const SourceSpec& spec, std::uint64_t length,
                                  std::span<const std::uint64_t> checkpoints, Seed seed,
                                  std::uint64_t pending_budget_bytes = kDefaultPendingBudgetBytes) {
  if (length < 1) throw DomainError("density_trace: length must be at least 1");
  const auto cps = detail::normalized_checkpoints(checkpoints, length);
  DirectedStream<SourceState> stream(SourceState(spec, seed), pending_budget_bytes);
  const Alphabet alpha = spec.alphabet();
  const Letter lo = alpha.lo();
  const Letter hi = alpha.hi();
  DensityTrace trace;
  trace.checkpoints.reserve(cps.size());
  std::uint64_t count_lo = 0;
  std::uint64_t count_hi = 0;
  std::size_t next_cp = 0;
  const std::uint64_t last = cps.back();
  for (std::uint64_t pos = 1; pos <= last; ++pos) {
    const Letter x = *stream.next();
    count_lo += (x == lo);
    count_hi += (x == hi);
    if (pos == cps[next_cp]) {
      trace.checkpoints.push_back(TraceCheckpoint{
          pos, count_lo, count_hi, static_cast<double>(count_lo) / static_cast<double>(pos)});
      ++next_cp;
    }
  }
  return trace;
}

// Aggregate of a Monte Carlo experiment over per-trial statistics in [0,1].
struct MCResult {
  std::uint64_t trials = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  Seed seed{};
};

namespace detail {

inline MCResult reduce_trials(const std::vector<double>& values, Seed seed) {
  MCResult r;
  r.trials = values.size();
  r.seed = seed;
  KahanSum sum, sum_sq;
  for (double v : values) {
    sum.add(v);
    sum_sq.add(v * v);
  }
  r.sum = sum.value();
  r.sum_sq = sum_sq.value();
  if (r.trials > 0) {
    const double n = static_cast<double>(r.trials);
    r.mean = r.sum / n;
    const double variance = std::max(0.0, r.sum_sq / n - r.mean * r.mean);
    r.std_error = std::sqrt(variance / n);
  }
  return r;
}

}  // namespace detail

// Pools two aggregates of the same experiment family. Count fields combine
// associatively and commutatively; derived statistics are recomputed.
inline MCResult merge(const MCResult& x, const MCResult& y) {
  MCResult r;
  r.trials = x.trials + y.trials;
  r.sum = x.sum + y.sum;
  r.sum_sq = x.sum_sq + y.sum_sq;
  r.seed = x.trials > 0 ? x.seed : y.seed;
  if (r.trials > 0) {
    const double n = static_cast<double>(r.trials);
    r.mean = r.sum / n;
    const double variance = std::max(0.0, r.sum_sq / n - r.mean * r.mean);
    r.std_error = std::sqrt(variance / n);
  }
  return r;
}

// Monte Carlo estimate of the terminal lo-letter density at `length`. Trial
// i streams an independent realization seeded with mix(seed, i). When
// `terminal_lo_counts` is given it receives the per-trial lo counts.
inline MCResult mc_density(const SourceSpec& spec, std::uint64_t length,
                           std::uint64_t trials, Seed seed, unsigned threads = 1,
                           std::vector<std::uint64_t>* terminal_lo_counts = nullptr,
                           std::uint64_t pending_budget_bytes = kDefaultPendingBudgetBytes) {
  if (length < 1) throw DomainError("mc_density: length must be at least 1");
  if (trials < 1) throw DomainError("mc_density: trials must be at least 1");
  std::vector<std::uint64_t> counts(trials, 0);
  const auto densities = detail::run_trials(trials, threads, [&](std::uint64_t i) {
    const auto [lo_count, hi_count] =
        detail::terminal_counts(spec, length, mix(seed, i), pending_budget_bytes);
    (void)hi_count;
    counts[i] = lo_count;
    return static_cast<double>(lo_count) / static_cast<double>(length);
  });
  if (terminal_lo_counts) *terminal_lo_counts = std::move(counts);
  return detail::reduce_trials(densities, seed);
}

// Monte Carlo estimate of P(X_n = lo): trial i contributes the indicator of
// the n-th letter of an independent realization.
inline MCResult mc_pointwise(const SourceSpec& spec, std::uint64_t n,
                             std::uint64_t trials, Seed seed, unsigned threads = 1,
                             std::uint64_t pending_budget_bytes = kDefaultPendingBudgetBytes) {
  if (n < 1) throw DomainError("mc_pointwise: n must be at least 1");
  if (trials < 1) throw DomainError("mc_pointwise: trials must be at least 1");
  const Letter lo = spec.alphabet().lo();
  const auto hits = detail::run_trials(trials, threads, [&](std::uint64_t i) {
    DirectedStream<SourceState> stream(SourceState(spec, mix(seed, i)),
                                       pending_budget_bytes);
    Letter x = Letter::unchecked(0);
    for (std::uint64_t k = 0; k < n; ++k) x = *stream.next();
    return x == lo ? 1.0 : 0.0;
  });
  return detail::reduce_trials(hits, seed);
}

// --- Self-referential construction scan --------------------------------------

// Snapshot of the coupled pair after `step` directing letters: counts over
// the directing prefix T, over the directed word O (all complete blocks),
// and over the first `step` letters of O (the block-length prefix).
struct SelfRefCheckpoint {
  std::uint64_t step = 0;
  std::uint64_t t_count1 = 0;
  std::uint64_t o_length = 0;
  std::uint64_t o_count1 = 0;
  std::uint64_t o_count2 = 0;
  std::uint64_t prefix_count1 = 0;
  std::uint64_t prefix_count2 = 0;

  double t_density1() const {
    return static_cast<double>(t_count1) / static_cast<double>(step);
  }
  double o_density1() const {
    return static_cast<double>(o_count1) / static_cast<double>(o_length);
  }
  // Residual of the density identity dT1 = dO2 + dO1/2 evaluated over the
  // first `step` letters of O; bounded by 1/step exactly.
  double balance_residual() const {
    const double n = static_cast<double>(step);
    return (static_cast<double>(t_count1) - static_cast<double>(prefix_count2) -
            0.5 * static_cast<double>(prefix_count1)) /
           n;
  }
  // Residual of the density identity dO1 = (3 dT1 - 1) / (2 dT1); NaN while
  // the directing prefix has no 1s.
  double growth_residual() const {
    const double dt = t_density1();
    if (dt == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return o_density1() - (3.0 * dt - 1.0) / (2.0 * dt);
  }
};

struct SelfRefTrace {
  std::vector<SelfRefCheckpoint> checkpoints;
  // First step at which a structural identity failed; 0 = never.
  std::uint64_t first_coupling_violation = 0;   // |O|_2 == |T|_2 + 1
  std::uint64_t first_counting_violation = 0;   // 1s-count identity constant in {0, 1/2}
};

// Runs the coupled self-referential construction for n steps, verifying the
// structural identities at every step and snapshotting at the checkpoints
// (given in directing steps).
inline SelfRefTrace selfref_trace(std::uint64_t n,
                                  std::span<const std::uint64_t> checkpoints) {
  if (n < 1) throw DomainError("selfref_trace: n must be at least 1");
  const auto cps = detail::normalized_checkpoints(checkpoints, n);

  detail::LetterQueue ahead{Alphabet(Letter(1), Letter(2))};
  ahead.push(Letter::unchecked(2));  // O position 2; position 1 described block 1

  // After the seed step: T = (2), O = (2,2), prefix = first 1 letter of O.
  std::uint64_t t_count1 = 0, t_count2 = 1;
  std::uint64_t o_length = 2, o_count1 = 0, o_count2 = 2;
  std::uint64_t prefix_count1 = 0, prefix_count2 = 1;
  Letter digit = Letter::unchecked(1);

  SelfRefTrace trace;
  trace.checkpoints.reserve(cps.size());
  std::size_t next_cp = 0;

  auto verify_and_snapshot = [&](std::uint64_t step) {
    if (trace.first_coupling_violation == 0 && o_count2 != t_count2 + 1) {
      trace.first_coupling_violation = step;
    }
    // Twice the counting-identity constant: 2*C = 2|T|_1 - 2(|pfx|_2 - 1) - |pfx|_1
    // must be 0 or 1 (the alternating fill contributes ceil/floor of half).
    const std::int64_t twice_c = 2 * static_cast<std::int64_t>(t_count1) -
                                 2 * (static_cast<std::int64_t>(prefix_count2) - 1) -
                                 static_cast<std::int64_t>(prefix_count1);
    if (trace.first_counting_violation == 0 && twice_c != 0 && twice_c != 1) {
      trace.first_counting_violation = step;
    }
    if (next_cp < cps.size() && step == cps[next_cp]) {
      trace.checkpoints.push_back(SelfRefCheckpoint{step, t_count1, o_length, o_count1,
                                                    o_count2, prefix_count1,
                                                    prefix_count2});
      ++next_cp;
    }
  };

  verify_and_snapshot(1);
  for (std::uint64_t step = 2; step <= n; ++step) {
    const Letter block_length = ahead.pop();
    if (block_length.value() == 1) {
      ++prefix_count1;
    } else {
      ++prefix_count2;
    }
    if (block_length.value() == 2) {
      ++t_count1;
      o_count1 += 2;
      o_length += 2;
      ahead.push(Letter::unchecked(1));
      ahead.push(Letter::unchecked(1));
    } else {
      if (digit.value() == 1) {
        ++t_count1;
        ++o_count1;
      } else {
        ++t_count2;
        ++o_count2;
      }
      ++o_length;
      ahead.push(digit);
      digit = Letter::unchecked(static_cast<std::uint8_t>(3 - digit.value()));
    }
    verify_and_snapshot(step);
  }
  return trace;
}

// Terminal densities and identity residuals of the coupled pair at step n.
struct SelfRefDensities {
  double t_density1 = 0.0;
  double o_density1 = 0.0;
  double growth_residual = 0.0;   // dO1 - (3 dT1 - 1)/(2 dT1); NaN when dT1 = 0
  double balance_residual = 0.0;  // dT1 - (dO2 + dO1/2) over the first n letters of O
};

inline SelfRefDensities selfref_densities(std::uint64_t n) {
  const std::uint64_t cp[] = {n};
  const SelfRefTrace trace = selfref_trace(n, cp);
  const SelfRefCheckpoint& last = trace.checkpoints.back();
  return SelfRefDensities{last.t_density1(), last.o_density1(), last.growth_residual(),
                          last.balance_residual()};
}

}  // namespace randkol
