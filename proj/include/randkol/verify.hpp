#pragma once

// Self-check registry: every library module contributes named invariant
// checks, run together by `randkol verify`. Checks are deterministic (all
// randomness flows from constants pinned here) and sized so the full suite
// stays in the tens of seconds; fast mode trims sample sizes, not coverage.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "randkol/core.hpp"
#include "randkol/csv.hpp"
#include "randkol/errors.hpp"
#include "randkol/exact.hpp"
#include "randkol/kahan.hpp"
#include "randkol/rng.hpp"
#include "randkol/sources.hpp"
#include "randkol/stats.hpp"
#include "randkol/types.hpp"

namespace randkol {

struct VerifyOptions {
  bool fast = false;
  unsigned threads = 1;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // empty on pass
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> results;
  int failures = 0;
  double seconds = 0.0;
};

// --- Grid helpers (shared with the acceptance harness) -----------------------

// Largest |closed form - enumeration| for P(X_n = lo) over the given
// probability list and n-range.
inline double max_gap_closed_vs_oracle(const std::vector<double>& ps, Alphabet alpha,
                                       unsigned n_lo, unsigned n_hi) {
  double worst = 0.0;
  for (double p : ps) {
    for (unsigned n = n_lo; n <= n_hi; ++n) {
      const double closed = p_xn_closed(Probability(p), n, alpha);
      const double oracle = p_xn_enum(Probability(p), n, alpha, alpha.lo());
      worst = std::max(worst, std::abs(closed - oracle));
    }
  }
  return worst;
}

// Largest |corr_closed - corr_enum| over m in [1, m_hi], n in [m+2, n_hi].
inline double max_gap_correlation(const std::vector<double>& ps, unsigned m_hi,
                                  unsigned n_hi) {
  double worst = 0.0;
  for (double p : ps) {
    for (unsigned m = 1; m <= m_hi; ++m) {
      for (unsigned n = m + 2; n <= n_hi; ++n) {
        const double closed = corr_closed(Probability(p), m, n);
        const double oracle = corr_enum(Probability(p), m, n);
        worst = std::max(worst, std::abs(closed - oracle));
      }
    }
  }
  return worst;
}

// Largest |P(X_m=2 and X_n=1) - p*P(X_m=2)| over the same grid: for n at
// least two positions past m, the joint law factorizes through X_m.
inline double max_gap_joint_factorization(const std::vector<double>& ps, unsigned m_hi,
                                          unsigned n_hi) {
  const Alphabet alpha{Letter(1), Letter(2)};
  double worst = 0.0;
  for (double p : ps) {
    for (unsigned m = 1; m <= m_hi; ++m) {
      const double p_m2 = p_xn_enum(Probability(p), m, alpha, Letter(2));
      for (unsigned n = m + 2; n <= n_hi; ++n) {
        const JointTable table = joint_enum_table(Probability(p), m, n);
        const double joint = table.cell[1][0];  // X_m = 2 and X_n = 1
        worst = std::max(worst, std::abs(joint - p * p_m2));
      }
    }
  }
  return worst;
}

namespace verify_detail {

inline constexpr double kTol = 1e-12;

inline std::string ok() { return std::string(); }

template <class... Parts>
std::string fail(const Parts&... parts) {
  std::ostringstream out;
  out.precision(17);
  (out << ... << parts);
  return out.str();
}

inline Word random_word(Xoshiro256StarStar& rng, std::size_t len,
                        const std::vector<Letter>& letters) {
  Word w;
  w.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    w.push_back(letters[static_cast<std::size_t>(rng.next() % letters.size())]);
  }
  return w;
}

inline Word stream_prefix(const SourceSpec& spec, Seed seed, std::uint64_t n) {
  DirectedStream<SourceState> stream{SourceState(spec, seed)};
  Word w;
  w.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) w.push_back(*stream.next());
  return w;
}

// --- core ---------------------------------------------------------------

inline std::string check_prefix_monotonicity(const VerifyOptions& opt) {
  Xoshiro256StarStar rng{Seed{0x9d5c0f341u}};
  const int samples = opt.fast ? 120 : 400;
  const std::vector<std::vector<Letter>> pools = {
      {Letter(1), Letter(2)}, {Letter(1), Letter(3)}, {Letter(2), Letter(3)},
      {Letter(1), Letter(2), Letter(3)}};
  for (int s = 0; s < samples; ++s) {
    const auto& pool = pools[static_cast<std::size_t>(s) % pools.size()];
    const std::size_t len = 1 + rng.next() % 16;
    Word t = random_word(rng, len, pool);
    const Word base = direct_finite(t);
    Word extended = t;
    extended.push_back(pool[static_cast<std::size_t>(rng.next() % pool.size())]);
    const Word grown = direct_finite(extended);
    if (!base.is_prefix_of(grown)) {
      return fail("direct_finite(", t.to_string(), ") not a prefix after extending to ",
                  extended.to_string());
    }
  }
  return ok();
}

inline std::string check_length_lower_bound(const VerifyOptions& opt) {
  Xoshiro256StarStar rng{Seed{0x51a7b3du}};
  const int samples = opt.fast ? 150 : 500;
  const std::vector<Letter> pool = {Letter(1), Letter(2), Letter(3), Letter(5)};
  for (int s = 0; s < samples; ++s) {
    const std::size_t len = 1 + rng.next() % 16;
    Word t = random_word(rng, len, pool);
    if (direct_finite(t).size() < t.size()) {
      return fail("output shorter than director for ", t.to_string());
    }
  }
  return ok();
}

inline std::string check_stream_batch_equivalence(const VerifyOptions& opt) {
  const std::uint64_t n = opt.fast ? 1000 : 100000;
  const SourceSpec specs[] = {
      SourceSpec::classic(Letter(1), Letter(2)),
      SourceSpec::classic(Letter(1), Letter(3)),
      SourceSpec::periodic(Word{1, 2, 2}),
      SourceSpec::iid(Probability(0.4), Letter(1), Letter(2)),
      SourceSpec::markov(Probability(0.25), Letter(1), Letter(3), Letter(3)),
  };
  for (const SourceSpec& spec : specs) {
    const Seed seed{42};
    DirectedStream<SourceState> stream{SourceState(spec, seed)};
    Word emitted;
    emitted.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) emitted.push_back(*stream.next());
    const std::uint64_t consumed = stream.source().position();
    SourceState replay(spec, seed);
    Word director;
    director.reserve(consumed);
    for (std::uint64_t i = 0; i < consumed; ++i) director.push_back(replay.next());
    const Word batch = direct_finite(director);
    if (batch.size() < n || !emitted.is_prefix_of(batch)) {
      return fail("stream/batch mismatch for ", spec.to_string());
    }
  }
  return ok();
}

inline std::string check_delta_fixed_point(const VerifyOptions& opt) {
  const std::uint64_t m = opt.fast ? 1000 : 10000;
  const Word w =
      stream_prefix(SourceSpec::classic(Letter(1), Letter(2)), Seed{0}, m);
  Word lengths = delta(w);
  if (lengths.size() < 2) return fail("degenerate run encoding");
  // The final run may be truncated by the cut at m; compare complete runs only.
  const Word complete = lengths.prefix(lengths.size() - 1);
  if (!complete.is_prefix_of(w)) {
    return fail("run-length image is not a prefix of the sequence itself");
  }
  return ok();
}

inline std::string check_determination(const VerifyOptions& opt) {
  Xoshiro256StarStar rng{Seed{0xfeed1234u}};
  const int samples = opt.fast ? 100 : 300;
  const std::vector<std::vector<Letter>> pools = {{Letter(1), Letter(2)},
                                                  {Letter(1), Letter(3)}};
  for (int s = 0; s < samples; ++s) {
    const auto& pool = pools[static_cast<std::size_t>(s) % pools.size()];
    const std::size_t len = 3 + rng.next() % 12;
    const Word t = random_word(rng, len, pool);
    const Word head = direct_finite(t).prefix(len);
    for (int v = 0; v < 2; ++v) {
      Word extended = t;
      const std::size_t extra = 1 + rng.next() % 6;
      for (std::size_t i = 0; i < extra; ++i) {
        extended.push_back(pool[static_cast<std::size_t>(rng.next() % pool.size())]);
      }
      if (direct_finite(extended).prefix(len) != head) {
        return fail("first ", len, " letters changed when extending ", t.to_string());
      }
    }
  }
  return ok();
}

// --- sources ------------------------------------------------------------

inline std::string check_selfref_identities(const VerifyOptions& opt) {
  const std::uint64_t n = opt.fast ? 1000 : 100000;
  const std::uint64_t cp[] = {n};
  const SelfRefTrace trace = selfref_trace(n, cp);
  if (trace.first_coupling_violation != 0) {
    return fail("hi-letter coupling |O|_2 = |T|_2 + 1 failed at step ",
                trace.first_coupling_violation);
  }
  if (trace.first_counting_violation != 0) {
    return fail("counting identity left {0, 1/2} at step ",
                trace.first_counting_violation);
  }
  return ok();
}

inline std::string check_markov_flip_frequency(const VerifyOptions& opt) {
  const std::uint64_t steps = opt.fast ? 100000 : 1000000;
  const double p = 0.3;
  SourceState src(SourceSpec::markov(Probability(p), Letter(1), Letter(2), Letter(1)),
                  Seed{11});
  Letter prev = src.next();
  std::uint64_t flips = 0;
  for (std::uint64_t i = 1; i < steps; ++i) {
    const Letter cur = src.next();
    flips += (cur != prev);
    prev = cur;
  }
  const double freq = static_cast<double>(flips) / static_cast<double>(steps - 1);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(steps - 1));
  if (std::abs(freq - p) > 3 * sigma) {
    return fail("flip frequency ", freq, " outside 3 sigma of ", p);
  }
  return ok();
}

inline std::string check_seed_reproducibility(const VerifyOptions& opt) {
  const std::uint64_t n = opt.fast ? 2000 : 10000;
  const SourceSpec specs[] = {
      SourceSpec::iid(Probability(0.6), Letter(1), Letter(3)),
      SourceSpec::markov(Probability(0.2), Letter(1), Letter(2), Letter(2)),
      SourceSpec::selfref(),
  };
  for (const SourceSpec& spec : specs) {
    const Word a = stream_prefix(spec, Seed{99}, n);
    const Word b = stream_prefix(spec, Seed{99}, n);
    if (a != b) return fail("same seed diverged for ", spec.to_string());
  }
  return ok();
}

inline std::string check_selfref_direct_consistency(const VerifyOptions& opt) {
  const std::uint64_t n = opt.fast ? 500 : 10000;
  const auto [director, output] = selfref_build(n);
  if (direct_finite(director) != output) {
    return fail("rebuilding from the directing prefix does not reproduce the output");
  }
  return ok();
}

// --- exact ----------------------------------------------------------------

inline std::string check_partition(const VerifyOptions& opt) {
  const unsigned n_hi = opt.fast ? 10 : 16;
  for (unsigned n = 1; n <= n_hi; ++n) {
    const SnkTable table = snk_partition(n);
    if (table.total() != (std::uint64_t{1} << n)) {
      return fail("class sizes at n=", n, " sum to ", table.total());
    }
    if (n >= 2 && (table.sizes[n] != 2 || table.sizes[n - 1] != 2)) {
      return fail("boundary classes at n=", n, " have sizes ", table.sizes[n], ",",
                  table.sizes[n - 1]);
    }
  }
  // Cross-check the fast scanner against the per-prefix oracle tuple by tuple.
  const unsigned n_cross = opt.fast ? 8 : 10;
  for (unsigned n = 2; n <= n_cross; ++n) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Word t;
      t.reserve(n);
      for (unsigned i = 0; i < n; ++i) {
        t.push_back(Letter((mask >> (n - 1 - i)) & 1 ? 2 : 1));
      }
      std::uint8_t buf[kMaxEnumN];
      for (unsigned i = 0; i < n; ++i) buf[i] = t[i].value();
      if (detail::determination_step(buf, n) != snk_index(t)) {
        return fail("scanner disagrees with oracle on ", t.to_string());
      }
    }
  }
  // The exact boundary tuples: all-lo (and one-hi-tail) determine at n;
  // a hi at position n-1 determines at n-1.
  for (unsigned n = 3; n <= n_hi; ++n) {
    Word all_lo, hi_tail, hi_then_lo, hi_then_hi;
    for (unsigned i = 0; i < n; ++i) all_lo.push_back(Letter(1));
    hi_tail = all_lo.prefix(n - 1);
    hi_tail.push_back(Letter(2));
    hi_then_lo = all_lo.prefix(n - 2);
    hi_then_lo.push_back(Letter(2));
    hi_then_hi = hi_then_lo;
    hi_then_lo.push_back(Letter(1));
    hi_then_hi.push_back(Letter(2));
    if (snk_index(all_lo) != n || snk_index(hi_tail) != n) {
      return fail("terminal class tuples misclassified at n=", n);
    }
    if (snk_index(hi_then_lo) != n - 1 || snk_index(hi_then_hi) != n - 1) {
      return fail("penultimate class tuples misclassified at n=", n);
    }
  }
  return ok();
}

inline std::string check_closed_vs_oracle(const VerifyOptions& opt) {
  const std::vector<double> ps = {0.2, 0.5, 0.8};
  const unsigned cap = opt.fast ? 12 : 20;
  const unsigned cap23 = opt.fast ? 12 : 16;
  struct GridRow {
    Alphabet alpha;
    unsigned n_lo, n_hi;
  };
  const GridRow rows[] = {
      {Alphabet(Letter(1), Letter(2)), 2, cap},
      {Alphabet(Letter(1), Letter(3)), 3, cap},
      {Alphabet(Letter(2), Letter(3)), 4, cap23},
  };
  for (const GridRow& row : rows) {
    const double gap = max_gap_closed_vs_oracle(ps, row.alpha, row.n_lo, row.n_hi);
    if (gap > kTol) {
      return fail("worst closed/oracle gap ", gap, " over {",
                  int(row.alpha.lo().value()), ",", int(row.alpha.hi().value()), "}");
    }
  }
  return ok();
}

inline std::string check_correlation_equality(const VerifyOptions& opt) {
  const std::vector<double> ps = {0.3, 0.5, 0.7};
  const unsigned n_hi = opt.fast ? 12 : 18;
  const double gap = max_gap_correlation(ps, 6, n_hi);
  if (gap > kTol) return fail("worst correlation gap ", gap);
  return ok();
}

inline std::string check_joint_factorization(const VerifyOptions& opt) {
  const std::vector<double> ps = {0.3, 0.5, 0.7};
  const unsigned n_hi = opt.fast ? 12 : 18;
  const double gap = max_gap_joint_factorization(ps, 6, n_hi);
  if (gap > kTol) return fail("worst factorization gap ", gap);
  return ok();
}

inline std::string check_conditional_constancy(const VerifyOptions& opt) {
  const unsigned n_hi = opt.fast ? 10 : 14;
  for (double p : {0.3, 0.6}) {
    for (unsigned n = 2; n <= n_hi; ++n) {
      std::vector<detail::KahanSum> hit(n + 1), mass(n + 1);
      const auto weights = detail::tuple_weights(p, n);
      std::uint8_t t[kMaxEnumN];
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (unsigned i = 0; i < n; ++i) {
          t[i] = ((mask >> (n - 1 - i)) & 1) ? 2 : 1;
        }
        const unsigned k = detail::determination_step(t, n);
        const double w = weights[static_cast<unsigned>(std::popcount(mask))];
        mass[k].add(w);
        if (detail::directed_letter_at(t, n, n) == 1) hit[k].add(w);
      }
      for (unsigned k = 1; k <= n; ++k) {
        if (mass[k].value() == 0.0) continue;
        const double conditional = hit[k].value() / mass[k].value();
        const double expected = (k == n - 1) ? 0.0 : p;
        if (std::abs(conditional - expected) > kTol) {
          return fail("P(X_n=1 | class ", k, ") = ", conditional, " at n=", n,
                      ", p=", p);
        }
      }
    }
  }
  return ok();
}

inline std::string check_markov_two_step_matrix(const VerifyOptions&) {
  for (double p : {0.05, 0.3, 0.5, 0.77, 0.95}) {
    // Entrywise power of the flip/stay transition matrix.
    double same = 1.0, diff = 0.0;
    for (unsigned gap = 1; gap <= 30; ++gap) {
      const double next_same = same * (1 - p) + diff * p;
      const double next_diff = same * p + diff * (1 - p);
      same = next_same;
      diff = next_diff;
      if (std::abs(markov_two_step(Probability(p), gap, true) - same) > kTol ||
          std::abs(markov_two_step(Probability(p), gap, false) - diff) > kTol) {
        return fail("two-step closed form off matrix power at p=", p, ", gap=", gap);
      }
    }
  }
  return ok();
}

// P(X_n = 1) under Markov directing letters approaches 1/2. The raw
// deviation |P - 1/2| oscillates with n (parity of the chain), so the decay
// is asserted on its envelope: the maximum deviation over consecutive
// n-windows must fall strictly from window to window, for both fixed starts
// and for the start-averaged (stationary) law.
inline std::string check_markov_envelope(const VerifyOptions& opt) {
  const std::vector<std::pair<unsigned, unsigned>> windows =
      opt.fast ? std::vector<std::pair<unsigned, unsigned>>{{8, 9}, {10, 11}, {12, 13}, {14, 16}}
               : std::vector<std::pair<unsigned, unsigned>>{{8, 11}, {12, 15}, {16, 19}, {20, 24}};
  const Alphabet alpha{Letter(1), Letter(2)};
  const Probability p{0.7};
  for (int mode = 0; mode < 3; ++mode) {  // start lo, start hi, averaged
    double prev_max = 1.0;
    for (const auto& [w_lo, w_hi] : windows) {
      double window_max = 0.0;
      for (unsigned n = w_lo; n <= w_hi; ++n) {
        const double at_lo = (mode != 1) ? markov_xn_enum(p, n, alpha, Letter(1)) : 0.0;
        const double at_hi = (mode != 0) ? markov_xn_enum(p, n, alpha, Letter(2)) : 0.0;
        const double value = mode == 0 ? at_lo : mode == 1 ? at_hi : 0.5 * (at_lo + at_hi);
        window_max = std::max(window_max, std::abs(value - 0.5));
      }
      if (window_max >= prev_max) {
        return fail("envelope rose to ", window_max, " in window [", w_lo, ",", w_hi,
                    "] (mode ", mode, ")");
      }
      prev_max = window_max;
    }
  }
  return ok();
}

// --- stats ----------------------------------------------------------------

inline std::string check_trace_consistency(const VerifyOptions& opt) {
  const std::uint64_t len = opt.fast ? 1000 : 100000;
  const SourceSpec specs[] = {
      SourceSpec::classic(Letter(1), Letter(2)),
      SourceSpec::iid(Probability(0.4), Letter(1), Letter(2)),
      SourceSpec::markov(Probability(0.25), Letter(1), Letter(3), Letter(1)),
      SourceSpec::periodic(Word{1, 2, 2}),
  };
  const std::vector<std::uint64_t> cps = {1, 2, 3, 17, len / 2, len};
  for (const SourceSpec& spec : specs) {
    const Seed seed{5};
    const DensityTrace trace = density_trace(spec, len, cps, seed);
    const Word prefix = stream_prefix(spec, seed, len);
    const Letter lo = spec.alphabet().lo();
    const Letter hi = spec.alphabet().hi();
    std::size_t at = 0;
    std::uint64_t lo_count = 0, hi_count = 0;
    for (std::uint64_t pos = 1; pos <= len; ++pos) {
      lo_count += (prefix[pos - 1] == lo);
      hi_count += (prefix[pos - 1] == hi);
      if (at < trace.checkpoints.size() && trace.checkpoints[at].position == pos) {
        const TraceCheckpoint& cp = trace.checkpoints[at];
        if (cp.count_lo != lo_count || cp.count_hi != hi_count ||
            cp.density_lo != static_cast<double>(lo_count) / static_cast<double>(pos)) {
          return fail("trace checkpoint at ", pos, " disagrees with recount for ",
                      spec.to_string());
        }
        ++at;
      }
    }
    if (at != trace.checkpoints.size()) return fail("missing checkpoints");
  }
  return ok();
}

inline std::string check_conservation(const VerifyOptions& opt) {
  const std::uint64_t len = opt.fast ? 4096 : 65536;
  const SourceSpec specs[] = {
      SourceSpec::classic(Letter(1), Letter(2)),
      SourceSpec::periodic(Word{2}),
      SourceSpec::selfref(),
      SourceSpec::iid(Probability(0.7), Letter(2), Letter(3)),
  };
  for (const SourceSpec& spec : specs) {
    const auto cps = default_checkpoints(len);
    const DensityTrace trace = density_trace(spec, len, cps, Seed{3});
    std::uint64_t prev = 0;
    for (const TraceCheckpoint& cp : trace.checkpoints) {
      if (cp.count_lo + cp.count_hi != cp.position) {
        return fail("counts do not conserve at position ", cp.position, " for ",
                    spec.to_string());
      }
      if (cp.position <= prev) return fail("positions not strictly increasing");
      prev = cp.position;
    }
  }
  return ok();
}

inline std::string check_seed_determinism(const VerifyOptions& opt) {
  const std::uint64_t len = opt.fast ? 500 : 2000;
  const SourceSpec spec = SourceSpec::iid(Probability(0.3), Letter(1), Letter(2));
  const MCResult base = mc_density(spec, len, 50, Seed{7}, 1);
  const MCResult again = mc_density(spec, len, 50, Seed{7}, 1);
  const MCResult wide = mc_density(spec, len, 50, Seed{7}, 4);
  auto same = [](const MCResult& x, const MCResult& y) {
    return x.trials == y.trials && x.sum == y.sum && x.sum_sq == y.sum_sq &&
           x.mean == y.mean && x.std_error == y.std_error &&
           x.seed.value == y.seed.value;
  };
  if (!same(base, again)) return fail("repeat run differed");
  if (!same(base, wide)) return fail("4-thread run differed from 1-thread run");
  const MCResult pw1 = mc_pointwise(spec, 12, 400, Seed{8}, 1);
  const MCResult pw4 = mc_pointwise(spec, 12, 400, Seed{8}, 4);
  if (!same(pw1, pw4)) return fail("pointwise runs differ across thread counts");
  return ok();
}

inline std::string check_pointwise_agreement(const VerifyOptions& opt) {
  const unsigned n_hi = opt.fast ? 10 : 20;
  const std::uint64_t trials = opt.fast ? 2000 : 20000;
  const double p = 0.35;
  const Alphabet alpha{Letter(1), Letter(2)};
  const SourceSpec spec = SourceSpec::iid(Probability(p), Letter(1), Letter(2));
  unsigned ran = 0, within = 0;
  std::string first_miss;
  for (unsigned n = 2; n <= n_hi; ++n) {
    const double exactp = p_xn_enum(Probability(p), n, alpha, Letter(1));
    const MCResult mc = mc_pointwise(spec, n, trials, Seed{1000 + n}, opt.threads);
    const double sigma = std::sqrt(exactp * (1 - exactp) / static_cast<double>(trials));
    ++ran;
    if (std::abs(mc.mean - exactp) <= 4 * sigma) {
      ++within;
    } else if (first_miss.empty()) {
      first_miss = fail("n=", n, ": mean ", mc.mean, " vs exact ", exactp);
    }
  }
  // One straggler in twenty stays within the documented 95% expectation.
  if (within * 20 < ran * 19) {
    return fail("only ", within, "/", ran, " experiments within 4 sigma; first miss: ",
                first_miss);
  }
  return ok();
}

inline std::string check_selfref_limits(const VerifyOptions& opt) {
  const std::uint64_t n = opt.fast ? 10000 : 1000000;
  const double tol = opt.fast ? 0.02 : 0.005;
  const auto cps = default_checkpoints(n);
  const SelfRefTrace trace = selfref_trace(n, cps);
  if (trace.first_coupling_violation != 0 || trace.first_counting_violation != 0) {
    return fail("structural identity violated");
  }
  for (const SelfRefCheckpoint& cp : trace.checkpoints) {
    if (std::abs(cp.balance_residual()) > 2.0 / static_cast<double>(cp.step)) {
      return fail("balance residual above 2/n at step ", cp.step);
    }
  }
  const SelfRefCheckpoint& last = trace.checkpoints.back();
  const double dt_limit = (1.0 + std::sqrt(17.0)) / 8.0;
  const double do_limit = (7.0 - std::sqrt(17.0)) / 4.0;
  if (std::abs(last.t_density1() - dt_limit) > tol) {
    return fail("director density ", last.t_density1(), " vs limit ", dt_limit);
  }
  if (std::abs(last.o_density1() - do_limit) > tol) {
    return fail("output density ", last.o_density1(), " vs limit ", do_limit);
  }
  return ok();
}

// --- cli (format layer) -----------------------------------------------------

inline std::string check_csv_round_trip(const VerifyOptions& opt) {
  const std::uint64_t len = opt.fast ? 1024 : 10000;
  const auto cps = default_checkpoints(len);
  const DensityTrace trace =
      density_trace(SourceSpec::classic(Letter(1), Letter(2)), len, cps, Seed{0});
  std::stringstream buffer;
  write_csv(buffer, trace);
  const DensityTrace back = read_csv(buffer);
  if (back.checkpoints.size() != trace.checkpoints.size()) {
    return fail("row count changed across round trip");
  }
  for (std::size_t i = 0; i < trace.checkpoints.size(); ++i) {
    const TraceCheckpoint& a = trace.checkpoints[i];
    const TraceCheckpoint& b = back.checkpoints[i];
    if (a.position != b.position || a.count_lo != b.count_lo ||
        a.count_hi != b.count_hi) {
      return fail("integer fields changed at row ", i + 1);
    }
    const double expected =
        static_cast<double>(a.count_lo) / static_cast<double>(a.position);
    if (std::abs(b.density_lo - expected) > 1e-11) {
      return fail("density reparse off by ", std::abs(b.density_lo - expected));
    }
  }
  return ok();
}

}  // namespace verify_detail

struct Check {
  std::string_view name;
  std::string (*fn)(const VerifyOptions&);
};

inline std::span<const Check> all_checks() {
  static const Check table[] = {
      {"core/prefix-monotonicity", &verify_detail::check_prefix_monotonicity},
      {"core/length-lower-bound", &verify_detail::check_length_lower_bound},
      {"core/stream-batch-equivalence", &verify_detail::check_stream_batch_equivalence},
      {"core/delta-fixed-point", &verify_detail::check_delta_fixed_point},
      {"core/determination", &verify_detail::check_determination},
      {"sources/selfref-identities", &verify_detail::check_selfref_identities},
      {"sources/markov-flip-frequency", &verify_detail::check_markov_flip_frequency},
      {"sources/seed-reproducibility", &verify_detail::check_seed_reproducibility},
      {"sources/selfref-direct-consistency",
       &verify_detail::check_selfref_direct_consistency},
      {"exact/partition", &verify_detail::check_partition},
      {"exact/closed-vs-oracle", &verify_detail::check_closed_vs_oracle},
      {"exact/correlation-equality", &verify_detail::check_correlation_equality},
      {"exact/joint-factorization", &verify_detail::check_joint_factorization},
      {"exact/conditional-constancy", &verify_detail::check_conditional_constancy},
      {"exact/markov-two-step-matrix", &verify_detail::check_markov_two_step_matrix},
      {"exact/markov-envelope", &verify_detail::check_markov_envelope},
      {"stats/trace-consistency", &verify_detail::check_trace_consistency},
      {"stats/conservation", &verify_detail::check_conservation},
      {"stats/seed-determinism", &verify_detail::check_seed_determinism},
      {"stats/pointwise-agreement", &verify_detail::check_pointwise_agreement},
      {"stats/selfref-limits", &verify_detail::check_selfref_limits},
      {"cli/csv-round-trip", &verify_detail::check_csv_round_trip},
  };
  return table;
}

// Runs every registered check, streaming one status line per check to `log`.
inline VerifyReport run_verify(const VerifyOptions& options, std::ostream& log) {
  VerifyReport report;
  const auto suite_start = std::chrono::steady_clock::now();
  for (const Check& check : all_checks()) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = check.fn(options);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool passed = detail.empty();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    if (passed) {
      log << "[ ok ] " << check.name << " (" << timing << ")\n";
    } else {
      log << "[FAIL] " << check.name << ": " << detail << " (" << timing << ")\n";
      ++report.failures;
    }
    report.results.push_back(
        CheckResult{std::string(check.name), passed, std::move(detail), secs});
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start)
          .count();
  char total[32];
  std::snprintf(total, sizeof total, "%.2fs", report.seconds);
  log << "verify: " << report.results.size() << " checks, " << report.failures
      << (report.failures == 1 ? " failure" : " failures") << " in " << total << "\n";
  return report;
}

}  // namespace randkol
