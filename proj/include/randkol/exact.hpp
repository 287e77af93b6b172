#pragma once

// Exact letter-probability machinery for directed sequences whose directing
// letters are random.
//
// Closed forms (P(X_n = lo) under i.i.d. directing letters, P(lo) = p):
//   alphabet {1,a}, 1 < a:      p * (1 - p^(n-a) + p^(n-1))   for n >= a
//   alphabet {a,b}, 1 < a < b:  p                             for n >= b+1
// Joint law over {1,2}: P(X_m = 2 and X_n = 1) = p * P(X_m = 2) for
// n >= m+2, which yields E(Xc_m * Xc_n) = -(1-p)^2 * p^(n-1) for the
// centered letters Xc_n = X_n - (2-p).
//
// Every closed form is cross-checkable against brute-force enumeration over
// the product (or Markov-path) measure; enumeration is capped at n <= 24
// and accumulates weights with compensated summation in lexicographic order.

#include <array>
#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

#include "randkol/core.hpp"
#include "randkol/errors.hpp"
#include "randkol/kahan.hpp"
#include "randkol/types.hpp"

namespace randkol {

inline constexpr unsigned kMaxEnumN = 24;

namespace detail {

// pow with an integer exponent by repeated squaring: deterministic across
// platforms, unlike std::pow.
inline double pow_u64(double base, std::uint64_t exp) {
  double result = 1.0;
  double acc = base;
  while (exp > 0) {
    if (exp & 1) result *= acc;
    acc *= acc;
    exp >>= 1;
  }
  return result;
}

// Weight table for enumeration over n independent letters: weight[h] is the
// probability of a tuple containing h hi letters, p being the lo probability.
inline std::array<double, kMaxEnumN + 1> tuple_weights(double p, unsigned n) {
  std::array<double, kMaxEnumN + 1> lo_pow{};
  std::array<double, kMaxEnumN + 1> hi_pow{};
  lo_pow[0] = hi_pow[0] = 1.0;
  for (unsigned i = 1; i <= n; ++i) {
    lo_pow[i] = lo_pow[i - 1] * p;
    hi_pow[i] = hi_pow[i - 1] * (1.0 - p);
  }
  std::array<double, kMaxEnumN + 1> weight{};
  for (unsigned h = 0; h <= n; ++h) weight[h] = lo_pow[n - h] * hi_pow[h];
  return weight;
}

// Letter at 1-indexed position pos of the directed word of t[0..len).
// Valid whenever len >= pos (the directed word then covers position pos).
inline unsigned directed_letter_at(const std::uint8_t* t, unsigned len, unsigned pos) {
  std::uint8_t lengths[kMaxEnumN + 1];  // directed letters at positions 1..len
  std::uint64_t total = 0;              // directed length laid down so far
  for (unsigned i = 1; i <= len; ++i) {
    const std::uint8_t x = t[i - 1];
    ++total;
    if (total <= len) lengths[total] = x;
    const std::uint64_t block = lengths[i];
    if (block > 1) {
      std::uint64_t rest = block - 1;
      while (rest > 0 && total < len) {
        lengths[++total] = x;
        --rest;
      }
      total += rest;
    }
    if (total >= pos) return x;
  }
  return 0;  // unreachable for len >= pos
}

// Letters at positions m < n in a single pass.
inline std::pair<unsigned, unsigned> directed_letters_at2(const std::uint8_t* t,
                                                          unsigned len, unsigned m,
                                                          unsigned n) {
  std::uint8_t lengths[kMaxEnumN + 1];
  std::uint64_t total = 0;
  unsigned at_m = 0;
  for (unsigned i = 1; i <= len; ++i) {
    const std::uint8_t x = t[i - 1];
    ++total;
    if (total <= len) lengths[total] = x;
    const std::uint64_t block = lengths[i];
    if (block > 1) {
      std::uint64_t rest = block - 1;
      while (rest > 0 && total < len) {
        lengths[++total] = x;
        --rest;
      }
      total += rest;
    }
    if (at_m == 0 && total >= m) at_m = x;
    if (total >= n) return {at_m, x};
  }
  return {at_m, 0};  // unreachable for len >= n
}

// Step at which the block containing position n becomes determined: the
// smallest j such that the letters of the directed word of t_1..t_j sum to
// at least n. Letters restricted to {1,2}.
inline unsigned determination_step(const std::uint8_t* t, unsigned n) {
  std::uint8_t lengths[kMaxEnumN + 1];
  std::uint64_t total = 0;
  std::uint64_t letter_sum = 0;
  for (unsigned i = 1; i <= n; ++i) {
    const std::uint8_t x = t[i - 1];
    ++total;
    if (total <= n) lengths[total] = x;
    const std::uint64_t block = lengths[i];
    if (block > 1) {
      std::uint64_t rest = block - 1;
      while (rest > 0 && total < n) {
        lengths[++total] = x;
        --rest;
      }
      total += rest;
    }
    letter_sum += block * x;
    if (letter_sum >= n) return i;
  }
  return n;  // letter_sum >= total >= n holds by step n
}

inline void require_enum_width(unsigned n, const char* what) {
  if (n < 1) throw DomainError(std::string(what) + ": n must be at least 1");
  if (n > kMaxEnumN) {
    throw ResourceLimitError(std::string(what) + ": enumeration capped at n <= " +
                             std::to_string(kMaxEnumN));
  }
}

}  // namespace detail

// --- Determination partition over {1,2}^n -----------------------------------

// Step at which the block containing position |T| becomes determined while
// reading T left to right. Deliberately built on direct_finite prefix by
// prefix so it can serve as an independent oracle for the table below.
inline unsigned snk_index(const Word& T) {
  if (T.empty()) throw DomainError("snk_index: word must be nonempty");
  for (Letter x : T) {
    if (x.value() != 1 && x.value() != 2) {
      throw DomainError("snk_index: letters must be in {1, 2}");
    }
  }
  const std::uint64_t n = T.size();
  for (std::size_t j = 1; j <= T.size(); ++j) {
    const Word w = direct_finite(T.prefix(j));
    std::uint64_t letter_sum = 0;
    for (Letter x : w) letter_sum += x.value();
    if (letter_sum >= n) return static_cast<unsigned>(j);
  }
  return static_cast<unsigned>(T.size());
}

// Class sizes of the determination partition of {1,2}^n.
struct SnkTable {
  unsigned n = 0;
  std::vector<std::uint64_t> sizes;  // sizes[k] for k = 1..n; sizes[0] unused

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t s : sizes) sum += s;
    return sum;
  }
};

inline SnkTable snk_partition(unsigned n) {
  detail::require_enum_width(n, "snk_partition");
  n = std::min(n, kMaxEnumN);  // already guaranteed; proves the loop bound
  SnkTable table{n, std::vector<std::uint64_t>(n + 1, 0)};
  std::uint8_t t[kMaxEnumN];
  const std::uint64_t end = 1ull << n;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    for (unsigned i = 0; i < n; ++i) {
      t[i] = ((mask >> (n - 1 - i)) & 1) ? 2 : 1;
    }
    ++table.sizes[detail::determination_step(t, n)];
  }
  return table;
}

// --- Closed forms and enumeration oracles ------------------------------------

// P(X_n = lo) under i.i.d. directing letters with P(lo) = p. Throws
// OutOfRangeError below the validity threshold of the applicable form.
inline double p_xn_closed(Probability p, std::uint64_t n, Alphabet alphabet) {
  const unsigned lo = alphabet.lo().value();
  const unsigned hi = alphabet.hi().value();
  if (lo == 1) {
    if (n < hi) {
      throw OutOfRangeError("p_xn_closed: {1," + std::to_string(hi) +
                            "} form requires n >= " + std::to_string(hi));
    }
    const double pv = p.value();
    return pv * (1.0 - detail::pow_u64(pv, n - hi) + detail::pow_u64(pv, n - 1));
  }
  if (n < std::uint64_t(hi) + 1) {
    throw OutOfRangeError("p_xn_closed: {" + std::to_string(lo) + "," +
                          std::to_string(hi) +
                          "} form requires n >= " + std::to_string(hi + 1));
  }
  return p.value();
}

// Brute-force P(X_n = target) by enumerating {lo,hi}^n under the product
// measure. Exact oracle; n capped at 24.
inline double p_xn_enum(Probability p, unsigned n, Alphabet alphabet, Letter target) {
  detail::require_enum_width(n, "p_xn_enum");
  n = std::min(n, kMaxEnumN);  // already guaranteed; proves the loop bound
  if (!alphabet.contains(target)) {
    throw DomainError("p_xn_enum: target letter outside the alphabet");
  }
  const auto weight = detail::tuple_weights(p.value(), n);
  const std::uint8_t lo = alphabet.lo().value();
  const std::uint8_t hi = alphabet.hi().value();
  const unsigned want = target.value();
  std::uint8_t t[kMaxEnumN];
  detail::KahanSum acc;
  const std::uint64_t end = 1ull << n;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    for (unsigned i = 0; i < n; ++i) {
      t[i] = ((mask >> (n - 1 - i)) & 1) ? hi : lo;
    }
    if (detail::directed_letter_at(t, n, n) == want) {
      acc.add(weight[static_cast<unsigned>(std::popcount(mask))]);
    }
  }
  return acc.value();
}

// Joint law of (X_m, X_n) over the alphabet {1,2}; cell [i][j] is the
// probability of X_m = 1+i and X_n = 1+j.
struct JointTable {
  double cell[2][2] = {{0, 0}, {0, 0}};
};

inline JointTable joint_enum_table(Probability p, unsigned m, unsigned n) {
  detail::require_enum_width(n, "joint_enum");
  if (m < 1 || m >= n) throw DomainError("joint_enum: requires 1 <= m < n");
  const auto weight = detail::tuple_weights(p.value(), n);
  std::uint8_t t[kMaxEnumN];
  detail::KahanSum acc[2][2];
  const std::uint64_t end = 1ull << n;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    for (unsigned i = 0; i < n; ++i) {
      t[i] = ((mask >> (n - 1 - i)) & 1) ? 2 : 1;
    }
    const auto [lm, ln] = detail::directed_letters_at2(t, n, m, n);
    acc[lm - 1][ln - 1].add(weight[static_cast<unsigned>(std::popcount(mask))]);
  }
  JointTable table;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) table.cell[i][j] = acc[i][j].value();
  }
  return table;
}

inline double joint_enum(Probability p, unsigned m, unsigned n, Letter lm, Letter ln) {
  if (lm.value() > 2 || ln.value() > 2) {
    throw DomainError("joint_enum: letters must be in {1, 2}");
  }
  const JointTable table = joint_enum_table(p, m, n);
  return table.cell[lm.value() - 1][ln.value() - 1];
}

// Centered letter over {1,2}: x - (2-p), so hi maps to p and lo to p-1.
struct CenteredLetter {
  double value = 0.0;
};

inline CenteredLetter center(Letter x, Probability p) {
  if (x.value() != 1 && x.value() != 2) {
    throw DomainError("center: letter must be in {1, 2}");
  }
  return CenteredLetter{static_cast<double>(x.value()) - (2.0 - p.value())};
}

// E(Xc_m * Xc_n) for the centered letters, closed form, valid for n >= m+2.
inline double corr_closed(Probability p, unsigned m, unsigned n) {
  if (m < 1) throw DomainError("corr_closed: m must be at least 1");
  if (n < m + 2) {
    throw OutOfRangeError("corr_closed: requires n >= m + 2");
  }
  const double q = 1.0 - p.value();
  return -q * q * detail::pow_u64(p.value(), n - 1);
}

// E(Xc_m * Xc_n) assembled from the enumerated joint law; oracle side.
inline double corr_enum(Probability p, unsigned m, unsigned n) {
  const JointTable table = joint_enum_table(p, m, n);
  const double c[2] = {center(Letter(1), p).value, center(Letter(2), p).value};
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) sum += table.cell[i][j] * c[i] * c[j];
  }
  return sum;
}

// --- Markov directing letters -------------------------------------------------

// P(T_{r+gap} = T_r) (same = true) or P(T_{r+gap} != T_r) for the two-state
// symmetric chain with flip probability p.
inline double markov_two_step(Probability p, std::uint64_t gap, bool same) {
  if (gap < 1) throw DomainError("markov_two_step: gap must be at least 1");
  const double factor = detail::pow_u64(1.0 - 2.0 * p.value(), gap);
  return same ? 0.5 * (1.0 + factor) : 0.5 * (1.0 - factor);
}

// Brute-force P(X_n = lo) when the directing letters follow the symmetric
// Markov chain with flip probability p and fixed start letter.
inline double markov_xn_enum(Probability p, unsigned n, Alphabet alphabet, Letter start) {
  detail::require_enum_width(n, "markov_xn_enum");
  n = std::min(n, kMaxEnumN);  // already guaranteed; proves the loop bound
  if (!alphabet.contains(start)) {
    throw DomainError("markov_xn_enum: start letter outside the alphabet");
  }
  // weight[f] = p^f (1-p)^(n-1-f) for a path with f flips.
  std::array<double, kMaxEnumN + 1> flip_pow{};
  std::array<double, kMaxEnumN + 1> stay_pow{};
  flip_pow[0] = stay_pow[0] = 1.0;
  for (unsigned i = 1; i <= n; ++i) {
    flip_pow[i] = flip_pow[i - 1] * p.value();
    stay_pow[i] = stay_pow[i - 1] * (1.0 - p.value());
  }
  const std::uint8_t lo = alphabet.lo().value();
  const std::uint8_t hi = alphabet.hi().value();
  std::uint8_t t[kMaxEnumN];
  detail::KahanSum acc;
  const unsigned steps = n - 1;
  const std::uint64_t end = 1ull << steps;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    t[0] = start.value();
    for (unsigned i = 1; i < n; ++i) {
      const bool flip = (mask >> (steps - i)) & 1;
      t[i] = flip ? (t[i - 1] == lo ? hi : lo) : t[i - 1];
    }
    if (detail::directed_letter_at(t, n, n) == lo) {
      const unsigned flips = static_cast<unsigned>(std::popcount(mask));
      acc.add(flip_pow[flips] * stay_pow[steps - flips]);
    }
  }
  return acc.value();
}

}  // namespace randkol
