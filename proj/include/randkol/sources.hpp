#pragma once

// Directing-sequence sources and their descriptor mini-language.
//
// Descriptors (case-sensitive, exact key order):
//   periodic:<digits>                         e.g. periodic:122
//   classic:<a>,<b>                           e.g. classic:1,2
//   iid:p=<float>,a=<int>,b=<int>             e.g. iid:p=0.3,a=1,b=2
//   markov:p=<float>,a=<int>,b=<int>[,start=<int>]
//   selfref
//
// classic:a,b alternates a,b,a,b,... For iid, `a` is returned with
// probability p. For markov, p is the flip probability and emission starts
// at `start` (default a). selfref grows its own directing sequence together
// with the directed one: blocks of length 2 are filled with 1, blocks of
// length 1 alternate 1,2,1,2,..., and the pair is seeded with T = 2,
// directed word 2,2.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randkol/bit_queue.hpp"
#include "randkol/core.hpp"
#include "randkol/errors.hpp"
#include "randkol/rng.hpp"
#include "randkol/types.hpp"

namespace randkol {

enum class SourceKind { Periodic, Classic, IID, Markov, SelfRef };

class SourceSpec {
public:
  static SourceSpec periodic(Word pattern) {
    if (pattern.empty()) throw DomainError("periodic: pattern must be nonempty");
    if (distinct_count(pattern) > 2) {
      throw DomainError("periodic: pattern must use at most two distinct letters");
    }
    SourceSpec s(SourceKind::Periodic);
    s.pattern_ = std::move(pattern);
    return s;
  }

  static SourceSpec classic(Letter a, Letter b) {
    if (a == b) throw DomainError("classic: alphabet letters must differ");
    SourceSpec s(SourceKind::Classic);
    s.a_ = a;
    s.b_ = b;
    return s;
  }

  static SourceSpec iid(Probability p, Letter a, Letter b) {
    SourceSpec s(SourceKind::IID);
    s.p_ = open_interval(p);
    s.a_ = a;
    s.b_ = b;
    if (a == b) throw DomainError("iid: alphabet letters must differ");
    return s;
  }

  static SourceSpec markov(Probability p, Letter a, Letter b,
                           std::optional<Letter> start = std::nullopt) {
    SourceSpec s(SourceKind::Markov);
    s.p_ = open_interval(p);
    s.a_ = a;
    s.b_ = b;
    if (a == b) throw DomainError("markov: alphabet letters must differ");
    s.start_ = start.value_or(a);
    if (s.start_ != a && s.start_ != b) {
      throw DomainError("markov: start letter must be a or b");
    }
    return s;
  }

  static SourceSpec selfref() { return SourceSpec(SourceKind::SelfRef); }

  SourceKind kind() const { return kind_; }
  const Word& pattern() const { return pattern_; }
  Letter a() const { return a_; }
  Letter b() const { return b_; }
  Letter start() const { return start_; }
  double p() const { return p_; }
  bool stochastic() const {
    return kind_ == SourceKind::IID || kind_ == SourceKind::Markov;
  }

  // Alphabet used for density bookkeeping (count_lo counts its lo letter).
  // A single-letter periodic pattern is paired with the complementary letter
  // so the lo slot stays meaningful: pattern (2) counts 1s, hence density 0.
  Alphabet alphabet() const {
    switch (kind_) {
      case SourceKind::Periodic: {
        Letter first = pattern_[0];
        std::optional<Letter> second;
        for (Letter x : pattern_) {
          if (x != first) second = x;
        }
        if (!second) {
          return first.value() == 1 ? Alphabet(first, Letter(2))
                                    : Alphabet(Letter(1), first);
        }
        return Alphabet(std::min(first, *second), std::max(first, *second));
      }
      case SourceKind::SelfRef:
        return Alphabet(Letter(1), Letter(2));
      default:
        return Alphabet(std::min(a_, b_), std::max(a_, b_));
    }
  }

  // Canonical descriptor; parse_spec(to_string()) reproduces the spec.
  std::string to_string() const {
    switch (kind_) {
      case SourceKind::Periodic:
        return "periodic:" + pattern_.to_string();
      case SourceKind::Classic:
        return "classic:" + std::to_string(a_.value()) + "," + std::to_string(b_.value());
      case SourceKind::IID:
        return "iid:p=" + format_p() + ",a=" + std::to_string(a_.value()) +
               ",b=" + std::to_string(b_.value());
      case SourceKind::Markov:
        return "markov:p=" + format_p() + ",a=" + std::to_string(a_.value()) +
               ",b=" + std::to_string(b_.value()) +
               ",start=" + std::to_string(start_.value());
      case SourceKind::SelfRef:
        return "selfref";
    }
    return {};
  }

private:
  explicit SourceSpec(SourceKind kind) : kind_(kind) {}

  static double open_interval(Probability p) {
    if (p.value() <= 0.0 || p.value() >= 1.0) {
      throw DomainError("source probability must lie strictly between 0 and 1");
    }
    return p.value();
  }

  static std::size_t distinct_count(const Word& w) {
    std::vector<Letter> seen;
    for (Letter x : w) {
      bool found = false;
      for (Letter s : seen) found = found || s == x;
      if (!found) seen.push_back(x);
    }
    return seen.size();
  }

  std::string format_p() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", p_);
    return buf;
  }

  SourceKind kind_;
  Word pattern_;
  Letter a_ = Letter::unchecked(1);
  Letter b_ = Letter::unchecked(2);
  Letter start_ = Letter::unchecked(1);
  double p_ = 0.0;
};

namespace detail {

struct SpecCursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void expect(char c) {
    if (done() || text[pos] != c) {
      throw ParseError(std::string("expected '") + c + "'", pos);
    }
    ++pos;
  }

  void expect_key(std::string_view key) {
    if (text.substr(pos, key.size()) != key) {
      throw ParseError("expected key '" + std::string(key) + "='", pos);
    }
    pos += key.size();
    expect('=');
  }

  double parse_double() {
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr == begin) {
      throw ParseError("expected a floating-point value", pos);
    }
    pos += static_cast<std::size_t>(ptr - begin);
    return out;
  }

  std::uint64_t parse_uint() {
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr == begin) {
      throw ParseError("expected an integer", pos);
    }
    pos += static_cast<std::size_t>(ptr - begin);
    return out;
  }

  void finish() {
    if (!done()) throw ParseError("unexpected trailing characters", pos);
  }
};

}  // namespace detail

// Parses a source descriptor. Syntax problems raise ParseError with the byte
// offset of the offending character; well-formed descriptors with invalid
// values (p outside ]0,1[, equal letters, letter 0) raise DomainError.
inline SourceSpec parse_spec(std::string_view text) {
  detail::SpecCursor cur{text};

  auto keyword = [&](std::string_view word) {
    if (text.substr(0, word.size()) == word) {
      cur.pos = word.size();
      return true;
    }
    return false;
  };

  if (keyword("selfref")) {
    cur.finish();
    return SourceSpec::selfref();
  }
  if (keyword("periodic")) {
    cur.expect(':');
    std::vector<Letter> pattern;
    const std::size_t start = cur.pos;
    while (!cur.done()) {
      char c = cur.peek();
      if (c < '1' || c > '9') {
        throw ParseError("periodic pattern must be digits 1-9", cur.pos);
      }
      pattern.push_back(Letter(static_cast<std::uint64_t>(c - '0')));
      ++cur.pos;
    }
    if (cur.pos == start) throw ParseError("periodic pattern must be nonempty", start);
    return SourceSpec::periodic(Word(std::move(pattern)));
  }
  if (keyword("classic")) {
    cur.expect(':');
    Letter a{cur.parse_uint()};
    cur.expect(',');
    Letter b{cur.parse_uint()};
    cur.finish();
    return SourceSpec::classic(a, b);
  }
  if (keyword("iid")) {
    cur.expect(':');
    cur.expect_key("p");
    double p = cur.parse_double();
    cur.expect(',');
    cur.expect_key("a");
    Letter a{cur.parse_uint()};
    cur.expect(',');
    cur.expect_key("b");
    Letter b{cur.parse_uint()};
    cur.finish();
    return SourceSpec::iid(Probability(p), a, b);
  }
  if (keyword("markov")) {
    cur.expect(':');
    cur.expect_key("p");
    double p = cur.parse_double();
    cur.expect(',');
    cur.expect_key("a");
    Letter a{cur.parse_uint()};
    cur.expect(',');
    cur.expect_key("b");
    Letter b{cur.parse_uint()};
    std::optional<Letter> start;
    if (!cur.done()) {
      cur.expect(',');
      cur.expect_key("start");
      start = Letter{cur.parse_uint()};
    }
    cur.finish();
    return SourceSpec::markov(Probability(p), a, b, start);
  }
  throw ParseError("unknown source kind", 0);
}

// Resumable generator state for a parsed source. Deterministic kinds ignore
// the seed. The self-referential source keeps the directed letters it has
// produced but not yet consumed as block lengths in a packed FIFO.
class SourceState {
public:
  SourceState(SourceSpec spec, Seed seed)
      : spec_(std::move(spec)), rng_(seed), seed_(seed) {
    if (spec_.kind() == SourceKind::SelfRef) {
      // T starts as (2) and the directed word as (2,2); its first letter is
      // already consumed (it described block 1), leaving one 2 ahead.
      selfref_ahead_.push(Letter::unchecked(2));
    }
  }

  Letter next() {
    ++position_;
    switch (spec_.kind()) {
      case SourceKind::Periodic: {
        const Word& pat = spec_.pattern();
        return pat[static_cast<std::size_t>((position_ - 1) % pat.size())];
      }
      case SourceKind::Classic:
        return (position_ & 1) ? spec_.a() : spec_.b();
      case SourceKind::IID:
        return rng_.bernoulli(spec_.p()) ? spec_.a() : spec_.b();
      case SourceKind::Markov:
        if (position_ == 1) {
          prev_ = spec_.start();
        } else if (rng_.bernoulli(spec_.p())) {
          prev_ = prev_ == spec_.a() ? spec_.b() : spec_.a();
        }
        return prev_;
      case SourceKind::SelfRef: {
        if (position_ == 1) return Letter::unchecked(2);
        const Letter block_length = selfref_ahead_.pop();
        if (block_length.value() == 2) {
          selfref_ahead_.push(Letter::unchecked(1));
          selfref_ahead_.push(Letter::unchecked(1));
          return Letter::unchecked(1);
        }
        const Letter t = selfref_digit_;
        selfref_ahead_.push(t);
        selfref_digit_ = Letter::unchecked(static_cast<std::uint8_t>(3 - t.value()));
        return t;
      }
    }
    throw DomainError("unreachable source kind");
  }

  std::optional<Letter> poll() { return next(); }
  std::optional<Alphabet> alphabet_hint() const { return spec_.alphabet(); }

  std::uint64_t position() const { return position_; }
  const SourceSpec& spec() const { return spec_; }
  Seed seed() const { return seed_; }

private:
  SourceSpec spec_;
  Xoshiro256StarStar rng_;
  Seed seed_;
  std::uint64_t position_ = 0;
  Letter prev_ = Letter::unchecked(1);
  detail::LetterQueue selfref_ahead_{Alphabet(Letter(1), Letter(2))};
  Letter selfref_digit_ = Letter::unchecked(1);
};

// Materializes the self-referential pair: the first n directing letters T
// and the directed word made of their n complete blocks.
inline std::pair<Word, Word> selfref_build(std::uint64_t n) {
  if (n < 1) throw DomainError("selfref_build: n must be at least 1");
  if (n > (1ull << 30)) {
    throw ResourceLimitError("selfref_build: n too large to materialize");
  }
  std::vector<Letter> t{Letter(2)};
  std::vector<Letter> o{Letter(2), Letter(2)};
  t.reserve(static_cast<std::size_t>(n));
  o.reserve(static_cast<std::size_t>(n + n / 3 + 2));
  Letter digit(1);
  for (std::uint64_t i = 1; i < n; ++i) {
    if (o[static_cast<std::size_t>(i)].value() == 2) {
      t.push_back(Letter::unchecked(1));
      o.push_back(Letter::unchecked(1));
      o.push_back(Letter::unchecked(1));
    } else {
      t.push_back(digit);
      o.push_back(digit);
      digit = Letter::unchecked(static_cast<std::uint8_t>(3 - digit.value()));
    }
  }
  return {Word(std::move(t)), Word(std::move(o))};
}

}  // namespace randkol
