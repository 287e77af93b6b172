#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "randkol/errors.hpp"

namespace randkol {

// A sequence symbol: a small positive integer. Values are capped at 255 so
// that two-letter streams can be bit-packed and generic ones stored one byte
// per letter.
class Letter {
public:
  Letter() = default;
  explicit Letter(std::uint64_t v) : value_(checked(v)) {}

  // Bypasses range validation; for internal hot paths with known-good values.
  static Letter unchecked(std::uint8_t v) {
    Letter l;
    l.value_ = v;
    return l;
  }

  std::uint8_t value() const { return value_; }

  friend auto operator<=>(Letter, Letter) = default;

private:
  static std::uint8_t checked(std::uint64_t v) {
    if (v < 1 || v > 255) {
      throw DomainError("letter value must lie in [1, 255], got " + std::to_string(v));
    }
    return static_cast<std::uint8_t>(v);
  }

  std::uint8_t value_ = 1;
};

// An ordered two-letter alphabet, lo < hi.
class Alphabet {
public:
  Alphabet(Letter lo, Letter hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi)) {
      throw DomainError("alphabet letters must satisfy lo < hi");
    }
  }

  Letter lo() const { return lo_; }
  Letter hi() const { return hi_; }
  bool contains(Letter x) const { return x == lo_ || x == hi_; }
  Letter other(Letter x) const {
    if (x == lo_) return hi_;
    if (x == hi_) return lo_;
    throw DomainError("letter is not a member of the alphabet");
  }

  friend bool operator==(Alphabet, Alphabet) = default;

private:
  Letter lo_;
  Letter hi_;
};

// A probability value, validated to [0, 1] at construction. Contexts with
// stricter needs (e.g. stochastic sources require the open interval) impose
// them on top.
class Probability {
public:
  explicit Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("probability must lie in [0, 1], got " + std::to_string(v));
    }
  }

  double value() const { return value_; }

private:
  double value_;
};

// Seed for the pseudo-random machinery; plain 64-bit value type.
struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

// A finite sequence of letters.
class Word {
public:
  Word() = default;
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  Word(std::initializer_list<int> values) {
    letters_.reserve(values.size());
    for (int v : values) letters_.emplace_back(static_cast<std::uint64_t>(v));
  }

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  auto begin() const { return letters_.begin(); }
  auto end() const { return letters_.end(); }

  void push_back(Letter x) { letters_.push_back(x); }
  void reserve(std::size_t n) { letters_.reserve(n); }

  // Number of occurrences of `x`.
  std::uint64_t count(Letter x) const {
    std::uint64_t c = 0;
    for (Letter l : letters_) c += (l == x);
    return c;
  }

  bool is_prefix_of(const Word& longer) const {
    if (size() > longer.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (letters_[i] != longer[i]) return false;
    }
    return true;
  }

  Word prefix(std::size_t n) const {
    return Word(std::vector<Letter>(letters_.begin(), letters_.begin() + n));
  }

  // Compact rendering: a digit string when every letter is single-digit,
  // comma-separated values otherwise.
  std::string to_string() const {
    bool digits = true;
    for (Letter l : letters_) digits = digits && l.value() <= 9;
    std::string out;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (!digits && i > 0) out += ',';
      out += std::to_string(letters_[i].value());
    }
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;

private:
  std::vector<Letter> letters_;
};

}  // namespace randkol
