#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "randkol/errors.hpp"
#include "randkol/types.hpp"

namespace randkol::detail {

// FIFO of bits packed 64 per word. Push appends at the tail, pop consumes at
// the head; fully consumed words are released, so resident memory tracks the
// reader/writer gap rather than the total ever pushed.
class BitQueue {
public:
  void push(bool bit) {
    if ((pushed_ & 63u) == 0) words_.push_back(0);
    words_.back() |= std::uint64_t(bit) << (pushed_ & 63u);
    ++pushed_;
  }

  bool pop() {
    bool bit = (words_.front() >> (popped_ & 63u)) & 1u;
    ++popped_;
    if ((popped_ & 63u) == 0) words_.pop_front();
    return bit;
  }

  std::uint64_t size() const { return pushed_ - popped_; }
  bool empty() const { return pushed_ == popped_; }

private:
  std::deque<std::uint64_t> words_;
  std::uint64_t pushed_ = 0;
  std::uint64_t popped_ = 0;
};

// Letter FIFO: one bit per letter when a two-letter alphabet is known up
// front, one byte per letter otherwise.
class LetterQueue {
public:
  explicit LetterQueue(std::optional<Alphabet> packed_alphabet)
      : alphabet_(packed_alphabet) {}

  void push(Letter x) {
    if (alphabet_) {
      if (x == alphabet_->hi()) {
        bits_.push(true);
      } else if (x == alphabet_->lo()) {
        bits_.push(false);
      } else {
        throw DomainError("letter outside the stream's two-letter alphabet");
      }
    } else {
      bytes_.push_back(x.value());
    }
  }

  Letter pop() {
    if (alphabet_) return bits_.pop() ? alphabet_->hi() : alphabet_->lo();
    Letter x = Letter::unchecked(bytes_.front());
    bytes_.pop_front();
    return x;
  }

  std::uint64_t size() const { return alphabet_ ? bits_.size() : bytes_.size(); }
  bool empty() const { return size() == 0; }
  bool packed() const { return alphabet_.has_value(); }

  // Letters that fit into a byte budget under the active representation.
  static std::uint64_t letters_per_budget(bool packed, std::uint64_t budget_bytes) {
    if (!packed) return budget_bytes;
    // 8 letters per byte; saturate instead of overflowing.
    const std::uint64_t kMax = ~std::uint64_t{0};
    return budget_bytes > kMax / 8 ? kMax : budget_bytes * 8;
  }

private:
  std::optional<Alphabet> alphabet_;
  BitQueue bits_;
  std::deque<std::uint8_t> bytes_;
};

}  // namespace randkol::detail
