#pragma once

// Construction operator for run-length directed sequences.
//
// Given a directing word T = t_1 t_2 ..., the directed word X is laid down
// block by block: block i is filled with t_i, and its length is the i-th
// letter of X itself. Because X grows by at least one letter per block, the
// i-th letter of X is always available by the time block i needs it; when
// block i starts exactly at position i, its first letter doubles as its own
// length descriptor.
//
// Indexing convention (used across the whole library): positions and block
// indices are 1-indexed in every public contract and formula; internal
// buffers are 0-indexed.

#include <concepts>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "randkol/bit_queue.hpp"
#include "randkol/errors.hpp"
#include "randkol/types.hpp"

namespace randkol {

// Default cap on the pending-queue footprint of a stream (bytes).
inline constexpr std::uint64_t kDefaultPendingBudgetBytes = 1ull << 30;

// Directed word of a finite directing word: every block is written in full.
inline Word direct_finite(const Word& directing) {
  if (directing.empty()) {
    throw DomainError("direct_finite: directing word must be nonempty");
  }
  std::vector<Letter> out;
  out.reserve(directing.size() * 2);
  for (std::size_t i = 0; i < directing.size(); ++i) {
    const Letter x = directing[i];
    out.push_back(x);
    // out[i] is block i+1's length; it is present because |out| >= i+1 here.
    const std::uint64_t block_length = out[i].value();
    for (std::uint64_t j = 1; j < block_length; ++j) out.push_back(x);
  }
  return Word(std::move(out));
}

struct Run {
  Letter letter;
  std::uint64_t length = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

// Maximal-run decomposition of a finite word. `last_run_complete` is always
// false: a finite word is treated as a prefix of a longer sequence, so
// whether its final run extends is unknowable from the word alone.
struct RunEncoding {
  std::vector<Run> runs;
  bool last_run_complete = false;
};

inline RunEncoding rle(const Word& w) {
  if (w.empty()) throw DomainError("rle: word must be nonempty");
  RunEncoding enc;
  Run current{w[0], 1};
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == current.letter) {
      ++current.length;
    } else {
      enc.runs.push_back(current);
      current = Run{w[i], 1};
    }
  }
  enc.runs.push_back(current);
  enc.last_run_complete = false;
  return enc;
}

// Run-length trajectory: the word of maximal-run lengths. Run lengths must
// fit the letter range [1, 255].
inline Word delta(const Word& w) {
  RunEncoding enc = rle(w);
  std::vector<Letter> lengths;
  lengths.reserve(enc.runs.size());
  for (const Run& r : enc.runs) {
    if (r.length > 255) {
      throw DomainError("delta: run length exceeds the letter range [1, 255]");
    }
    lengths.push_back(Letter(r.length));
  }
  return Word(std::move(lengths));
}

// Anything that can feed a directed stream: yields letters until exhausted
// (infinite sources never are) and advertises a two-letter alphabet when it
// has one, enabling the bit-packed pending queue.
template <class S>
concept LetterSource = requires(S s, const S cs) {
  { s.poll() } -> std::same_as<std::optional<Letter>>;
  { cs.alphabet_hint() } -> std::same_as<std::optional<Alphabet>>;
};

// Finite source over a fixed word; used for replaying captured prefixes and
// for tests.
class WordSource {
public:
  explicit WordSource(Word w) : word_(std::move(w)) {
    // Two distinct letters -> packable hint; otherwise none.
    std::optional<Letter> first, second;
    for (Letter x : word_) {
      if (!first) {
        first = x;
      } else if (x != *first && !second) {
        second = x;
      } else if (second && x != *first && x != *second) {
        return;  // three or more distinct letters: no hint
      }
    }
    if (first && second) {
      hint_ = Alphabet(std::min(*first, *second), std::max(*first, *second));
    }
  }

  std::optional<Letter> poll() {
    if (next_ >= word_.size()) return std::nullopt;
    return word_[next_++];
  }

  std::optional<Alphabet> alphabet_hint() const { return hint_; }
  std::size_t consumed() const { return next_; }

private:
  Word word_;
  std::size_t next_ = 0;
  std::optional<Alphabet> hint_;
};

// Streaming form of the construction operator. Letters the stream has
// emitted but not yet consumed as block lengths wait in a FIFO pending
// queue (bit-packed for two-letter alphabets); its growth is linear in the
// emitted length, and exceeding the byte budget raises ResourceLimitError.
template <LetterSource S>
class DirectedStream {
public:
  explicit DirectedStream(S source,
                          std::uint64_t pending_budget_bytes = kDefaultPendingBudgetBytes)
      : source_(std::move(source)),
        pending_(source_.alphabet_hint()),
        budget_letters_(detail::LetterQueue::letters_per_budget(pending_.packed(),
                                                                pending_budget_bytes)) {}

  // Next letter of the directed sequence; nullopt once a finite source is
  // exhausted (all blocks of the consumed directing word are complete).
  std::optional<Letter> next() {
    if (block_remaining_ > 0) {
      --block_remaining_;
      ++emitted_;
      push_pending(block_fill_);
      return block_fill_;
    }
    if (exhausted_) return std::nullopt;
    const std::optional<Letter> t = source_.poll();
    if (!t) {
      exhausted_ = true;
      return std::nullopt;
    }
    block_fill_ = *t;
    ++reader_;
    if (pending_.empty()) {
      // The new block begins at the reader position: its first letter is its
      // own length descriptor and is consumed as it is emitted.
      block_remaining_ = std::uint64_t(t->value()) - 1;
      ++emitted_;
      return block_fill_;
    }
    block_remaining_ = std::uint64_t(pending_.pop().value()) - 1;
    ++emitted_;
    push_pending(block_fill_);
    return block_fill_;
  }

  std::uint64_t emitted() const { return emitted_; }
  std::uint64_t blocks_started() const { return reader_; }
  std::uint64_t pending_letters() const { return pending_.size(); }
  const S& source() const { return source_; }

private:
  void push_pending(Letter x) {
    if (pending_.size() >= budget_letters_) {
      throw ResourceLimitError("pending queue exceeded its memory budget");
    }
    pending_.push(x);
  }

  S source_;
  detail::LetterQueue pending_;
  std::uint64_t budget_letters_;
  std::uint64_t reader_ = 0;    // blocks started == directing letters consumed
  std::uint64_t emitted_ = 0;
  Letter block_fill_ = Letter::unchecked(1);
  std::uint64_t block_remaining_ = 0;
  bool exhausted_ = false;
};

template <LetterSource S>
DirectedStream<S> stream_new(S source,
                             std::uint64_t pending_budget_bytes = kDefaultPendingBudgetBytes) {
  return DirectedStream<S>(std::move(source), pending_budget_bytes);
}

}  // namespace randkol
