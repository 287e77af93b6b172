#include <catch2/catch_amalgamated.hpp>

#include "randkol/randkol.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace {

using namespace randkol;

void expect_parse_error_at(const std::string& text, std::size_t offset) {
  try {
    parse_spec(text);
    FAIL("expected a syntax error for \"" << text << "\"");
  } catch (const ParseError& e) {
    INFO("descriptor: " << text);
    CHECK(e.position() == offset);
    CHECK(std::string(e.what()).find("offset " + std::to_string(offset)) !=
          std::string::npos);
  }
}

Word take(SourceState& source, std::size_t n) {
  Word out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(source.next());
  return out;
}

}  // namespace

TEST_CASE("descriptors round-trip through their canonical text", "[sources]") {
  for (const char* text : {"classic:1,2", "classic:1,3", "classic:3,1",
                           "periodic:122", "periodic:2112111", "iid:p=0.4,a=1,b=2",
                           "markov:p=0.99,a=1,b=3,start=1",
                           "markov:p=0.2,a=1,b=3,start=3", "selfref"}) {
    INFO("descriptor: " << text);
    const SourceSpec spec = parse_spec(text);
    CHECK(spec.to_string() == text);
    CHECK(parse_spec(spec.to_string()).to_string() == spec.to_string());
  }
}

TEST_CASE("parsed descriptors expose their parameters", "[sources]") {
  const SourceSpec iid = parse_spec("iid:p=0.4,a=1,b=2");
  CHECK(iid.kind() == SourceKind::IID);
  CHECK(iid.p() == 0.4);
  CHECK(iid.a() == Letter(1));
  CHECK(iid.b() == Letter(2));
  CHECK(iid.stochastic());

  const SourceSpec periodic = parse_spec("periodic:122");
  CHECK(periodic.kind() == SourceKind::Periodic);
  CHECK(periodic.pattern() == Word{1, 2, 2});
  CHECK_FALSE(periodic.stochastic());

  CHECK(parse_spec("selfref").kind() == SourceKind::SelfRef);
  CHECK_FALSE(parse_spec("selfref").stochastic());
  CHECK_FALSE(parse_spec("classic:1,2").stochastic());
}

TEST_CASE("markov descriptors default their start letter to the first letter", "[sources]") {
  const SourceSpec spec = parse_spec("markov:p=0.99,a=1,b=3");
  CHECK(spec.kind() == SourceKind::Markov);
  CHECK(spec.start() == Letter(1));
  CHECK(spec.to_string() == "markov:p=0.99,a=1,b=3,start=1");
  CHECK(spec.stochastic());
}

TEST_CASE("syntax errors carry the byte offset of the fault", "[sources]") {
  expect_parse_error_at("bogus", 0);
  expect_parse_error_at("markov:q=0.5", 7);
  expect_parse_error_at("classic:1", 9);
  expect_parse_error_at("periodic:", 9);
  expect_parse_error_at("iid:p=0.5,a=1", 13);
}

TEST_CASE("well-formed descriptors with invalid values are domain errors", "[sources]") {
  CHECK_THROWS_AS(parse_spec("iid:p=1.2,a=1,b=2"), DomainError);
  CHECK_THROWS_AS(parse_spec("iid:p=0,a=1,b=2"), DomainError);
  CHECK_THROWS_AS(parse_spec("iid:p=1,a=1,b=2"), DomainError);
  CHECK_THROWS_AS(parse_spec("classic:2,2"), DomainError);
  CHECK_THROWS_AS(parse_spec("classic:0,2"), DomainError);
  CHECK_THROWS_AS(parse_spec("periodic:123"), DomainError);
  CHECK_THROWS_AS(parse_spec("markov:p=0.5,a=1,b=3,start=2"), DomainError);
  // value faults are not syntax faults
  try {
    parse_spec("iid:p=1.2,a=1,b=2");
    FAIL("expected a domain error");
  } catch (const ParseError&) {
    FAIL("an out-of-range probability is not a syntax error");
  } catch (const DomainError&) {
  }
}

TEST_CASE("source alphabets resolve single-letter periodic patterns", "[sources]") {
  auto alpha = [](const char* text) { return parse_spec(text).alphabet(); };
  CHECK(alpha("periodic:2").lo() == Letter(1));
  CHECK(alpha("periodic:2").hi() == Letter(2));
  CHECK(alpha("periodic:1").hi() == Letter(2));
  CHECK(alpha("periodic:3").lo() == Letter(1));
  CHECK(alpha("periodic:3").hi() == Letter(3));
  CHECK(alpha("classic:1,3").hi() == Letter(3));
  CHECK(alpha("selfref").lo() == Letter(1));
  CHECK(alpha("selfref").hi() == Letter(2));
}

TEST_CASE("directing sources emit their defining sequences", "[sources]") {
  SourceState periodic(parse_spec("periodic:12"), Seed{});
  CHECK(take(periodic, 6) == Word{1, 2, 1, 2, 1, 2});

  SourceState classic(parse_spec("classic:1,3"), Seed{});
  CHECK(take(classic, 5) == Word{1, 3, 1, 3, 1});

  // a classic pair is ordered: the first letter listed is the first emitted
  const SourceSpec reversed = parse_spec("classic:3,1");
  CHECK(reversed.a() == Letter(3));
  CHECK(reversed.alphabet().lo() == Letter(1));
  CHECK(reversed.alphabet().hi() == Letter(3));
  SourceState swapped(reversed, Seed{});
  CHECK(take(swapped, 4) == Word{3, 1, 3, 1});

  SourceState markov(parse_spec("markov:p=0.2,a=1,b=3,start=3"), Seed{7});
  CHECK(markov.next() == Letter(3));

  SourceState selfref(parse_spec("selfref"), Seed{});
  CHECK(take(selfref, 10) == selfref_build(10).first);
}

TEST_CASE("iid sources hit their letter frequency", "[sources]") {
  SourceState source(parse_spec("iid:p=0.5,a=1,b=2"), Seed{1});
  std::uint64_t ones = 0;
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) ones += source.next() == Letter(1);
  const double freq = double(ones) / double(n);
  CHECK(std::abs(freq - 0.5) <= 0.002);
  CHECK(source.position() == n);
}

TEST_CASE("the coupled self-referential build matches its worked prefix", "[sources]") {
  const auto [t1, o1] = selfref_build(1);
  CHECK(t1 == Word{2});
  CHECK(o1 == Word{2, 2});
  CHECK(selfref_build(4).first == Word{2, 1, 1, 2});
  const auto [t7, o7] = selfref_build(7);
  CHECK(t7 == Word{2, 1, 1, 2, 1, 1, 2});
  CHECK(o7 == Word{2, 2, 1, 1, 1, 2, 1, 1, 1, 2});
  CHECK_THROWS_AS(selfref_build(0), DomainError);
}

TEST_CASE("the self-referential pair is a fixed point of the construction", "[sources]") {
  for (std::uint64_t n : {1, 2, 3, 5, 17, 100, 2000}) {
    const auto [t, o] = selfref_build(n);
    INFO("n=" << n);
    CHECK(direct_finite(t) == o);
    CHECK(o.count(Letter(2)) == t.count(Letter(2)) + 1);
  }
}

TEST_CASE("equal seeds reproduce stochastic sources exactly", "[sources]") {
  const SourceSpec spec = parse_spec("iid:p=0.6,a=1,b=3");
  SourceState a(spec, Seed{99});
  SourceState b(spec, Seed{99});
  SourceState c(spec, Seed{100});
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 2000; ++i) {
    const Letter xa = a.next();
    const Letter xb = b.next();
    const Letter xc = c.next();
    all_equal = all_equal && xa == xb;
    any_diff = any_diff || xa != xc;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("source invariant suite passes", "[sources]") {
  VerifyOptions options;
  options.fast = true;
  for (const Check& check : all_checks()) {
    if (!std::string_view(check.name).starts_with("sources/")) continue;
    const std::string detail = check.fn(options);
    INFO(check.name << ": " << detail);
    CHECK(detail.empty());
  }
}
