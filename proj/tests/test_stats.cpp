#include <catch2/catch_amalgamated.hpp>

#include "randkol/randkol.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace {

using namespace randkol;

constexpr double kDTLimit = 0.6403882032022076;   // (1 + sqrt(17)) / 8
constexpr double kDOLimit = 0.7192235935955847;   // (7 - sqrt(17)) / 4

}  // namespace

TEST_CASE("default checkpoints double from 1024 and end at the length", "[stats]") {
  using V = std::vector<std::uint64_t>;
  CHECK(default_checkpoints(5000) == V{1024, 2048, 4096, 5000});
  CHECK(default_checkpoints(100) == V{100});
  CHECK(default_checkpoints(1024) == V{1024});
  CHECK(default_checkpoints(2048) == V{1024, 2048});
  CHECK_THROWS_AS(default_checkpoints(0), DomainError);
}

TEST_CASE("single-realization traces count the classic prefix", "[stats]") {
  const std::uint64_t cps[] = {15};
  const DensityTrace t =
      density_trace(SourceSpec::classic(Letter(1), Letter(2)), 15, cps, Seed{});
  REQUIRE(t.checkpoints.size() == 1);
  CHECK(t.checkpoints[0].position == 15);
  CHECK(t.checkpoints[0].count_lo == 7);
  CHECK(t.checkpoints[0].count_hi == 8);
  CHECK(t.checkpoints[0].density_lo == Catch::Approx(7.0 / 15.0).margin(1e-15));
}

TEST_CASE("checkpoints are validated and normalized", "[stats]") {
  const SourceSpec spec = SourceSpec::classic(Letter(1), Letter(2));
  const std::uint64_t dup[] = {15, 3, 15};
  const DensityTrace t = density_trace(spec, 15, dup, Seed{});
  REQUIRE(t.checkpoints.size() == 2);
  CHECK(t.checkpoints[0].position == 3);
  CHECK(t.checkpoints[1].position == 15);

  const std::uint64_t zero[] = {0};
  CHECK_THROWS_AS(density_trace(spec, 10, zero, Seed{}), DomainError);
  const std::uint64_t beyond[] = {11};
  CHECK_THROWS_AS(density_trace(spec, 10, beyond, Seed{}), DomainError);
  CHECK_THROWS_AS(density_trace(spec, 10, std::span<const std::uint64_t>{}, Seed{}),
                  DomainError);
}

TEST_CASE("periodic directing sequences settle near their rational densities", "[stats]") {
  const std::uint64_t million[] = {1000000};
  const double d122 =
      density_trace(parse_spec("periodic:122"), 1000000, million, Seed{})
          .checkpoints[0]
          .density_lo;
  CHECK(d122 >= 0.323);
  CHECK(d122 <= 0.343);

  const std::uint64_t grid[] = {64, 4096};
  const DensityTrace all2 = density_trace(parse_spec("periodic:2"), 4096, grid, Seed{});
  for (const TraceCheckpoint& cp : all2.checkpoints) {
    CHECK(cp.count_lo == 0);
    CHECK(cp.density_lo == 0.0);
    CHECK(cp.count_hi == cp.position);
  }
}

TEST_CASE("monte carlo summaries satisfy their field identities", "[stats]") {
  std::vector<std::uint64_t> counts;
  const MCResult r =
      mc_density(parse_spec("iid:p=0.3,a=1,b=2"), 10000, 24, Seed{7}, 1, &counts);
  CHECK(r.trials == 24);
  REQUIRE(counts.size() == 24);
  CHECK(r.mean == Catch::Approx(r.sum / 24.0).margin(1e-15));
  CHECK(r.std_error >= 0.0);
  CHECK(r.seed.value == 7);
  // the summary is exactly the mean of the reported per-trial densities
  double total = 0.0;
  for (std::uint64_t c : counts) total += double(c) / 10000.0;
  CHECK(r.mean == Catch::Approx(total / 24.0).margin(1e-13));
  CHECK(r.mean > 0.25);
  CHECK(r.mean < 0.35);
  CHECK_THROWS_AS(mc_density(parse_spec("iid:p=0.3,a=1,b=2"), 0, 5, Seed{}), DomainError);
  CHECK_THROWS_AS(mc_density(parse_spec("iid:p=0.3,a=1,b=2"), 10, 0, Seed{}), DomainError);
}

TEST_CASE("summary merging pools counts exactly", "[stats]") {
  const SourceSpec spec = parse_spec("iid:p=0.5,a=1,b=2");
  const MCResult a = mc_density(spec, 2000, 10, Seed{1});
  const MCResult b = mc_density(spec, 2000, 6, Seed{2});
  const MCResult ab = merge(a, b);
  const MCResult ba = merge(b, a);
  CHECK(ab.trials == 16);
  CHECK(ab.sum == ba.sum);
  CHECK(ab.sum_sq == ba.sum_sq);
  CHECK(ab.mean == Catch::Approx((a.sum + b.sum) / 16.0).margin(1e-15));

  const MCResult empty{};
  const MCResult left = merge(empty, a);
  const MCResult right = merge(a, empty);
  CHECK(left.trials == a.trials);
  CHECK(left.sum == a.sum);
  CHECK(left.mean == a.mean);
  CHECK(left.seed.value == a.seed.value);
  CHECK(right.sum == a.sum);
  CHECK(right.std_error == a.std_error);
  CHECK(right.seed.value == a.seed.value);
}

TEST_CASE("trial summaries are independent of worker count", "[stats]") {
  const SourceSpec spec = parse_spec("markov:p=0.7,a=1,b=2,start=1");
  const MCResult t1 = mc_density(spec, 20000, 30, Seed{5}, 1);
  const MCResult t4 = mc_density(spec, 20000, 30, Seed{5}, 4);
  CHECK(t1.sum == t4.sum);
  CHECK(t1.sum_sq == t4.sum_sq);
  CHECK(t1.mean == t4.mean);
  CHECK(t1.std_error == t4.std_error);
}

TEST_CASE("pointwise estimates match the enumerated law", "[stats]") {
  // X_2 = 1 exactly when the directing pair is (1,1): probability 1/4
  const MCResult r = mc_pointwise(parse_spec("iid:p=0.5,a=1,b=2"), 2, 1000000, Seed{21});
  CHECK(r.trials == 1000000);
  CHECK(std::abs(r.mean - 0.25) <= 0.0013);

  // a deterministic start pins the first letter
  CHECK(mc_pointwise(parse_spec("markov:p=0.8,a=1,b=3,start=1"), 1, 50, Seed{3}).mean ==
        1.0);
  CHECK(mc_pointwise(parse_spec("markov:p=0.8,a=1,b=3,start=3"), 1, 50, Seed{3}).mean ==
        0.0);
}

TEST_CASE("a near-deterministic flip chain still mixes pointwise", "[stats]") {
  const MCResult r =
      mc_pointwise(parse_spec("markov:p=0.99,a=1,b=3,start=1"), 10000, 10000, Seed{17});
  CHECK(std::abs(r.mean - 0.5) <= 0.015);
}

TEST_CASE("self-referential densities at the worked endpoints", "[stats]") {
  const SelfRefDensities one = selfref_densities(1);
  CHECK(one.t_density1 == 0.0);
  CHECK(one.o_density1 == 0.0);
  CHECK(std::isnan(one.growth_residual));

  const SelfRefDensities big = selfref_densities(1000000);
  CHECK(std::abs(big.t_density1 - kDTLimit) <= 0.005);
  CHECK(std::abs(big.o_density1 - kDOLimit) <= 0.005);
  CHECK(std::abs(big.balance_residual) <= 2.0 / 1000000.0);
  CHECK(std::abs(big.growth_residual) <= 0.001);
}

TEST_CASE("the balance identity holds with its exact half-integer constant", "[stats]") {
  for (std::uint64_t n : {1, 10, 100, 1000, 12345, 100000}) {
    const double scaled = selfref_densities(n).balance_residual * double(n);
    INFO("n=" << n << " scaled residual " << scaled);
    CHECK((std::abs(scaled + 0.5) <= 1e-9 || std::abs(scaled + 1.0) <= 1e-9));
  }
}

TEST_CASE("the coupled scan verifies its structural identities", "[stats]") {
  const auto cps = default_checkpoints(100000);
  const SelfRefTrace t = selfref_trace(100000, cps);
  CHECK(t.first_coupling_violation == 0);
  CHECK(t.first_counting_violation == 0);
  REQUIRE(t.checkpoints.size() == cps.size());
  for (const SelfRefCheckpoint& cp : t.checkpoints) {
    INFO("step " << cp.step);
    CHECK(cp.o_count1 + cp.o_count2 == cp.o_length);
    CHECK(cp.prefix_count1 + cp.prefix_count2 == cp.step);
    CHECK(std::abs(cp.balance_residual()) <= 2.0 / double(cp.step));
  }
  CHECK_THROWS_AS(selfref_trace(0, cps), DomainError);
}

TEST_CASE("thread resolution prefers explicit requests over the environment", "[stats]") {
  CHECK(resolve_threads(3) == 3);
  setenv("RANDKOL_THREADS", "7", 1);
  CHECK(resolve_threads(0) == 7);
  setenv("RANDKOL_THREADS", "not-a-number", 1);
  CHECK(resolve_threads(0) >= 1);
  unsetenv("RANDKOL_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("stats invariant suite passes", "[stats]") {
  VerifyOptions options;
  options.fast = true;
  for (const Check& check : all_checks()) {
    if (!std::string_view(check.name).starts_with("stats/")) continue;
    const std::string detail = check.fn(options);
    INFO(check.name << ": " << detail);
    CHECK(detail.empty());
  }
}
