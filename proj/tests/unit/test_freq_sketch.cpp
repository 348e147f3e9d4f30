#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "distrack/error.hpp"
#include "distrack/freq_sketch.hpp"

using distrack::WeightedMG;

namespace {

struct Tuple {
  std::uint64_t e;
  double w;
};

std::vector<Tuple> random_stream(std::mt19937_64& rng, std::size_t n, std::uint64_t universe) {
  std::uniform_int_distribution<std::uint64_t> pick(1, universe);
  std::uniform_real_distribution<double> weight(1.0, 50.0);
  std::vector<Tuple> out(n);
  for (auto& t : out) {
    // Skew the draw so some elements are genuinely frequent.
    const std::uint64_t a = pick(rng), b = pick(rng);
    t.e = std::min(a, b);
    t.w = weight(rng);
  }
  return out;
}

std::map<std::uint64_t, double> exact(const std::vector<Tuple>& s) {
  std::map<std::uint64_t, double> f;
  for (const auto& t : s) f[t.e] += t.w;
  return f;
}

}  // namespace

TEST_SUITE("freq_sketch") {
  TEST_CASE("shrink subtracts the smallest counter") {
    WeightedMG mg(2);
    mg.update(1, 5.0);  // a
    mg.update(2, 3.0);  // b
    mg.update(3, 2.0);  // c
    CHECK(mg.size() == 2);
    CHECK(mg.estimate(1) == doctest::Approx(3.0));
    CHECK(mg.estimate(2) == doctest::Approx(1.0));
    CHECK(mg.estimate(3) == 0.0);
    CHECK(mg.processed_weight() == doctest::Approx(10.0));
  }

  TEST_CASE("no shrink below capacity keeps exact counts") {
    WeightedMG mg(3);
    mg.update(7, 1.5);
    mg.update(8, 2.0);
    mg.update(7, 0.25);
    CHECK(mg.estimate(7) == doctest::Approx(1.75));
    CHECK(mg.estimate(8) == doctest::Approx(2.0));
    CHECK(mg.estimate(9) == 0.0);
  }

  TEST_CASE("bad arguments are rejected") {
    CHECK_THROWS_AS(WeightedMG(0), distrack::Error);
    WeightedMG mg(4);
    CHECK_THROWS_AS(mg.update(1, 0.0), distrack::Error);
    CHECK_THROWS_AS(mg.update(1, -2.0), distrack::Error);
    CHECK_THROWS_AS(mg.update(1, std::nan("")), distrack::Error);
    CHECK_THROWS_AS(mg.update(1, INFINITY), distrack::Error);
    CHECK(mg.empty());
    CHECK(mg.processed_weight() == 0.0);
  }

  TEST_CASE("underestimate within W/l on random streams") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t cap = 1 + trial % 12;
      const auto s = random_stream(rng, 300 + 7 * trial, 40);
      WeightedMG mg(cap);
      oracle::BruteMG brute(cap);
      for (const auto& t : s) {
        mg.update(t.e, t.w);
        brute.update(t.e, t.w);
      }
      const auto f = exact(s);
      double w = 0.0;
      for (const auto& [e, v] : f) w += v;
      CHECK(mg.processed_weight() == doctest::Approx(w));
      CHECK(mg.size() <= cap);
      for (const auto& [e, v] : f) {
        const double est = mg.estimate(e);
        CHECK(est <= v + 1e-9);
        CHECK(v - est <= w / static_cast<double>(cap) + 1e-9);
        CHECK(est == doctest::Approx(brute.estimate(e)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("identical input gives identical sketch") {
    std::mt19937_64 rng(5);
    const auto s = random_stream(rng, 2000, 100);
    WeightedMG a(10), b(10);
    for (const auto& t : s) {
      a.update(t.e, t.w);
      b.update(t.e, t.w);
    }
    CHECK(a.counters() == b.counters());
  }

  TEST_CASE("merge of split sketches keeps the bound") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t cap = 4 + trial % 6;
      const std::size_t parts = 2 + trial % 5;
      const auto s = random_stream(rng, 1000, 60);
      std::vector<WeightedMG> pieces(parts, WeightedMG(cap));
      for (std::size_t i = 0; i < s.size(); ++i) pieces[i % parts].update(s[i].e, s[i].w);
      WeightedMG merged(cap);
      for (const auto& p : pieces) merged = distrack::merge(merged, p, cap);
      WeightedMG folded(cap);
      for (const auto& p : pieces) folded.merge_in(p);

      const auto f = exact(s);
      double w = 0.0;
      for (const auto& [e, v] : f) w += v;
      CHECK(merged.processed_weight() == doctest::Approx(w));
      CHECK(merged.size() <= cap);
      CHECK(folded.size() <= cap);
      for (const auto& [e, v] : f) {
        CHECK(merged.estimate(e) <= v + 1e-9);
        CHECK(v - merged.estimate(e) <= w / static_cast<double>(cap) + 1e-9);
        CHECK(folded.estimate(e) == doctest::Approx(merged.estimate(e)));
      }
    }
  }

  TEST_CASE("merge with an empty sketch is the identity") {
    WeightedMG a(3), empty(3);
    a.update(1, 4.0);
    a.update(2, 2.0);
    const auto m = distrack::merge(a, empty, 3);
    CHECK(m.counters() == a.counters());
    CHECK(m.processed_weight() == a.processed_weight());
  }

  TEST_CASE("merge subtracts the (l+1)-th largest counter") {
    WeightedMG a(2), b(2);
    a.update(1, 10.0);
    a.update(2, 6.0);
    b.update(3, 4.0);
    b.update(4, 1.0);
    const auto m = distrack::merge(a, b, 2);
    CHECK(m.size() == 2);
    CHECK(m.estimate(1) == doctest::Approx(6.0));
    CHECK(m.estimate(2) == doctest::Approx(2.0));
    CHECK(m.estimate(3) == 0.0);
  }

  TEST_CASE("clear resets the sketch") {
    WeightedMG mg(2);
    mg.update(1, 3.0);
    mg.clear();
    CHECK(mg.empty());
    CHECK(mg.processed_weight() == 0.0);
  }
}
