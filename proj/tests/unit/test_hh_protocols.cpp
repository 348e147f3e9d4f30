#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"

#include "distrack/data.hpp"
#include "distrack/error.hpp"
#include "distrack/hh_protocols.hpp"

using namespace distrack;

namespace {

struct Counts {
  std::size_t up = 0;
  std::size_t broadcasts = 0;
  std::size_t deltas = 0;
};

// Feeds one tuple to `site`, delivers every message, applies broadcasts to all
// sites before returning.
void step(HHProtocolInstance& inst, std::size_t site, ElementId e, double w, Counts& c) {
  std::vector<HHMessage> up, down;
  inst.sites[site]->ingest(e, w, up);
  for (const auto& m : up) {
    c.up += m.units();
    if (m.kind == HHMessageKind::ElementDelta) ++c.deltas;
    inst.coordinator->receive(m, down);
  }
  for (const auto& b : down) {
    ++c.broadcasts;
    for (auto& s : inst.sites) s->apply_broadcast(b);
  }
}

using Check = std::function<void(const HHProtocolInstance&, const std::map<ElementId, double>&, double)>;

// Round-robin over sites; `check` runs after every tuple.
Counts drive(HHProtocolInstance& inst, const ElementStream& s, const Check& check = {}) {
  Counts c;
  std::map<ElementId, double> f;
  double w = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    step(inst, i % inst.sites.size(), s.elements[i], s.weights[i], c);
    f[s.elements[i]] += s.weights[i];
    w += s.weights[i];
    if (check) check(inst, f, w);
  }
  return c;
}

ElementStream zipf(std::size_t n, std::uint64_t seed, double beta = 1000.0, std::size_t u = 10000) {
  ZipfConfig zc;
  zc.n = n;
  zc.seed = seed;
  zc.beta = beta;
  zc.universe = u;
  return gen_zipfian(zc);
}

HHParams params(double eps, std::size_t m, double beta = 1000.0) {
  HHParams p;
  p.eps = eps;
  p.sites = m;
  p.beta = beta;
  return p;
}

HHMessage bcast_weight(double v) {
  HHMessage b{HHMessageKind::BroadcastWeight};
  b.value = v;
  return b;
}

}  // namespace

TEST_SUITE("hh_protocols") {
  TEST_CASE("protocol names") {
    CHECK(parse_hh_protocol("p3") == HHProtocol::P3wor);
    CHECK(parse_hh_protocol("p3wr") == HHProtocol::P3wr);
    CHECK(to_string(HHProtocol::P4) == "p4");
    CHECK_THROWS_AS(parse_hh_protocol("p5"), Error);
  }

  TEST_CASE("message sizes") {
    HHMessage d{HHMessageKind::ElementDelta, 0};
    CHECK(d.scalar_size() == 2);
    CHECK(d.units() == 1);
    CHECK(d.slots() == 1);
    auto mg = std::make_shared<WeightedMG>(4);
    mg->update(1, 2.0);
    mg->update(2, 3.0);
    mg->update(3, 1.0);
    HHMessage s{HHMessageKind::SummaryAndWeight, 0};
    s.summary = mg;
    CHECK(s.scalar_size() == 7);
    CHECK(s.units() == 4);
    CHECK(s.slots() == 3);
    HHMessage b = bcast_weight(10.0);
    CHECK(b.is_broadcast());
    CHECK(b.scalar_size() == 1);
    HHMessage ps{HHMessageKind::PrioritySample, 0};
    CHECK(ps.scalar_size() == 3);
    ps.indexed = true;
    CHECK(ps.scalar_size() == 4);
    ps.continues = true;
    CHECK(ps.scalar_size() == 2);
    CHECK(ps.units() == 0);
    CHECK(ps.slots() == 0);
  }

  TEST_CASE("construction and weight validation") {
    CHECK_THROWS_AS(make_hh_protocol(HHProtocol::P2, params(0.0, 5), 1), Error);
    CHECK_THROWS_AS(make_hh_protocol(HHProtocol::P2, params(1.0, 5), 1), Error);
    CHECK_THROWS_AS(make_hh_protocol(HHProtocol::P2, params(0.1, 0), 1), Error);
    CHECK_THROWS_AS(make_hh_protocol(HHProtocol::P2, params(0.1, 5, 0.5), 1), Error);
    for (auto proto : {HHProtocol::P1, HHProtocol::P2, HHProtocol::P3wor, HHProtocol::P3wr, HHProtocol::P4}) {
      auto inst = make_hh_protocol(proto, params(0.5, 2, 10.0), 1);
      std::vector<HHMessage> out;
      CHECK_THROWS_AS(inst.sites[0]->ingest(1, 0.5, out), Error);
      CHECK_THROWS_AS(inst.sites[0]->ingest(1, 10.5, out), Error);
      CHECK_THROWS_AS(inst.sites[0]->ingest(1, NAN, out), Error);
      CHECK(out.empty());
      inst.sites[0]->ingest(1, 10.0, out);
    }
  }

  TEST_CASE("coordinators reject foreign message kinds") {
    HHMessage snap{HHMessageKind::CountSnapshot, 0};
    HHMessage total{HHMessageKind::TotalWeight, 0};
    std::vector<HHMessage> out;
    for (auto proto : {HHProtocol::P1, HHProtocol::P2, HHProtocol::P3wor, HHProtocol::P3wr}) {
      auto inst = make_hh_protocol(proto, params(0.5, 2), 1);
      try {
        inst.coordinator->receive(snap, out);
        FAIL("accepted a snapshot");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Protocol);
      }
    }
    auto p4 = make_hh_protocol(HHProtocol::P4, params(0.5, 2), 1);
    HHMessage delta{HHMessageKind::ElementDelta, 0};
    CHECK_THROWS_AS(p4.coordinator->receive(delta, out), Error);
    HHMessage stray{HHMessageKind::CountSnapshot, 7};
    CHECK_THROWS_AS(p4.coordinator->receive(stray, out), Error);
    auto p3 = make_hh_protocol(HHProtocol::P3wor, params(0.5, 2), 1);
    CHECK_THROWS_AS(p3.coordinator->receive(total, out), Error);
  }

  TEST_CASE("P2 site thresholds at (eps/m) W-hat") {
    auto inst = make_hh_protocol(HHProtocol::P2, params(0.1, 10), 1);
    auto& site = *inst.sites[0];
    site.apply_broadcast(bcast_weight(1000.0));  // threshold 10
    std::vector<HHMessage> out;
    site.ingest(1, 4.0, out);
    site.ingest(1, 5.0, out);
    CHECK(out.empty());
    site.ingest(1, 1.0, out);
    REQUIRE(out.size() == 2);
    CHECK(out[0].kind == HHMessageKind::TotalWeight);
    CHECK(out[0].value == doctest::Approx(10.0));
    CHECK(out[1].kind == HHMessageKind::ElementDelta);
    CHECK(out[1].element == 1);
    CHECK(out[1].value == doctest::Approx(10.0));
    out.clear();
    site.ingest(2, 9.0, out);  // both counters restarted
    CHECK(out.empty());
  }

  TEST_CASE("P2 coordinator broadcasts on the m-th total report") {
    auto inst = make_hh_protocol(HHProtocol::P2, params(0.1, 3), 1);
    std::vector<HHMessage> out;
    HHMessage t{HHMessageKind::TotalWeight, 0};
    t.value = 5.0;
    inst.coordinator->receive(t, out);
    inst.coordinator->receive(t, out);
    CHECK(out.empty());
    inst.coordinator->receive(t, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].kind == HHMessageKind::BroadcastWeight);
    CHECK(out[0].value == doctest::Approx(15.0));
    CHECK(inst.coordinator->rounds() == 2);
    inst.coordinator->receive(t, out);
    CHECK(out.size() == 1);
  }

  TEST_CASE("P1 site gates summaries at (eps/2m) W-hat") {
    auto inst = make_hh_protocol(HHProtocol::P1, params(0.1, 10), 1);
    auto& site = *inst.sites[0];
    site.apply_broadcast(bcast_weight(1000.0));  // gate 5
    std::vector<HHMessage> out;
    site.ingest(3, 2.0, out);
    site.ingest(4, 2.0, out);
    CHECK(out.empty());
    site.ingest(3, 1.0, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].kind == HHMessageKind::SummaryAndWeight);
    CHECK(out[0].value == doctest::Approx(5.0));
    CHECK(out[0].summary->estimate(3) == doctest::Approx(3.0));
    CHECK(out[0].units() == 3);
  }

  TEST_CASE("P1 W-hat grows monotonically by more than 1+eps/2 per broadcast") {
    const auto s = zipf(20000, 3);
    auto inst = make_hh_protocol(HHProtocol::P1, params(0.1, 8), 4);
    double last = 8.0;
    std::size_t seen = 0;
    std::vector<HHMessage> up, down;
    for (std::size_t i = 0; i < s.size(); ++i) {
      up.clear();
      down.clear();
      inst.sites[i % 8]->ingest(s.elements[i], s.weights[i], up);
      for (const auto& m : up) inst.coordinator->receive(m, down);
      for (const auto& b : down) {
        CHECK(b.value / last > 1.0 + 0.05);
        last = b.value;
        ++seen;
        for (auto& site : inst.sites) site->apply_broadcast(b);
      }
    }
    CHECK(seen > 5);
  }

  TEST_CASE("P4 emission probability is 1/2 when pw = ln 2") {
    // p = 2 sqrt(m) / (eps W-hat) = 8 / W-hat with m = 4, eps = 0.5.
    auto inst = make_hh_protocol(HHProtocol::P4, params(0.5, 4), 9);
    auto& site = *inst.sites[0];
    site.apply_broadcast(bcast_weight(8.0 / std::log(2.0)));
    std::vector<HHMessage> out;
    const int trials = 10000;
    int snaps = 0;
    for (int i = 0; i < trials; ++i) {
      out.clear();
      site.ingest(static_cast<ElementId>(i), 1.0, out);
      for (const auto& m : out) snaps += m.kind == HHMessageKind::CountSnapshot;
    }
    CHECK(std::abs(snaps / static_cast<double>(trials) - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
  }

  TEST_CASE("P4 coordinator adds 1/p to the snapshot") {
    // m = 16, eps = 0.78125: once W-hat reaches 1024, p = 8 / 800 = 0.01.
    auto inst = make_hh_protocol(HHProtocol::P4, params(0.78125, 16), 1);
    std::vector<HHMessage> out;
    HHMessage t{HHMessageKind::TotalWeight, 2};
    t.value = 1024.0;
    inst.coordinator->receive(t, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].value == 1024.0);
    HHMessage snap{HHMessageKind::CountSnapshot, 0};
    snap.element = 5;
    snap.value = 40.0;
    inst.coordinator->receive(snap, out);
    CHECK(inst.coordinator->estimates().of(5) == doctest::Approx(140.0));
    // A second site adds its own snapshot; a repeat from site 0 replaces.
    snap.origin = 1;
    snap.value = 10.0;
    inst.coordinator->receive(snap, out);
    CHECK(inst.coordinator->estimates().of(5) == doctest::Approx(250.0));
    snap.origin = 0;
    snap.value = 60.0;
    inst.coordinator->receive(snap, out);
    CHECK(inst.coordinator->estimates().of(5) == doctest::Approx(270.0));
  }

  TEST_CASE("P3wr batches extra sampler indices onto one message") {
    HHParams p = params(0.5, 1);
    p.sample_size = 8;
    auto inst = make_hh_protocol(HHProtocol::P3wr, p, 2);
    std::vector<HHMessage> out;
    inst.sites[0]->ingest(1, 5.0, out);  // w >= tau = 1: every sampler fires
    REQUIRE(out.size() == 8);
    std::size_t units = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      CHECK(out[k].continues == (k > 0));
      CHECK(out[k].index == k);
      units += out[k].units();
    }
    CHECK(units == 1);
  }

  TEST_CASE("lemma1 classification over a perturbation grid") {
    for (double phi : {0.02, 0.05, 0.1, 0.3, 0.5, 0.9}) {
      for (double eps : {1e-3, 1e-2, 0.01 * phi, 0.5 * phi}) {
        const double w = 1e6;
        for (double se : {-1.0, -0.5, 0.0, 0.5, 1.0})
          for (double sw : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
            const double w_hat = w * (1.0 + sw * eps / 5.0);
            const double light = (phi - eps) * w + se * eps / 6.0 * w;
            CHECK_FALSE(lemma1_classify(light, w_hat, phi, eps));
            const double heavy = phi * w + se * eps / 6.0 * w;
            CHECK(lemma1_classify(heavy, w_hat, phi, eps));
          }
      }
    }
    CHECK(lemma1_classify(50.0, 1000.0, 0.05, 0.01));  // f/W = phi, exact
    CHECK(lemma1_classify(50.0 + 1e-9, 1000.0, 0.05, 0.0));
    CHECK_FALSE(lemma1_classify(50.0 - 1e-9, 1000.0, 0.05, 0.0));
    CHECK_THROWS_AS(lemma1_classify(1.0, 0.0, 0.05, 0.01), Error);
  }

  TEST_CASE("query on empty and single-element state") {
    HHEstimates empty;
    CHECK(hh_query(empty, 0.05, 0.01).empty());
    for (auto proto : {HHProtocol::P1, HHProtocol::P2, HHProtocol::P3wor, HHProtocol::P4}) {
      auto inst = make_hh_protocol(proto, params(0.1, 3), 5);
      ElementStream s;
      for (int i = 0; i < 200; ++i) s.push(42, 1.0 + (i % 5));
      drive(inst, s);
      const auto ans = hh_query(inst.coordinator->estimates(), 1.0, 0.1);
      REQUIRE(ans.size() == 1);
      CHECK(ans[0].first == 42);
    }
  }

  TEST_CASE("P1 and P2 track every frequency within eps W at every prefix") {
    for (auto proto : {HHProtocol::P1, HHProtocol::P2}) {
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto s = zipf(4000, seed, 100.0, 200);
        const double eps = 0.05;
        auto inst = make_hh_protocol(proto, params(eps, 5, 100.0), seed);
        std::size_t bad = 0;
        drive(inst, s, [&](const HHProtocolInstance& in, const std::map<ElementId, double>& f, double w) {
          const auto est = in.coordinator->estimates();
          for (const auto& [e, v] : f)
            if (std::abs(est.of(e) - v) > eps * w + 1e-9) ++bad;
        });
        CHECK(bad == 0);
      }
    }
  }

  TEST_CASE("P1 and P2 never return elements below phi - eps") {
    const double phi = 0.05, eps = 0.01;
    for (auto proto : {HHProtocol::P1, HHProtocol::P2}) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = zipf(20000, 100 + seed, 1000.0, 1000);
        auto inst = make_hh_protocol(proto, params(eps, 10), seed);
        drive(inst, s);
        std::map<ElementId, double> f;
        for (std::size_t i = 0; i < s.size(); ++i) f[s.elements[i]] += s.weights[i];
        const double w = s.total_weight();
        for (const auto& [e, est] : hh_query(inst.coordinator->estimates(), phi, eps))
          CHECK(f[e] / w >= phi - eps);
        for (const auto& [e, v] : f)
          if (v >= phi * w) {
            const auto ans = hh_query(inst.coordinator->estimates(), phi, eps);
            bool found = false;
            for (const auto& a : ans) found |= a.first == e;
            CHECK(found);
          }
      }
    }
  }

  TEST_CASE("P2 element updates stay within m times rounds") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto s = zipf(30000, seed);
      auto inst = make_hh_protocol(HHProtocol::P2, params(0.01, 20), seed);
      Counts c;
      for (std::size_t i = 0; i < s.size(); ++i) {
        step(inst, (i * 7 + seed) % 20, s.elements[i], s.weights[i], c);
        CHECK(c.deltas <= 20 * inst.coordinator->rounds());
      }
    }
  }

  TEST_CASE("P3 estimates within eps W in at least 90% of trials") {
    const double eps = 0.05;
    const auto s = zipf(20000, 77);
    std::map<ElementId, double> f;
    for (std::size_t i = 0; i < s.size(); ++i) f[s.elements[i]] += s.weights[i];
    const double w = s.total_weight();
    int good = 0;
    const int trials = 20;
    for (int r = 0; r < trials; ++r) {
      auto inst = make_hh_protocol(HHProtocol::P3wor, params(eps, 10), 300 + static_cast<std::uint64_t>(r));
      drive(inst, s);
      const auto est = inst.coordinator->estimates();
      bool ok = std::abs(est.total - w) <= eps * w;
      for (const auto& [e, v] : f) ok = ok && std::abs(est.of(e) - v) <= eps * w;
      good += ok;
    }
    CHECK(good >= 18);
  }

  TEST_CASE("P4 per-element error within eps W in at least 60% of trials") {
    const double eps = 0.05;
    const auto s = zipf(20000, 78);
    std::map<ElementId, double> f;
    for (std::size_t i = 0; i < s.size(); ++i) f[s.elements[i]] += s.weights[i];
    const double w = s.total_weight();
    std::size_t good = 0, total = 0;
    for (int r = 0; r < 20; ++r) {
      auto inst = make_hh_protocol(HHProtocol::P4, params(eps, 10), 900 + static_cast<std::uint64_t>(r));
      drive(inst, s);
      const auto est = inst.coordinator->estimates();
      for (ElementId e = 1; e <= 5; ++e) {
        ++total;
        good += std::abs(est.of(e) - f[e]) <= eps * w;
      }
    }
    CHECK(static_cast<double>(good) >= 0.6 * static_cast<double>(total));
  }

  TEST_CASE("P4 median of copies") {
    HHParams p = params(0.05, 10);
    p.p4_copies = 3;
    const auto s = zipf(20000, 79);
    auto inst = make_hh_protocol(HHProtocol::P4, p, 4);
    const auto c = drive(inst, s);
    CHECK(c.up > 0);
    std::map<ElementId, double> f;
    for (std::size_t i = 0; i < s.size(); ++i) f[s.elements[i]] += s.weights[i];
    const auto est = inst.coordinator->estimates();
    CHECK(std::abs(est.of(1) - f[1]) <= 0.05 * s.total_weight());
    HHParams bad = p;
    bad.p4_copies = 0;
    CHECK_THROWS_AS(make_hh_protocol(HHProtocol::P4, bad, 1), Error);
  }

  TEST_CASE("same seed gives the same estimates") {
    const auto s = zipf(10000, 5);
    for (auto proto : {HHProtocol::P3wor, HHProtocol::P3wr, HHProtocol::P4}) {
      HHParams p = params(0.2, 4);
      auto a = make_hh_protocol(proto, p, 11), b = make_hh_protocol(proto, p, 11);
      const auto ca = drive(a, s), cb = drive(b, s);
      CHECK(ca.up == cb.up);
      CHECK(ca.broadcasts == cb.broadcasts);
      const auto ea = a.coordinator->estimates(), eb = b.coordinator->estimates();
      CHECK(ea.total == eb.total);
      CHECK(ea.per_element == eb.per_element);
    }
  }
}
