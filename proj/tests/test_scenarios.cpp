#include <doctest.h>

#include <cmath>
#include <set>

#include "ccbench/scenarios.hpp"

using namespace ccb;

TEST_CASE("bdp examples") {
  CHECK(bdp_bytes(48 * kMbps, 0.040) == doctest::Approx(240000));
  CHECK(bdp_bytes(12 * kMbps, 0.010) == doctest::Approx(15000));
  CHECK(bdp_bytes(192 * kMbps, 0.160) == doctest::Approx(3840000));
  CHECK_THROWS_AS(bdp_bytes(0, 0.04), Error);
  CHECK_THROWS_AS(bdp_bytes(48e6, 0), Error);
  CHECK_THROWS_AS(bdp_bytes(-1, 0.04), Error);
}

TEST_CASE("grid sizes") {
  CHECK(build_ccbench1_flat().size() == 150);
  CHECK(build_ccbench1_step().size() == 450);
  CHECK(build_ccbench2("cubic").size() == 125);
  CHECK(build_ccbench2(kSchemeUnderTest).size() == 125);
}

TEST_CASE("step trace alternates every seven seconds starting at bw1") {
  const auto t = step_trace(48 * kMbps, 0.5, kStepPeriod, 30);
  const auto& s = t.segments();
  REQUIRE(s.size() == 5);
  const double starts[] = {0, 7, 14, 21, 28};
  const double rates[] = {48, 24, 48, 24, 48};
  for (int i = 0; i < 5; ++i) {
    CHECK(s[i].start == starts[i]);
    CHECK(s[i].rate == rates[i] * kMbps);
  }
  CHECK(t.horizon() == 30);
}

TEST_CASE("step grid skips combinations above 200 Mbps") {
  for (const auto& s : build_ccbench1_step()) {
    REQUIRE(s.step_multiplier);
    CHECK_FALSE((s.bw == 96 * kMbps && *s.step_multiplier == 4));
  }
  std::set<std::pair<double, double>> combos;
  for (const auto& s : build_ccbench1_step())
    combos.insert({s.bw / kMbps, *s.step_multiplier});
  CHECK(combos.size() == 15);
}

TEST_CASE("ids are unique and reproducible") {
  for (auto b : {Benchmark::kCcBench1Flat, Benchmark::kCcBench1Step,
                 Benchmark::kCcBench2}) {
    const auto a = build_benchmark(b, b == Benchmark::kCcBench2
                                          ? GridSpec::ccbench2()
                                          : GridSpec::ccbench1());
    const auto c = build_benchmark(b, b == Benchmark::kCcBench2
                                          ? GridSpec::ccbench2()
                                          : GridSpec::ccbench1());
    std::set<std::string> ids;
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ids.insert(a[i].id);
      CHECK(a[i].id == c[i].id);
      CHECK(to_json(a[i]) == to_json(c[i]));
    }
    CHECK(ids.size() == a.size());
  }
}

TEST_CASE("every scenario lies inside the published parameter ranges") {
  auto check = [](const Scenario& s) {
    CAPTURE(s.id);
    CHECK(s.bw >= 12 * kMbps);
    CHECK(s.bw <= 192 * kMbps);
    CHECK(s.link.min_rtt >= 0.010 - 1e-12);
    CHECK(s.link.min_rtt <= 0.160 + 1e-12);
    REQUIRE(s.qs_bdp);
    CHECK(*s.qs_bdp >= 0.5);
    CHECK(*s.qs_bdp <= 16);
    const double bdp = s.bw * s.link.min_rtt / 8;
    CHECK(static_cast<double>(s.link.queue_capacity) ==
          doctest::Approx(std::max(1500.0, *s.qs_bdp * bdp)).epsilon(1e-6));
    CHECK_NOTHROW(s.validate());
  };
  for (const auto& s : build_ccbench1_flat()) {
    check(s);
    CHECK(s.flows.size() == 1);
    CHECK(s.duration == 30);
    CHECK(s.link.trace.segments().size() == 1);
  }
  for (const auto& s : build_ccbench1_step()) check(s);
  for (const auto& s : build_ccbench2("vegas")) {
    check(s);
    CHECK(*s.qs_bdp >= 1);
    CHECK(s.duration == 120);
    REQUIRE(s.flows.size() == 2);
    CHECK(s.flows[0] == ScenarioFlow{"cubic", 0});
    CHECK(s.flows[1] == ScenarioFlow{"vegas", 10});
    CHECK(s.measurement_start() == 10);
  }
}

TEST_CASE("step traces keep rates in range and change only on the cadence") {
  for (const auto& s : build_ccbench1_step()) {
    CAPTURE(s.id);
    const auto& segs = s.link.trace.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].rate >= 3 * kMbps);
      CHECK(segs[i].rate <= 200 * kMbps);
      const double k = segs[i].start / kStepPeriod;
      CHECK(k == std::round(k));
      if (i > 0) CHECK(segs[i].rate != segs[i - 1].rate);
    }
  }
}

TEST_CASE("the figure scenario is constructible on demand") {
  const Bytes queue = static_cast<Bytes>(5 * bdp_bytes(48 * kMbps, 0.040));
  const auto s = make_flat_scenario(48 * kMbps, 0.040, queue);
  CHECK(s.link.queue_capacity == 1200000);
  CHECK(s.duration == 30);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("manifest round trip preserves every scenario") {
  std::vector<Scenario> all = build_ccbench1_step();
  for (auto& s : build_ccbench2(kSchemeUnderTest)) all.push_back(s);
  const auto j = manifest_to_json(all);
  CHECK(j.at("step_cycle") == "bw1-first");
  const auto back = manifest_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(back[i].id == all[i].id);
    CHECK(back[i].flows == all[i].flows);
    CHECK(back[i].link.queue_capacity == all[i].link.queue_capacity);
    CHECK(back[i].link.min_rtt == all[i].link.min_rtt);
    CHECK(back[i].step_multiplier == all[i].step_multiplier);
    CHECK(to_json(back[i]) == to_json(all[i]));
  }
}

TEST_CASE("malformed manifests are configuration errors") {
  auto code_of = [](const nlohmann::json& j) {
    try {
      manifest_from_json(j);
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  CHECK(code_of(nlohmann::json::array()) == static_cast<int>(ErrorCode::kConfig));
  auto good = manifest_to_json({build_ccbench1_flat().front()});
  auto missing = good;
  missing["scenarios"][0].erase("min_rtt_s");
  CHECK(code_of(missing) == static_cast<int>(ErrorCode::kConfig));
  auto unknown = good;
  unknown["scenarios"][0]["flows"][0]["scheme"] = "orca";
  CHECK(code_of(unknown) == static_cast<int>(ErrorCode::kUnknownScheme));
  auto bad_duration = good;
  bad_duration["scenarios"][0]["duration_s"] = 31;
  CHECK(code_of(bad_duration) == static_cast<int>(ErrorCode::kInvalidArgument));
}

TEST_CASE("binding the placeholder") {
  const auto tmpl = build_ccbench2(kSchemeUnderTest).front();
  const auto bound = bind_scheme(tmpl, "ledbat");
  CHECK(bound.flows[0].scheme == "cubic");
  CHECK(bound.flows[1].scheme == "ledbat");
  CHECK(bound.id == tmpl.id);
  CHECK_THROWS_AS(bind_scheme(tmpl, "orca"), Error);
  CHECK_THROWS_AS(build_ccbench2("orca"), Error);
}

TEST_CASE("benchmark names") {
  for (auto b : {Benchmark::kCcBench1Flat, Benchmark::kCcBench1Step,
                 Benchmark::kCcBench2})
    CHECK(parse_benchmark(to_string(b)) == b);
  CHECK_THROWS_AS(parse_benchmark("ccbench3"), Error);
}
