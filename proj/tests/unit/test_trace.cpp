#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "wattbench/trace.hpp"

using namespace wattbench;
namespace fs = std::filesystem;

namespace {

PowerTrace make(std::vector<std::pair<double, double>> pts, std::string id = "gpu0") {
  std::vector<PowerSample> s;
  for (auto [t, p] : pts) s.push_back({DurationS(t), PowerW(p)});
  return PowerTrace(std::move(id), std::move(s));
}

// Dyadic timestamps and integer watts keep every trapezoid term exact.
oracle::RandomTrace dyadic_trace(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n(2, 120), step(1, 64), watts(0, 700);
  oracle::RandomTrace r;
  double t = 0;
  for (int i = n(rng); i > 0; --i) {
    r.t.push_back(t);
    r.p.push_back(watts(rng));
    t += step(rng) / 16.0;
  }
  return r;
}

fs::path temp_dir() {
  auto d = fs::temp_directory_path() / ("wattbench_trace_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST(Integrate, ConstantKilowattForAnHourIsOneKwh) {
  const auto e = integrate_trace(make({{0, 1000}, {1800, 1000}, {3600, 1000}}));
  EXPECT_DOUBLE_EQ(e.in(EnergyUnit::kWh), 1.0);
}

TEST(Integrate, LinearRampIsExact) {
  // 0 -> 200 W over 36 s: 3600 J = 1 Wh
  EXPECT_DOUBLE_EQ(integrate_trace(make({{0, 0}, {36, 200}})).value(), 1.0);
}

TEST(Integrate, EmptyAndSingleSampleAreZero) {
  EXPECT_EQ(integrate_trace(make({})).value(), 0.0);
  EXPECT_EQ(integrate_trace(make({{5, 300}})).value(), 0.0);
}

TEST(Integrate, DuplicateTimestampsContributeNothing) {
  EXPECT_DOUBLE_EQ(integrate_trace(make({{0, 100}, {10, 100}, {10, 500}, {20, 500}})).value(),
                   (1000.0 + 5000.0) / 3600.0);
}

TEST(Integrate, MatchesDenseRiemannOracle) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 100; ++i) {
    const auto r = oracle::random_trace(rng);
    const long double expected = oracle::riemann_joules(r.t, r.p) / 3600.0L;
    EXPECT_LE(oracle::rel_err(integrate_trace(r.trace()).value(), expected), 1e-9L) << "trace " << i;
  }
}

TEST(Integrate, AdditiveOverASplitPoint) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto r = dyadic_trace(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, r.t.size() - 1)(rng);
    oracle::RandomTrace a, b;
    a.t.assign(r.t.begin(), r.t.begin() + k + 1);
    a.p.assign(r.p.begin(), r.p.begin() + k + 1);
    b.t.assign(r.t.begin() + k, r.t.end());
    b.p.assign(r.p.begin() + k, r.p.end());
    EXPECT_DOUBLE_EQ(integrate_trace(r.trace()).value(), (integrate_trace(a.trace()) + integrate_trace(b.trace())).value());
  }
}

TEST(Integrate, TranslationInvariant) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto r = dyadic_trace(rng);
    const double before = integrate_trace(r.trace()).value();
    const double shift = std::uniform_int_distribution<int>(1, 100000)(rng);
    for (auto& t : r.t) t += shift;
    EXPECT_EQ(integrate_trace(r.trace()).value(), before);
  }
}

TEST(Integrate, ScalesLinearlyWithPower) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    auto r = dyadic_trace(rng);
    const double before = integrate_trace(r.trace()).value();
    for (double k : {0.5, 2.0, 4.0}) {
      auto s = r;
      for (auto& p : s.p) p *= k;
      EXPECT_EQ(integrate_trace(s.trace()).value(), before * k);
    }
    auto s = r;
    for (auto& p : s.p) p *= 1.37;
    EXPECT_DOUBLE_EQ(integrate_trace(s.trace()).value(), before * 1.37);
  }
}

TEST(Integrate, MonotoneInPower) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    auto r = oracle::random_trace(rng);
    auto s = r;
    s.p[std::uniform_int_distribution<std::size_t>(0, s.p.size() - 1)(rng)] += 10.0;
    EXPECT_GE(integrate_trace(s.trace()), integrate_trace(r.trace()));
  }
}

TEST(Trace, RejectsDecreasingTimestamps) {
  EXPECT_THROW(make({{0, 1}, {2, 1}, {1, 1}}), InvalidValue);
}

TEST(Trace, Span) {
  EXPECT_DOUBLE_EQ(make({{3, 1}, {10, 1}}).span().value(), 7.0);
  EXPECT_EQ(make({{3, 1}}).span().value(), 0.0);
}

TEST(Gaps, FlagsIntervalsAboveTenTimesMedian) {
  // intervals 1,1,1,1,11
  const auto gaps = find_gaps(make({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {15, 1}}));
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_EQ(gaps[0].index, 5u);
  EXPECT_DOUBLE_EQ(gaps[0].interval_s, 11.0);
  EXPECT_DOUBLE_EQ(gaps[0].median_s, 1.0);
}

TEST(Gaps, ExactlyTenTimesIsNotAGap) {
  EXPECT_TRUE(find_gaps(make({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {13, 1}})).empty());
}

TEST(Gaps, MedianIgnoresZeroIntervals) {
  EXPECT_TRUE(find_gaps(make({{0, 1}, {0, 1}, {0, 1}, {1, 1}, {2, 1}})).empty());
}

TEST(ParseTrace, ReadsCsv) {
  const auto t = parse_trace("t_s,power_w\n0,100\n1.5,200\n", "gpu1", "x.csv");
  EXPECT_EQ(t.device_id(), "gpu1");
  ASSERT_EQ(t.samples().size(), 2u);
  EXPECT_DOUBLE_EQ(t.samples()[1].p.value(), 200.0);
}

TEST(ParseTrace, ErrorsNameTheLine) {
  auto line_of = [](const char* text) {
    try {
      parse_trace(text, "g", "x.csv");
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("t_s,power_w\n0,1\n1,-5\n"), 3u);
  EXPECT_EQ(line_of("t_s,power_w\n0,1\n2,1\n1,1\n"), 4u);
  EXPECT_EQ(line_of("t_s,power_w\n-1,1\n"), 2u);
  EXPECT_EQ(line_of("t_s,power_w\n0,abc\n"), 2u);
  EXPECT_THROW(parse_trace("time,power\n0,1\n", "g"), ParseError);
}

TEST(Bundle, RequiresUniqueDevices) {
  EXPECT_THROW(TraceBundle("r", {make({}, "a"), make({}, "a")}), InvalidValue);
}

TEST(Bundle, EnergyIsSumOfDeviceIntegrals) {
  const auto a = make({{0, 300}, {60, 310}, {120, 290}}, "gpu0");
  const auto b = make({{0, 50}, {30, 70}, {90, 60}}, "gpu1");
  const TraceBundle bundle("run", {a, b});
  const long double expected =
      (oracle::riemann_joules({0, 60, 120}, {300, 310, 290}) + oracle::riemann_joules({0, 30, 90}, {50, 70, 60})) / 3600.0L;
  EXPECT_LE(oracle::rel_err(bundle_energy(bundle).value(), expected), 1e-12L);
}

TEST(Manifest, LoadsBundleRelativeToManifest) {
  const auto dir = temp_dir();
  write(dir / "g0.csv", "t_s,power_w\n0,1000\n3600,1000\n");
  write(dir / "g1.csv", "t_s,power_w\n0,500\n3600,500\n");
  write(dir / "m.json", R"({"run_id":"r1","agent":"MindAct","gpu":"H100-NVL","split":"cross-task","run_index":3,
    "traces":[{"device_id":"gpu0","path":"g0.csv"},{"device_id":"gpu1","path":"g1.csv"}]})");
  const auto m = load_manifest(dir / "m.json");
  EXPECT_EQ(m.agent, "MindAct");
  EXPECT_EQ(m.run_index, 3);
  EXPECT_DOUBLE_EQ(bundle_energy(load_bundle(m)).in(EnergyUnit::kWh), 1.5);
  fs::remove_all(dir);
}

TEST(Manifest, Defaults) {
  const auto m = parse_manifest(R"({"run_id":"r","traces":[]})", "/tmp");
  EXPECT_EQ(m.agent, "r");
  EXPECT_EQ(m.gpu, "unknown");
  EXPECT_EQ(m.split, "all");
  EXPECT_EQ(m.run_index, 1);
}

TEST(Manifest, Errors) {
  EXPECT_THROW(parse_manifest("{", "."), ParseError);
  EXPECT_THROW(parse_manifest(R"({"traces":[]})", "."), SchemaError);
  EXPECT_THROW(parse_manifest(R"({"run_id":"r","traces":[{"device_id":"a"}]})", "."), SchemaError);
  EXPECT_THROW(load_manifest("/nonexistent/m.json"), IoError);
  const auto m = parse_manifest(R"({"run_id":"r","traces":[{"device_id":"a","path":"missing.csv"}]})", "/nonexistent");
  try {
    load_bundle(m);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
}
