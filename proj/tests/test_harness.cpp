#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cfjed/harness.hpp"

using namespace cfjed;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemConfig fast_smoke() {
  SystemConfig c = preset("smoke");
  c.trials = 2;
  c.max_iter = 400;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("presets carry the documented dimensions") {
  const SystemConfig f2 = preset("fig2");
  CHECK(f2.B == 64);
  CHECK(f2.U == 128);
  CHECK(f2.K == 128);
  CHECK(f2.T == 64);
  CHECK(f2.modulation == Modulation::BPSK);
  CHECK(f2.N_cells == 2);

  const SystemConfig f4 = preset("fig4");
  CHECK(f4.B == 128);
  CHECK(f4.U == 128);
  CHECK(f4.T == 32);
  CHECK(f4.modulation == Modulation::QPSK);
  CHECK(f4.N_cells == 4);

  CHECK(has_preset("smoke"));
  CHECK_FALSE(has_preset("fig99"));
  CHECK_THROWS_AS(preset("fig99"), std::invalid_argument);
}

TEST_CASE("config parsing rejects bad input") {
  CHECK_THROWS_AS(parse_config({{"no_such_key", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config({{"T", "64"}, {"K", "32"}}), std::invalid_argument);
  SystemConfig c = preset("smoke");
  c.U = 17;  // permuted training needs U == N_cells * T
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config round trip through a key=value file") {
  const std::string path = "test_harness_cfg.txt";
  {
    std::ofstream out(path);
    out << "B=16\nU=16\nK=32\nT=8\n"
        << "modulation = qpsk  # trailing comment\n"
        << "N_cells=2\ntrials=3\nseed=42\nmu=0.5\n";
  }
  const SystemConfig c = load_config(path);
  CHECK(c.B == 16);
  CHECK(c.modulation == Modulation::QPSK);
  CHECK(c.trials == 3);
  CHECK(c.seed == 42);
  CHECK(c.mu == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("scenario metrics satisfy their invariants") {
  const SystemConfig c = fast_smoke();
  const MetricsReport rep = run_scenario(c, "", "inv");
  CHECK(rep.trials == 2);
  CHECK(rep.failed_trials == 0);
  CHECK(rep.rmsse.size() == 2 * c.U);
  CHECK(rep.ber.size() == 2 * c.U);
  CHECK(rep.mi.size() == c.U);  // pooled across trials per UE rank
  CHECK(rep.rmsse.minCoeff() >= 0.0);
  CHECK(rep.ber.minCoeff() >= 0.0);
  CHECK(rep.ber.maxCoeff() <= 1.0);
  CHECK(rep.ber_simo.maxCoeff() <= 1.0);
  const double cap = 2.0 * double(c.K - c.T) / c.K;  // QPSK payload rate
  CHECK(rep.mi.maxCoeff() <= cap + 1e-12);
  CHECK(rep.mi_l1.maxCoeff() <= cap + 1e-12);
  CHECK(rep.median_iterations >= 1.0);
}

TEST_CASE("same seed reproduces byte-identical outputs across worker counts") {
  SystemConfig c = fast_smoke();
  run_scenario(c, "out_det_a", "det");
  run_scenario(c, "out_det_b", "det");
  CHECK(slurp("out_det_a/metrics.json") == slurp("out_det_b/metrics.json"));
  CHECK(slurp("out_det_a/trace_0.csv") == slurp("out_det_b/trace_0.csv"));

  c.workers = 2;
  run_scenario(c, "out_det_c", "det");
  CHECK(slurp("out_det_a/metrics.json") == slurp("out_det_c/metrics.json"));

  SystemConfig other = c;
  other.seed = 1;
  run_scenario(other, "out_det_d", "det");
  CHECK(slurp("out_det_a/metrics.json") != slurp("out_det_d/metrics.json"));
}

TEST_CASE("nearest-rank percentile") {
  Eigen::VectorXd v(10);
  for (int i = 0; i < 10; ++i) v(i) = double(10 - i);
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 0.1) == 1.0);
  CHECK(percentile(v, 0.5) == 5.0);
  CHECK(percentile(v, 1.0) == 10.0);
  CHECK_THROWS_AS(percentile(v, 1.5), std::invalid_argument);
}

TEST_CASE("pilot-overhead sweep tracks the rate ceiling") {
  SystemConfig c = fast_smoke();
  const auto rows = sweep_overhead(c, {8, 16, 32}, "out_sweep");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].overhead == doctest::Approx(0.25));
  CHECK(rows[0].mi_ceiling == doctest::Approx(1.5));
  CHECK(rows[1].mi_ceiling == doctest::Approx(1.0));
  // All-pilot column: no payload, everything zero.
  CHECK(rows[2].mi_ceiling == 0.0);
  CHECK(rows[2].mi_jed_p10 == 0.0);
  for (const auto& r : rows) {
    CHECK(r.mi_jed_p10 >= 0.0);
    CHECK(r.mi_jed_p10 <= r.mi_ceiling + 1e-12);
    CHECK(r.mi_lmmse_p10 <= r.mi_ceiling + 1e-12);
  }
  const std::string csv = slurp("out_sweep/sweep.csv");
  CHECK(csv.find("T,overhead,mi_jed_p10,mi_lmmse_p10,mi_ceiling") == 0);
}

}  // TEST_SUITE
