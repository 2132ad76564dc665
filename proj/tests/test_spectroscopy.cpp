#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dualres/errors.hpp"
#include "dualres/spectroscopy.hpp"

using namespace dualres;

namespace {

const HilbertSpace kSpace3({3, 3, 3, 3});

std::vector<double> grid(double lo, double hi, int n) { return GridSpec{lo, hi, n}.values(); }

}  // namespace

TEST_CASE("decoupled sweep reproduces bare lines") {
  DeviceParams p;
  p.g_a1 = p.g_a2 = p.g_b1 = p.g_b2 = p.g_12 = 0.0;
  const auto values = grid(4.3, 4.7, 41);
  const auto sweep = sweep_spectrum(p, SweepAxis::Freq1, values, {0.0, 5.2}, HilbertSpace({2, 2, 2, 2}));
  REQUIRE(sweep.levels.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int seen = 0;
    for (std::size_t k = 1; k < sweep.levels[i].size(); ++k) CHECK(sweep.levels[i][k] >= sweep.levels[i][k - 1]);
    for (std::size_t k = 0; k < sweep.levels[i].size(); ++k) {
      const auto& tag = sweep.labels[i][k].tag;
      const double f = sweep.levels[i][k];
      const double expected = tag == "q1" ? values[i] : tag == "a" ? 4.47 : tag == "b" ? 4.80 : -1.0;
      if (expected < 0) continue;
      CHECK(f == doctest::Approx(expected).epsilon(1e-12));
      ++seen;
    }
    CHECK(seen == 3);
  }
}

TEST_CASE("spectrum CSV layout") {
  const auto values = grid(0.0, 0.2, 3);
  const auto sweep = sweep_spectrum(DeviceParams{}, SweepAxis::Flux1, values, {4.641, 4.91}, HilbertSpace({2, 2, 2, 2}),
                                    {4, 1});
  std::ostringstream out;
  write_spectrum_csv(sweep, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sweep_value_ctrl,level_index,freq_ghz,label,overlap");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 4);
  CHECK(out.str().find("\n0,0,0,g,0.99") != std::string::npos);
}

TEST_CASE("mixed label below half weight") {
  const HilbertSpace space({2, 2, 2, 2});
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(16);
  v[space.index_of(std::vector<int>{0, 0, 1, 0})] = std::sqrt(0.45);
  v[space.index_of(std::vector<int>{0, 0, 0, 1})] = std::sqrt(0.45);
  v[space.index_of(std::vector<int>{1, 0, 0, 0})] = std::sqrt(0.1);
  CHECK(label_eigenvector(space, v).tag == "mixed");
  v[space.index_of(std::vector<int>{0, 0, 1, 0})] = std::sqrt(0.6);
  v[space.index_of(std::vector<int>{0, 0, 0, 1})] = std::sqrt(0.3);
  CHECK(label_eigenvector(space, v).tag == "q1");
  CHECK(bare_state_tag(HilbertSpace({3, 3, 3, 3}), HilbertSpace({3, 3, 3, 3}).index_of(std::vector<int>{0, 0, 2, 1})) ==
        "2q1+q2");
}

TEST_CASE("qubit-resonator anti-crossings") {
  const DeviceParams p;
  SUBCASE("qubit 1 sees only resonator a") {
    const auto values = grid(0.0, 0.3, 301);
    const auto gaps = qubit_resonator_gaps(p, SweepAxis::Flux1, values, {4.637, 4.691}, kSpace3);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].resonator_mode == kResonatorA);
    CHECK(gaps[0].gap.gap_mhz == doctest::Approx(53.90).epsilon(2e-4));
  }
  SUBCASE("qubit 2 crosses both resonators") {
    const auto values = grid(0.0, 0.3, 301);
    const auto gaps = qubit_resonator_gaps(p, SweepAxis::Flux2, values, {4.637, 4.691}, kSpace3);
    REQUIRE(gaps.size() == 2);
    for (const auto& g : gaps) {
      if (g.resonator_mode == kResonatorA) CHECK(g.gap.gap_mhz == doctest::Approx(53.76).epsilon(2e-4));
      if (g.resonator_mode == kResonatorB) CHECK(g.gap.gap_mhz == doctest::Approx(59.85).epsilon(2e-4));
    }
  }
}

TEST_CASE("qubit-qubit gap") {
  const DeviceParams p;
  const auto at_458 = qubit_qubit_gap(p, 4.58, {4.565, 4.595, 201}, kSpace3);
  CHECK(at_458.gap_mhz == doctest::Approx(5.7217).epsilon(2e-4));
  CHECK(at_458.location > 4.57);
  CHECK(at_458.location < 4.59);

  CHECK(qubit_qubit_gap(p, 4.62, {4.60, 4.64, 201}, kSpace3).gap_mhz < 2.0);
  const double off = find_switch_off(p, {4.50, 4.77});
  CHECK(qubit_qubit_gap(p, off, {off - 0.02, off + 0.02, 201}, kSpace3).gap_mhz < 0.5);

  CHECK_THROWS_AS(qubit_qubit_gap(p, 4.58, {4.581, 4.60, 201}, kSpace3), DomainError);
  try {
    mode_pair_gap(p, SweepAxis::Freq1, grid(4.59, 4.60, 11), {0.0, 4.58}, kSpace3, kQubit1, kQubit2);
    FAIL("endpoint minimum accepted");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("bracket too narrow") != std::string::npos);
  }
  CHECK_THROWS_AS(qubit_qubit_gap(p, 4.50, {4.48, 4.52, 201}, kSpace3), DomainError);
}

TEST_CASE("two-qubit oracle: gap is twice the direct coupling") {
  DeviceParams p;
  p.g_a1 = p.g_a2 = p.g_b1 = p.g_b2 = 0.0;
  p.g_12 = 0.005;
  const auto gap = qubit_qubit_gap(p, 4.6, {4.58, 4.62, 201}, HilbertSpace({2, 2, 2, 2}));
  CHECK(std::abs(gap.gap_mhz - 10.0) < 1e-6);
  CHECK(gap.location == doctest::Approx(4.6).epsilon(1e-9));
}

TEST_CASE("gap properties") {
  const DeviceParams p;
  SUBCASE("level repulsion and symmetry near the minimum") {
    const GridSpec spec{4.565, 4.595, 201};
    const auto gap = qubit_qubit_gap(p, 4.58, spec, kSpace3);
    CHECK(gap.gap_mhz > 0.0);
    // single-excitation ordering here: a, then the qubit pair, then b
    CHECK(gap.level_pair == std::pair{2, 3});
    const double step = (spec.hi - spec.lo) / (spec.count - 1);
    std::vector<double> values;
    for (double d : {-0.004, -0.002, -0.001, 0.001, 0.002, 0.004}) values.push_back(gap.location + d);
    const auto sweep = sweep_spectrum(p, SweepAxis::Freq1, values, {0.0, 4.58}, kSpace3);
    const auto sep = [&](std::size_t i) { return 1e3 * (sweep.levels[i][3] - sweep.levels[i][2]); };
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(sep(i) > gap.gap_mhz);
    for (std::size_t i = 0; i < 3; ++i) {
      // separation grows with slope at most 2 GHz/GHz; allow one grid step of it
      CHECK(std::abs(sep(i) - sep(5 - i)) < 2e3 * step);
    }
  }
  SUBCASE("setpoint scan") {
    const std::vector<double> setpoints{4.58, 4.60, 4.62};
    const auto scan = gap_vs_setpoint(p, setpoints, kSpace3);
    REQUIRE(scan.size() == 3);
    CHECK(scan[0].gap->gap_mhz > scan[1].gap->gap_mhz);
    CHECK(scan[1].gap->gap_mhz > scan[2].gap->gap_mhz);
    CHECK(gap_vs_setpoint(p, std::vector<double>{}, kSpace3).empty());

    const double off = find_switch_off(p, {4.50, 4.77});
    const auto below = gap_vs_setpoint(p, std::vector<double>{off - 0.05}, kSpace3, {0.015, 201, 0});
    REQUIRE(below[0].gap);
    CHECK(below[0].gap->gap_mhz == doctest::Approx(5.79).epsilon(2e-3));
    CHECK(below[0].effective_coupling_mhz == doctest::Approx(1e3 * effective_coupling(p, {off - 0.05, off - 0.05})));

    const auto bad = gap_vs_setpoint(p, std::vector<double>{4.47}, kSpace3);
    CHECK(!bad[0].gap);
    CHECK(!bad[0].error.empty());
  }
}

TEST_CASE("qubit-qubit gap is converged in truncation") {
  const DeviceParams p;
  const GridSpec sweep{4.565, 4.595, 41};
  const double three = qubit_qubit_gap(p, 4.58, sweep, kSpace3).gap_mhz;
  const double four = qubit_qubit_gap(p, 4.58, sweep, HilbertSpace({4, 4, 4, 4})).gap_mhz;
  CHECK(std::abs(four - three) < 1e-3);
}
