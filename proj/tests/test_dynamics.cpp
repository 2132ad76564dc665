#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dualres/dynamics.hpp"
#include "dualres/errors.hpp"
#include "dualres/spectroscopy.hpp"

using namespace dualres;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const HilbertSpace kSmall({2, 2, 2, 2});

DeviceParams qubits_only(double g12_ghz) {
  DeviceParams p;
  p.g_a1 = p.g_a2 = p.g_b1 = p.g_b2 = 0.0;
  p.g_12 = g12_ghz;
  return p;
}

DeviceParams lossless(DeviceParams p) {
  p.t1_qubit1 = p.t1_qubit2 = p.t2_qubit1 = p.t2_qubit2 = kInf;
  return p;
}

PulseSchedule hold(const OperatingPoint& point, double duration) {
  PulseSchedule s;
  s.stages = {Stage{duration, point, std::nullopt}};
  return s;
}

std::vector<Observable> populations(const HilbertSpace& space) {
  return {{"n_a", number_operator(space, kResonatorA)},
          {"n_b", number_operator(space, kResonatorB)},
          {"n_q1", number_operator(space, kQubit1)},
          {"n_q2", number_operator(space, kQubit2)}};
}

const auto kQ2Excited = std::vector<int>{0, 0, 0, 1};

}  // namespace

TEST_CASE("collapse operator recipe") {
  CHECK(pure_dephasing_rate(10.0, 20.0) == 0.0);
  CHECK(pure_dephasing_rate(10.0, 1.5) == doctest::Approx(1.0 / 1.5 - 1.0 / 20.0).epsilon(1e-15));

  DeviceParams p;
  p.t2_qubit1 = 2.0 * p.t1_qubit1;
  p.t2_qubit2 = 2.0 * p.t1_qubit2;
  const auto relax_only = collapse_operators(p, kSmall);
  CHECK(relax_only.size() == 2);
  CHECK(relax_only[0].elements().cwiseAbs().maxCoeff() == doctest::Approx(std::sqrt(1e-3 / 10.0)));

  const auto standard = collapse_operators(DeviceParams{}, kSmall);
  CHECK(standard.size() == 4);
  const double dephasing = 2e-3 * (1.0 / 1.5 - 1.0 / 20.0);
  CHECK(standard[1].elements().cwiseAbs().maxCoeff() == doctest::Approx(std::sqrt(dephasing)));

  CHECK(collapse_operators(lossless(DeviceParams{}), kSmall).empty());
  CHECK(collapse_operators(DeviceParams{}, kSmall, {false}).empty());
  CHECK(collapse_operators(lossless(DeviceParams{}), kSmall, {true, 50.0, kInf}).size() == 1);

  DeviceParams bad;
  bad.t2_qubit2 = 25.0;
  CHECK_THROWS_AS(collapse_operators(bad, kSmall), ConfigError);
}

TEST_CASE("closed-form exchange") {
  CHECK(two_level_transfer(3.0, 0.0, 1.0 / (4.0 * 0.003)) == doctest::Approx(1.0).epsilon(1e-12));
  const double g = 2.0;
  const double period = 1e3 / std::sqrt(4 * g * g + 4 * g * g);
  CHECK(two_level_transfer(g, 2 * g, period / 2) == doctest::Approx(0.5).epsilon(1e-12));
  for (double t = 0; t < 1000; t += 37) CHECK(two_level_transfer(g, 0.0, t) <= 1.0);
  CHECK(two_level_transfer(0.0, 0.0, 10.0) == 0.0);

  const std::vector<double> p{0.1, 0.4, 0.9};
  CHECK(contrast_map(p, 1.0, 0.0) == p);
  CHECK(contrast_map(p, 0.0, 0.3) == std::vector<double>(3, 0.3));
  CHECK(contrast_map(p, -2.0, 1.0)[2] == doctest::Approx(-0.8));
  CHECK_THROWS_AS(contrast_map(p, kInf, 0.0), ConfigError);
}

TEST_CASE("decoupled excited qubit stays put without dissipation") {
  const auto p = lossless(qubits_only(0.0));
  const auto series = evolve(p, hold({4.6, 4.7}, 200.0), DensityState::bare(kSmall, kQ2Excited), kSmall,
                             populations(kSmall), {0.25, 5.0});
  REQUIRE(series.times_ns.size() == 41);
  for (std::size_t k = 0; k < series.times_ns.size(); ++k) {
    CHECK(series.values[3][k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(series.values[2][k]) < 1e-12);
  }
}

TEST_CASE("two-qubit resonant exchange follows sin^2(2 pi g t)") {
  const double g = 0.003;
  const auto p = lossless(qubits_only(g));
  const auto series = evolve(p, hold({4.6, 4.6}, 400.0), DensityState::bare(kSmall, kQ2Excited), kSmall,
                             populations(kSmall), {0.25, 2.0});
  double worst = 0.0;
  double excitation_drift = 0.0;
  for (std::size_t k = 0; k < series.times_ns.size(); ++k) {
    const double s = std::sin(2 * std::numbers::pi * g * series.times_ns[k]);
    worst = std::max(worst, std::abs(series.values[2][k] - s * s));
    excitation_drift = std::max(excitation_drift, std::abs(series.values[2][k] + series.values[3][k] - 1.0));
  }
  CHECK(worst < 1e-8);
  CHECK(excitation_drift < 1e-8);
  CHECK(series.max_trace_error < 1e-8);
}

TEST_CASE("relaxation of a decoupled qubit") {
  auto p = qubits_only(0.0);
  p.t1_qubit2 = 10.0;
  p.t2_qubit2 = 20.0;
  const auto series = evolve(p, hold({4.6, 4.7}, 10000.0), DensityState::bare(kSmall, kQ2Excited), kSmall,
                             populations(kSmall), {0.25, 1000.0});
  CHECK(series.times_ns.back() == 10000.0);
  CHECK(std::abs(series.values[3].back() - std::exp(-1.0)) < 1e-6);
  CHECK(std::abs(series.readout[3] - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("open-system invariants on the full device") {
  const DeviceParams p;
  const HilbertSpace space({3, 3, 3, 3});
  const auto initial = DensityState::bare(space, kQ2Excited);
  const auto series = evolve(p, hold({4.58, 4.58}, 300.0), initial, space, populations(space), {0.25, 10.0});
  CHECK(series.max_trace_error < 1e-8);
  CHECK(series.max_hermitian_defect < 1e-10);
  CHECK(series.min_eigenvalue >= -1e-8);
  REQUIRE(series.final_state);
  CHECK_NOTHROW(series.final_state->validate());
  CHECK(series.final_state->purity() < 1.0);

  const auto closed = evolve(lossless(p), hold({4.58, 4.58}, 300.0), initial, space, populations(space), {0.25, 10.0});
  CHECK(std::abs(closed.final_state->purity() - 1.0) < 1e-8);
  double drift = 0.0;
  for (std::size_t k = 0; k < closed.times_ns.size(); ++k) {
    double total = 0.0;
    for (int m = 0; m < 4; ++m) total += closed.values[m][k];
    drift = std::max(drift, std::abs(total - 1.0));
  }
  // counter-rotating terms only
  CHECK(drift < 1e-3);
  CHECK(drift > 0.0);
}

TEST_CASE("step halving") {
  const DeviceParams p;
  const auto initial = DensityState::bare(kSmall, kQ2Excited);
  const std::vector<Observable> obs{{"q1", dressed_excitation_projector(p, {4.58, 4.58}, kSmall, QubitId::One)}};
  const auto coarse = evolve(p, hold({4.58, 4.58}, 500.0), initial, kSmall, obs, {0.25, 10.0});
  const auto fine = evolve(p, hold({4.58, 4.58}, 500.0), initial, kSmall, obs, {0.125, 10.0});
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.times_ns.size(); ++k) {
    worst = std::max(worst, std::abs(coarse.values[0][k] - fine.values[0][k]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("schedule bookkeeping") {
  const OperatingPoint bias{4.637, 4.691};
  const auto s = vacuum_rabi_schedule(bias, {4.58, 4.58}, 300.0, 1200.0);
  CHECK_NOTHROW(s.validate());
  CHECK(s.effective_durations() == std::vector<double>{0.0, 300.0, 900.0});
  CHECK(s.readout_time() == 1200.0);
  CHECK_THROWS_AS(vacuum_rabi_schedule(bias, {4.58, 4.58}, 1300.0, 1200.0).validate(), ConfigError);
  PulseSchedule empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  auto negative = hold(bias, -1.0);
  CHECK_THROWS_AS(negative.validate(), ConfigError);
}

TEST_CASE("chevron matches the staged evolution") {
  const DeviceParams p;
  const OperatingPoint bias{4.637, 4.691};
  const double target = 4.58;
  const std::vector<double> offsets{1.5};
  const std::vector<double> taus{0.0, 50.0, 100.0, 150.0};
  ChevronSettings settings;
  settings.readout_interval_ns = 400.0;
  const auto map = vacuum_rabi_chevron(p, bias, target, offsets, taus, kSmall, settings);

  const auto projector = dressed_excitation_projector(p, bias, kSmall, QubitId::One);
  const auto ground = dressed_ground_state(p, bias, kSmall);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const auto schedule = vacuum_rabi_schedule(bias, {target + 1.5e-3, target}, taus[k], 400.0);
    const auto series = evolve(p, schedule, ground, kSmall, {{"p1", projector}}, {0.25, 1000.0});
    CHECK(map.p1(0, static_cast<Eigen::Index>(k)) == doctest::Approx(series.readout[0]).epsilon(1e-9));
  }

  CHECK_THROWS_AS(vacuum_rabi_chevron(p, bias, target, offsets, std::vector<double>{10.0}, kSmall), ConfigError);
  CHECK_THROWS_AS(vacuum_rabi_chevron(p, bias, target, offsets, std::vector<double>{10.0, 5.0}, kSmall), ConfigError);
  CHECK_THROWS_AS(vacuum_rabi_chevron(p, bias, 4.78, offsets, taus, kSmall), DomainError);
  settings.readout_interval_ns = 100.0;
  CHECK_THROWS_AS(vacuum_rabi_chevron(p, bias, target, offsets, taus, kSmall, settings), ConfigError);
}

TEST_CASE("exchange is symmetric in detuning") {
  const auto p = qubits_only(0.003);
  const auto initial = DensityState::bare(kSmall, kQ2Excited);
  const std::vector<Observable> obs{{"n_q1", number_operator(kSmall, kQubit1)}};
  double worst = 0.0;
  for (double d : {3.0, 6.0}) {
    const auto plus = evolve(p, hold({4.58 + 1e-3 * d, 4.58}, 1000.0), initial, kSmall, obs, {0.25, 10.0});
    const auto minus = evolve(p, hold({4.58 - 1e-3 * d, 4.58}, 1000.0), initial, kSmall, obs, {0.25, 10.0});
    for (std::size_t k = 0; k < plus.times_ns.size(); ++k) {
      worst = std::max(worst, std::abs(plus.values[0][k] - minus.values[0][k]));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("staged chevron asymmetry stays within the prep admixture") {
  // the dressed prep at bias carries an amplitude ~ g / (bias detuning) on
  // qubit 1 that interferes with the exchange with a detuning-odd sign
  const double g = 0.003;
  const auto p = qubits_only(g);
  const OperatingPoint bias{4.637, 4.691};
  const std::vector<double> offsets{-6.0, -3.0, 0.0, 3.0, 6.0};
  std::vector<double> taus;
  for (int k = 0; k <= 100; ++k) taus.push_back(10.0 * k);
  const auto map = vacuum_rabi_chevron(p, bias, 4.58, offsets, taus, kSmall);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < map.p1.cols(); ++c) {
    worst = std::max(worst, std::abs(map.p1(0, c) - map.p1(4, c)));
    worst = std::max(worst, std::abs(map.p1(1, c) - map.p1(3, c)));
  }
  const double admixture = g / (bias.qubit_freq_2 - bias.qubit_freq_1);
  CHECK(worst < 4.0 * admixture);
  CHECK(map.p1.maxCoeff() <= 1.0 + 1e-6);
  CHECK(map.p1.minCoeff() >= -1e-8);
}

TEST_CASE("no exchange at the spectral switch-off") {
  const DeviceParams p;
  const auto off = spectral_switch_off(p, {4.60, 4.66}, kSmall);
  const std::vector<double> offsets{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> taus;
  for (int k = 0; k <= 100; ++k) taus.push_back(20.0 * k);
  const auto map = vacuum_rabi_chevron(p, {4.637, 4.691}, off.frequency, offsets, taus, kSmall);
  CHECK(map.p1.maxCoeff() < 0.05);
}
