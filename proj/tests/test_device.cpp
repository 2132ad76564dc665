#include <doctest.h>

#include <cmath>
#include <random>

#include "dualres/device.hpp"
#include "dualres/device_io.hpp"
#include "dualres/errors.hpp"

using namespace dualres;

namespace {

DeviceParams decoupled() {
  DeviceParams p;
  p.g_a1 = p.g_a2 = p.g_b1 = p.g_b2 = p.g_ab = p.g_12 = 0.0;
  return p;
}

}  // namespace

TEST_CASE("decoupled Hamiltonian is diagonal with bare mode frequencies") {
  const HilbertSpace space({2, 2, 2, 2});
  const auto h = build_hamiltonian(decoupled(), {4.60, 4.70}, space).elements();
  CHECK((h - ComplexMatrix(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  const double expected[4] = {4.47, 4.80, 4.60, 4.70};
  for (int m = 0; m < 4; ++m) {
    std::vector<int> occ(4, 0);
    occ[m] = 1;
    CHECK(h(space.index_of(occ), space.index_of(occ)).real() == doctest::Approx(kTwoPi * expected[m]).epsilon(1e-14));
  }
}

TEST_CASE("coupling element between resonator a and qubit 1") {
  const HilbertSpace space({3, 3, 3, 3});
  const auto h = build_hamiltonian(DeviceParams{}, {4.58, 4.58}, space).elements();
  const auto a1 = space.index_of(std::vector<int>{1, 0, 0, 0});
  const auto q1 = space.index_of(std::vector<int>{0, 0, 1, 0});
  CHECK(h(a1, q1).real() == doctest::Approx(kTwoPi * 0.027).epsilon(1e-14));
  CHECK(h(a1, q1).imag() == 0.0);
  // counter-rotating partner |0> <-> |a=1, q1=1>
  const auto both = space.index_of(std::vector<int>{1, 0, 1, 0});
  CHECK(h(0, both).real() == doctest::Approx(-kTwoPi * 0.027).epsilon(1e-14));
}

TEST_CASE("anharmonic qubit ladder") {
  const HilbertSpace space({2, 2, 3, 3});
  const auto h = build_hamiltonian(decoupled(), {4.6, 4.7}, space).elements();
  const auto two = space.index_of(std::vector<int>{0, 0, 2, 0});
  CHECK(h(two, two).real() == doctest::Approx(kTwoPi * (2 * 4.6 - 0.5)).epsilon(1e-14));
}

TEST_CASE("Hamiltonian is Hermitian at random operating points") {
  DeviceParams p;
  p.g_ab = 0.004;
  const DeviceHamiltonian model(p, HilbertSpace({3, 3, 3, 3}));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> freq(3.5, 5.5);
  for (int k = 0; k < 100; ++k) {
    CHECK(model.at({freq(rng), freq(rng)}).hermitian_defect() < 1e-12);
  }
  CHECK_THROWS_AS(build_hamiltonian(p, {4.6, 4.6}, HilbertSpace({3, 3, 3})), ConfigError);
}

TEST_CASE("effective coupling values") {
  CHECK(effective_coupling(decoupled(), {4.6, 4.6}) == 0.0);
  CHECK(1e3 * effective_coupling(DeviceParams{}, {4.64, 4.64}) == doctest::Approx(-0.6321).epsilon(1e-3));
  CHECK(1e3 * effective_coupling(DeviceParams{}, {4.58, 4.58}) == doctest::Approx(3.2399).epsilon(1e-4));
  CHECK_THROWS_AS(effective_coupling(DeviceParams{}, {4.47, 4.6}), DomainError);
}

TEST_CASE("effective coupling structure") {
  const DeviceParams p;
  double previous = effective_coupling(p, {4.52, 4.52});
  for (int k = 1; k <= 50; ++k) {
    const double w = 4.52 + 0.23 * k / 50.0;
    const double g = effective_coupling(p, {w, w});
    CHECK(g < previous);
    previous = g;
  }
  // resonator a pushes positive, resonator b negative
  DeviceParams only_a = p, only_b = p;
  only_a.g_b1 = only_a.g_b2 = only_a.g_12 = 0.0;
  only_b.g_a1 = only_b.g_a2 = only_b.g_12 = 0.0;
  CHECK(effective_coupling(only_a, {4.6, 4.6}) > 0.0);
  CHECK(effective_coupling(only_b, {4.6, 4.6}) < 0.0);

  DeviceParams scaled = p;
  const double s = 1.7;
  for (double* f : {&scaled.resonator_freq_a, &scaled.resonator_freq_b, &scaled.g_a1, &scaled.g_a2, &scaled.g_b1,
                    &scaled.g_b2, &scaled.g_12})
    *f *= s;
  CHECK(effective_coupling(scaled, {4.6 * s, 4.61 * s}) / s ==
        doctest::Approx(effective_coupling(p, {4.6, 4.61})).epsilon(1e-12));
}

TEST_CASE("switch-off point") {
  const DeviceParams p;
  const double w = find_switch_off(p, {4.50, 4.77});
  CHECK(w == doctest::Approx(4.629439).epsilon(1e-6));
  CHECK(std::abs(effective_coupling(p, {w, w})) < 1e-7);

  DeviceParams no_direct = p;
  no_direct.g_12 = 0.0;
  const double w0 = find_switch_off(no_direct, {4.50, 4.77});
  CHECK(w0 > p.resonator_freq_a);
  CHECK(w0 < p.resonator_freq_b);

  DeviceParams strong_b = p;
  strong_b.g_b1 *= 2;
  strong_b.g_b2 *= 2;
  CHECK(find_switch_off(strong_b, {4.50, 4.77}) < w);

  CHECK_THROWS_AS(find_switch_off(p, {4.50, 4.60}), DomainError);
  CHECK_THROWS_AS(find_switch_off(p, {4.40, 4.60}), DomainError);
  try {
    find_switch_off(p, {4.50, 4.60});
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("no sign change") != std::string::npos);
  }
}

TEST_CASE("flux tuning law") {
  DeviceParams p;
  p.flux_period_1 = 2.0;
  p.flux_offset_1 = 0.3;
  CHECK(flux_to_frequency(p, QubitId::One, 0.3) == p.qubit_max_freq_1);
  CHECK(flux_to_frequency(p, QubitId::One, 1.3) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(flux_to_frequency(p, QubitId::One, 0.3 + 0.17) == flux_to_frequency(p, QubitId::One, 0.3 - 0.17));

  CHECK(frequency_to_flux(p, QubitId::One, p.qubit_max_freq_1) == doctest::Approx(0.3));
  const double third = frequency_to_flux(p, QubitId::One, p.qubit_max_freq_1 / std::sqrt(2.0));
  CHECK(third == doctest::Approx(0.3 + 2.0 / 3.0).epsilon(1e-12));
  CHECK(frequency_to_flux(p, QubitId::One, p.qubit_max_freq_1 / std::sqrt(2.0), FluxBranch::Negative) ==
        doctest::Approx(0.3 - 2.0 / 3.0).epsilon(1e-12));
  for (double x = 0.3; x < 1.25; x += 0.05) {
    const double f = flux_to_frequency(p, QubitId::One, x);
    CHECK(flux_to_frequency(p, QubitId::One, frequency_to_flux(p, QubitId::One, f)) == doctest::Approx(f).epsilon(1e-10));
    CHECK(std::abs(frequency_to_flux(p, QubitId::One, f) - x) < 1e-9);
  }
  CHECK_THROWS(frequency_to_flux(p, QubitId::One, 5.0));
}

TEST_CASE("device parameter validation and JSON") {
  DeviceParams p;
  CHECK_NOTHROW(p.validate());
  p.t2_qubit1 = 25.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = DeviceParams{};
  std::swap(p.resonator_freq_a, p.resonator_freq_b);
  CHECK_THROWS_AS(p.validate(), ConfigError);

  const auto doc = device_to_json(DeviceParams{});
  CHECK(device_from_json(doc) == DeviceParams{});
  CHECK(device_from_json(nlohmann::json::object()) == DeviceParams{});
  CHECK_THROWS_AS(device_from_json({{"g_a3", 0.01}}), ConfigError);
  const auto lossless = device_from_json({{"t1_qubit1", nullptr}, {"t2_qubit1", nullptr}});
  CHECK(std::isinf(lossless.t1_qubit1));
  CHECK(device_from_json(device_to_json(lossless)) == lossless);

  DeviceParams loud;
  loud.g_a1 = 0.6;
  CHECK(!loud.warnings().empty());
  CHECK(DeviceParams{}.warnings().empty());
}
