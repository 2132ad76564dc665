#include "dualres/device.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dualres/errors.hpp"

namespace dualres {
namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ConfigError(fmt::format("device parameter {} must be finite", name));
  }
}

void check_lifetimes(double t1, double t2, int qubit) {
  if (std::isnan(t1) || std::isnan(t2) || t1 <= 0.0 || t2 <= 0.0) {
    throw ConfigError(fmt::format("qubit {} coherence times must be positive (T1 = {}, T2 = {})", qubit, t1, t2));
  }
  if (t2 > 2.0 * t1) {
    throw ConfigError(fmt::format("qubit {}: T2 = {} us exceeds 2 T1 = {} us", qubit, t2, 2.0 * t1));
  }
}

}  // namespace

void DeviceParams::validate() const {
  const std::array<std::pair<double, const char*>, 16> finite{{
      {resonator_freq_a, "resonator_freq_a"},
      {resonator_freq_b, "resonator_freq_b"},
      {qubit_max_freq_1, "qubit_max_freq_1"},
      {qubit_max_freq_2, "qubit_max_freq_2"},
      {anharmonicity_1, "anharmonicity_1"},
      {anharmonicity_2, "anharmonicity_2"},
      {g_a1, "g_a1"},
      {g_a2, "g_a2"},
      {g_b1, "g_b1"},
      {g_b2, "g_b2"},
      {g_ab, "g_ab"},
      {g_12, "g_12"},
      {flux_period_1, "flux_period_1"},
      {flux_period_2, "flux_period_2"},
      {flux_offset_1, "flux_offset_1"},
      {flux_offset_2, "flux_offset_2"},
  }};
  for (const auto& [value, name] : finite) require_finite(value, name);
  for (double f : {resonator_freq_a, resonator_freq_b, qubit_max_freq_1, qubit_max_freq_2}) {
    if (f <= 0.0) throw ConfigError("mode frequencies must be positive");
  }
  if (!(resonator_freq_a < resonator_freq_b)) {
    throw ConfigError(fmt::format("resonator a ({} GHz) must be the low-frequency resonator, below b ({} GHz)",
                                  resonator_freq_a, resonator_freq_b));
  }
  if (flux_period_1 == 0.0 || flux_period_2 == 0.0) {
    throw ConfigError("flux periods must be nonzero");
  }
  check_lifetimes(t1_qubit1, t2_qubit1, 1);
  check_lifetimes(t1_qubit2, t2_qubit2, 2);
}

std::vector<std::string> DeviceParams::warnings() const {
  std::vector<std::string> out;
  const double min_freq = std::min({resonator_freq_a, resonator_freq_b, qubit_max_freq_1, qubit_max_freq_2});
  const std::array<std::pair<double, const char*>, 6> couplings{{
      {g_a1, "g_a1"}, {g_a2, "g_a2"}, {g_b1, "g_b1"}, {g_b2, "g_b2"}, {g_ab, "g_ab"}, {g_12, "g_12"}}};
  for (const auto& [g, name] : couplings) {
    if (std::abs(g) >= min_freq / 10.0) {
      out.push_back(fmt::format("coupling {} = {} GHz is not small against the lowest mode frequency {} GHz", name,
                                g, min_freq));
    }
  }
  return out;
}

double DeviceParams::max_qubit_resonator_coupling() const {
  return std::max({std::abs(g_a1), std::abs(g_a2), std::abs(g_b1), std::abs(g_b2)});
}

void OperatingPoint::validate() const {
  if (!std::isfinite(qubit_freq_1) || !std::isfinite(qubit_freq_2) || qubit_freq_1 <= 0.0 || qubit_freq_2 <= 0.0) {
    throw DomainError(
        fmt::format("operating point ({}, {}) GHz must have positive finite frequencies", qubit_freq_1, qubit_freq_2));
  }
}

DeviceHamiltonian::DeviceHamiltonian(const DeviceParams& params, HilbertSpace space) : space_(std::move(space)) {
  if (space_.mode_count() != 4) {
    throw ConfigError(fmt::format("device Hamiltonian needs 4 modes (a, b, q1, q2), got {}", space_.mode_count()));
  }
  params.validate();

  const auto a = lowering_operator(space_, kResonatorA).elements();
  const auto b = lowering_operator(space_, kResonatorB).elements();
  const auto q1 = lowering_operator(space_, kQubit1).elements();
  const auto q2 = lowering_operator(space_, kQubit2).elements();

  // g (x^dag y + x y^dag - x^dag y^dag - x y) = g (x^dag - x)(y - y^dag) for commuting x, y
  auto exchange = [](const ComplexMatrix& x, const ComplexMatrix& y, double g) -> ComplexMatrix {
    return angular(g) * ((x.adjoint() - x) * (y - y.adjoint()));
  };
  auto number = [](const ComplexMatrix& x) -> ComplexMatrix { return x.adjoint() * x; };
  auto kerr = [](const ComplexMatrix& x) -> ComplexMatrix {
    const ComplexMatrix xd = x.adjoint();
    return xd * xd * x * x;
  };

  static_part_ = angular(params.resonator_freq_a) * number(a) + angular(params.resonator_freq_b) * number(b) +
                 angular(params.anharmonicity_1) * kerr(q1) + angular(params.anharmonicity_2) * kerr(q2) +
                 exchange(a, q1, params.g_a1) + exchange(a, q2, params.g_a2) + exchange(b, q1, params.g_b1) +
                 exchange(b, q2, params.g_b2) + exchange(a, b, params.g_ab) + exchange(q1, q2, params.g_12);
  static_part_ = 0.5 * (static_part_ + static_part_.adjoint()).eval();

  n1_ = number(q1).diagonal().real();
  n2_ = number(q2).diagonal().real();
}

OperatorMatrix DeviceHamiltonian::at(const OperatingPoint& point) const {
  point.validate();
  ComplexMatrix h = static_part_;
  h.diagonal() += (angular(point.qubit_freq_1) * n1_ + angular(point.qubit_freq_2) * n2_).cast<Complex>();
  return OperatorMatrix(space_, std::move(h));
}

OperatorMatrix build_hamiltonian(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space) {
  return DeviceHamiltonian(params, space).at(point);
}

double effective_coupling(const DeviceParams& params, const OperatingPoint& point) {
  point.validate();
  struct Path {
    double resonator;
    double g1;
    double g2;
    const char* name;
  };
  const std::array<Path, 2> paths{{{params.resonator_freq_a, params.g_a1, params.g_a2, "a"},
                                   {params.resonator_freq_b, params.g_b1, params.g_b2, "b"}}};
  const std::array<std::pair<double, int>, 2> qubits{{{point.qubit_freq_1, 1}, {point.qubit_freq_2, 2}}};

  double sum = 0.0;
  for (const auto& path : paths) {
    const double numerator = path.g1 * path.g2;
    for (const auto& [wq, index] : qubits) {
      const double delta = wq - path.resonator;
      if (std::abs(delta) <= 1e-6) {
        throw DomainError(fmt::format("qubit {} is degenerate with resonator {} (Delta_{}{} = {:.3e} GHz)", index,
                                      path.name, path.name, index, delta));
      }
      sum += numerator / delta - numerator / (wq + path.resonator);
    }
  }
  return 0.5 * sum + params.g_12;
}

double find_switch_off(const DeviceParams& params, std::pair<double, double> search_interval) {
  auto [lo, hi] = search_interval;
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
    throw ConfigError(fmt::format("search interval ({}, {}) must be finite and increasing", lo, hi));
  }
  const double wa = params.resonator_freq_a;
  const double wb = params.resonator_freq_b;
  if ((lo <= wa && wa <= hi) || (lo <= wb && wb <= hi)) {
    throw DomainError(fmt::format("search interval ({}, {}) contains a resonator pole", lo, hi));
  }
  auto g = [&](double w) { return effective_coupling(params, {w, w}); };
  double g_lo = g(lo);
  const double g_hi = g(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw DomainError(fmt::format("no sign change of g_eff on ({}, {}) GHz: g_eff = {:.6g} MHz at {}, {:.6g} MHz at {}",
                                  lo, hi, 1e3 * g_lo, lo, 1e3 * g_hi, hi));
  }
  if (!(wa < lo && hi < wb)) {
    throw DomainError(fmt::format("search interval ({}, {}) must lie strictly between the resonators ({}, {})", lo,
                                  hi, wa, wb));
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (std::abs(g_mid) < 1e-7 && hi - lo < 1e-9) return mid;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13) break;
  }
  const double root = 0.5 * (lo + hi);
  if (std::abs(g(root)) >= 1e-7) {
    throw NumericalError("switch-off bisection did not reach |g_eff| < 1e-7 GHz");
  }
  return root;
}

double flux_to_frequency(const DeviceParams& params, QubitId qubit, double control_value) {
  const double period = qubit == QubitId::One ? params.flux_period_1 : params.flux_period_2;
  const double offset = qubit == QubitId::One ? params.flux_offset_1 : params.flux_offset_2;
  if (period == 0.0) throw ConfigError("flux period must be nonzero");
  if (!std::isfinite(control_value)) throw ConfigError("flux control value must be finite");
  const double phase = std::numbers::pi * (control_value - offset) / period;
  return params.qubit_max_freq(qubit) * std::sqrt(std::abs(std::cos(phase)));
}

double frequency_to_flux(const DeviceParams& params, QubitId qubit, double target_ghz, FluxBranch branch) {
  const double period = qubit == QubitId::One ? params.flux_period_1 : params.flux_period_2;
  const double offset = qubit == QubitId::One ? params.flux_offset_1 : params.flux_offset_2;
  const double wmax = params.qubit_max_freq(qubit);
  if (period == 0.0) throw ConfigError("flux period must be nonzero");
  if (!(target_ghz > 0.0) || !std::isfinite(target_ghz)) {
    throw DomainError(fmt::format("target frequency {} GHz must be positive", target_ghz));
  }
  if (target_ghz > wmax) {
    throw DomainError(fmt::format("target {} GHz is above the qubit maximum {} GHz", target_ghz, wmax));
  }
  const double ratio = target_ghz / wmax;
  const double u = std::acos(std::clamp(ratio * ratio, 0.0, 1.0)) / std::numbers::pi;
  const double shift = std::abs(period) * u;
  return branch == FluxBranch::Positive ? offset + shift : offset - shift;
}

}  // namespace dualres
