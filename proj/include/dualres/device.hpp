#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dualres/fock.hpp"

namespace dualres {

/// Mode order of the device Hilbert space: two coupler resonators, then the qubits.
enum Mode : int { kResonatorA = 0, kResonatorB = 1, kQubit1 = 2, kQubit2 = 3 };

enum class QubitId { One, Two };

inline int mode_of(QubitId q) { return q == QubitId::One ? kQubit1 : kQubit2; }

/// Device parameters. Frequencies and couplings are linear frequencies in GHz,
/// coherence times in microseconds (+infinity is allowed for a lossless qubit),
/// flux quantities in the control units of the bias/pulse source.
///
/// The defaults describe the measured double-resonator device: resonators at
/// 4.47 / 4.80 GHz, qubit maxima 4.641 / 4.91 GHz, 27 MHz coupling to the low
/// resonator, 30 MHz to the high one, 0.88 MHz direct qubit-qubit coupling.
/// Anharmonicity, g_ab, T1/T2 and the flux map are not measured values.
struct DeviceParams {
  double resonator_freq_a = 4.47;
  double resonator_freq_b = 4.80;
  double qubit_max_freq_1 = 4.641;
  double qubit_max_freq_2 = 4.91;
  double anharmonicity_1 = -0.250;
  double anharmonicity_2 = -0.250;
  double g_a1 = 0.027;
  double g_a2 = 0.027;
  double g_b1 = 0.030;
  double g_b2 = 0.030;
  double g_ab = 0.0;
  double g_12 = 0.00088;
  double flux_period_1 = 1.0;
  double flux_period_2 = 1.0;
  double flux_offset_1 = 0.0;
  double flux_offset_2 = 0.0;
  double t1_qubit1 = 10.0;
  double t1_qubit2 = 10.0;
  double t2_qubit1 = 1.5;
  double t2_qubit2 = 1.5;

  /// Throws ConfigError on hard violations (non-finite frequencies, resonator
  /// ordering, T2 > 2 T1, non-positive lifetimes).
  void validate() const;

  /// Soft checks: couplings above a tenth of the lowest mode frequency.
  std::vector<std::string> warnings() const;

  double max_qubit_resonator_coupling() const;
  double qubit_max_freq(QubitId q) const { return q == QubitId::One ? qubit_max_freq_1 : qubit_max_freq_2; }
  double anharmonicity(QubitId q) const { return q == QubitId::One ? anharmonicity_1 : anharmonicity_2; }
  double t1(QubitId q) const { return q == QubitId::One ? t1_qubit1 : t1_qubit2; }
  double t2(QubitId q) const { return q == QubitId::One ? t2_qubit1 : t2_qubit2; }

  bool operator==(const DeviceParams&) const = default;
};

/// Instantaneous qubit frequencies (GHz).
struct OperatingPoint {
  double qubit_freq_1 = 0.0;
  double qubit_freq_2 = 0.0;

  void validate() const;
  double freq(QubitId q) const { return q == QubitId::One ? qubit_freq_1 : qubit_freq_2; }
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// GHz -> rad/ns
inline double angular(double ghz) { return kTwoPi * ghz; }

/// Caches the operating-point independent part of the device Hamiltonian so
/// that sweeps only rebuild the two qubit frequency terms.
class DeviceHamiltonian {
 public:
  DeviceHamiltonian(const DeviceParams& params, HilbertSpace space);

  /// H / hbar in rad/ns at the given operating point.
  OperatorMatrix at(const OperatingPoint& point) const;

  const HilbertSpace& space() const { return space_; }

 private:
  HilbertSpace space_;
  ComplexMatrix static_part_;
  Eigen::VectorXd n1_;
  Eigen::VectorXd n2_;
};

/// Full double-resonator Hamiltonian (rad/ns), including counter-rotating
/// coupling terms. Requires a four-mode space ordered (a, b, q1, q2).
OperatorMatrix build_hamiltonian(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space);

/// Dispersive effective qubit-qubit coupling in GHz (signed).
double effective_coupling(const DeviceParams& params, const OperatingPoint& point);

/// Co-tuned frequency (GHz) where the effective coupling vanishes, by bisection.
double find_switch_off(const DeviceParams& params, std::pair<double, double> search_interval);

/// Symmetric-transmon tuning law, GHz.
double flux_to_frequency(const DeviceParams& params, QubitId qubit, double control_value);

enum class FluxBranch { Positive, Negative };

/// Inverse of flux_to_frequency on the requested side of the sweet spot.
double frequency_to_flux(const DeviceParams& params, QubitId qubit, double target_ghz,
                         FluxBranch branch = FluxBranch::Positive);

}  // namespace dualres
