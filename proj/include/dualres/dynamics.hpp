#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualres/device.hpp"
#include "dualres/lindblad.hpp"

namespace dualres {

/// Density matrix on a HilbertSpace.
class DensityState {
 public:
  DensityState(HilbertSpace space, ComplexMatrix rho);

  static DensityState pure(const HilbertSpace& space, const Eigen::VectorXcd& amplitudes);
  static DensityState bare(const HilbertSpace& space, std::span<const int> occupations);

  const HilbertSpace& space() const { return space_; }
  const ComplexMatrix& matrix() const { return rho_; }

  double trace_error() const;       // |tr rho - 1|
  double hermitian_defect() const;  // max |rho - rho^dag|
  double min_eigenvalue() const;
  double purity() const;            // tr rho^2
  double expectation(const OperatorMatrix& op) const;

  /// Throws NumericalError unless trace, Hermiticity and positivity hold
  /// (1e-8, 1e-10, -1e-8).
  void validate() const;

 private:
  HilbertSpace space_;
  ComplexMatrix rho_;
};

struct DissipationOptions {
  bool enabled = true;
  // resonator energy-decay times in us; infinite (no loss) unless configured
  double resonator_t1_a_us = std::numeric_limits<double>::infinity();
  double resonator_t1_b_us = std::numeric_limits<double>::infinity();
};

/// 1/T_phi in 1/us for the given T1, T2 (us); zero when T2 = 2 T1.
double pure_dephasing_rate(double t1_us, double t2_us);

/// Per qubit: sqrt(1/T1) a and sqrt(2/T_phi) a^dag a, with rates in 1/ns.
/// Terms with zero rate are omitted; lossless qubits give an empty list.
std::vector<OperatorMatrix> collapse_operators(const DeviceParams& params, const HilbertSpace& space,
                                               const DissipationOptions& options = {});

struct Stage {
  double duration_ns = 0.0;
  OperatingPoint point;
  std::optional<QubitId> pi_prep;  // ideal flip applied at the start of the stage
};

/// Staged flux schedule. The end state of `readout_stage` is measured. With a
/// fixed prep-to-readout interval the readout stage is padded (at its own
/// operating point) until the elapsed time reaches the interval.
struct PulseSchedule {
  std::vector<Stage> stages;
  std::size_t readout_stage = 0;
  std::optional<double> readout_interval_ns;

  void validate() const;
  /// Duration of each stage up to the readout stage, padding included.
  std::vector<double> effective_durations() const;
  double readout_time() const;
};

/// Stage A: flip qubit 2 at the bias point; stage B: hold `interaction` for
/// tau; stage C: back at bias, padded to the readout interval when one is set.
PulseSchedule vacuum_rabi_schedule(const OperatingPoint& bias, const OperatingPoint& interaction, double tau_ns,
                                   std::optional<double> readout_interval_ns = std::nullopt);

struct IntegratorSettings {
  double max_step_ns = 0.25;
  double sample_interval_ns = 1.0;
  bool check_positivity = true;
  double trace_tolerance = 1e-8;
};

struct Observable {
  std::string name;
  OperatorMatrix op;
};

struct TraceSeries {
  std::vector<double> times_ns;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[observable][sample]
  std::vector<double> readout;              // expectations of the measured state
  double max_trace_error = 0.0;
  double max_hermitian_defect = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  std::optional<DensityState> final_state;
};

/// Dressed eigenstates at `point` whose dominant bare state has the given
/// qubit excited; the projector is the readout observable.
OperatorMatrix dressed_excitation_projector(const DeviceParams& params, const OperatingPoint& point,
                                            const HilbertSpace& space, QubitId qubit);

/// Dressed ground state of the device at `point`.
DensityState dressed_ground_state(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space);

/// Ideal selective pi flip: swaps the dressed ground state with the dressed
/// single-excitation state of `qubit` at `point`, identity elsewhere.
OperatorMatrix pi_flip_unitary(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space,
                               QubitId qubit);

TraceSeries evolve(const DeviceParams& params, const PulseSchedule& schedule, const DensityState& initial,
                   const HilbertSpace& space, const std::vector<Observable>& observables,
                   const IntegratorSettings& settings = {}, const DissipationOptions& dissipation = {});

/// Closed-form exchange probability [4g^2/(D^2+4g^2)] sin^2(pi sqrt(4g^2+D^2) t)
/// with g, D in MHz and t in ns.
double two_level_transfer(double g_eff_mhz, double delta12_mhz, double t_ns);

struct ChevronMap {
  std::vector<double> detunings_mhz;  // qubit-1 offset from the qubit-2 target
  std::vector<double> times_ns;
  Eigen::MatrixXd p1;                 // rows: detuning, cols: time
};

struct ChevronSettings {
  IntegratorSettings integrator;
  DissipationOptions dissipation;
  std::optional<double> readout_interval_ns;
  unsigned threads = 0;
};

/// Vacuum-Rabi chevron: for every qubit-1 offset, prepare qubit 2 at `bias`,
/// step both qubits to (q2_target + offset, q2_target) for tau, step back and
/// read the dressed qubit-1 population at the bias point.
ChevronMap vacuum_rabi_chevron(const DeviceParams& params, const OperatingPoint& bias, double q2_target_ghz,
                               std::span<const double> q1_offsets_mhz, std::span<const double> taus_ns,
                               const HilbertSpace& space, const ChevronSettings& settings = {});

/// scale * p1 + baseline
std::vector<double> contrast_map(std::span<const double> p1_series, double scale, double baseline);

}  // namespace dualres
