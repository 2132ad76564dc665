#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualres/device.hpp"

namespace dualres {

enum class SweepAxis { Flux1, Flux2, Freq1, Freq2 };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Operating point reached when `axis` is set to `value`; the other qubit keeps
/// its frequency from `fixed_other`. Flux axes go through flux_to_frequency.
OperatingPoint point_on_axis(const DeviceParams& params, SweepAxis axis, double value,
                             const OperatingPoint& fixed_other);

/// Bare product-state tag: "g" for vacuum, otherwise the excited modes joined
/// with '+', multiplicity as a prefix ("a", "q1+q2", "2q1").
std::string bare_state_tag(const HilbertSpace& space, Eigen::Index basis_index);

struct LevelLabel {
  std::string tag;       // "mixed" when overlap^2 <= 0.5
  double overlap = 0.0;  // |<bare|dressed>| of the best bare state
};

LevelLabel label_eigenvector(const HilbertSpace& space, const Eigen::Ref<const Eigen::VectorXcd>& vector);

struct SpectrumSweep {
  SweepAxis axis = SweepAxis::Freq1;
  std::vector<double> sweep_values;
  std::vector<std::vector<double>> levels;  // GHz above the ground state, ascending
  std::vector<std::vector<LevelLabel>> labels;
};

struct SweepOptions {
  int max_levels = 0;    // 0 keeps every level
  unsigned threads = 0;  // 0 = hardware concurrency
};

SpectrumSweep sweep_spectrum(const DeviceParams& params, SweepAxis axis, std::span<const double> values,
                             const OperatingPoint& fixed_other, const HilbertSpace& space,
                             const SweepOptions& options = {});

/// Columns: sweep_value_<unit>, level_index, freq_ghz, label, overlap.
void write_spectrum_csv(const SpectrumSweep& sweep, std::ostream& out);

struct GapResult {
  double gap_mhz = 0.0;
  double location = 0.0;            // sweep units
  std::pair<int, int> level_pair;   // level indices at the minimum (ground = 0)
};

/// Minimum separation along `values` between the two dressed levels carrying
/// the most weight on the single-excitation states of `mode_first` and
/// `mode_second`. The grid minimum is refined by a parabolic vertex and then
/// polished by golden-section search on the exact spectrum. Throws DomainError
/// when the minimum sits at a grid endpoint.
GapResult mode_pair_gap(const DeviceParams& params, SweepAxis axis, std::span<const double> values,
                        const OperatingPoint& fixed_other, const HilbertSpace& space, int mode_first,
                        int mode_second);

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 201;

  std::vector<double> values() const;
};

/// Qubit-qubit anti-crossing obtained by sweeping qubit 1 with qubit 2 held at
/// `qubit2_freq`. Half the gap estimates |g_eff|.
GapResult qubit_qubit_gap(const DeviceParams& params, double qubit2_freq, const GridSpec& sweep_1,
                          const HilbertSpace& space);

struct GapScanOptions {
  double half_window_ghz = 0.02;
  int count = 201;
  unsigned threads = 0;
};

struct SetpointGap {
  double setpoint = 0.0;
  double effective_coupling_mhz = 0.0;  // dispersive formula, co-tuned at the setpoint
  std::optional<GapResult> gap;
  std::string error;  // set when gap is empty
};

std::vector<SetpointGap> gap_vs_setpoint(const DeviceParams& params, std::span<const double> setpoints,
                                         const HilbertSpace& space, const GapScanOptions& options = {});

/// Each qubit-resonator anti-crossing that the swept qubit's bare frequency
/// passes through along `values`.
struct CrossingGap {
  int qubit_mode = kQubit1;
  int resonator_mode = kResonatorA;
  GapResult gap;
};

std::vector<CrossingGap> qubit_resonator_gaps(const DeviceParams& params, SweepAxis axis,
                                              std::span<const double> values, const OperatingPoint& fixed_other,
                                              const HilbertSpace& space);

struct SpectralSwitchOff {
  double frequency = 0.0;  // GHz, co-tuned setpoint with the smallest qubit-qubit gap
  double gap_mhz = 0.0;
};

/// Switch-off point read from spectra: minimises the qubit-qubit gap over
/// setpoints in `interval`, clipped to where every probe window stays 3 g_max
/// clear of both resonators.
SpectralSwitchOff spectral_switch_off(const DeviceParams& params, std::pair<double, double> interval,
                                      const HilbertSpace& space, double half_window_ghz = 0.005);

}  // namespace dualres
