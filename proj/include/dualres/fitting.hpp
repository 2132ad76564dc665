#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualres/dynamics.hpp"

namespace dualres {

struct TimeTrace {
  std::vector<double> times;   // ascending
  std::vector<double> values;
  std::vector<double> sigmas;  // empty, or one per point

  void validate() const;  // ConfigError on shape/order problems or < 8 points
};

/// Reads `time_ns,value[,sigma]` with an optional header line.
TimeTrace read_trace_csv(std::istream& in);

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
};

struct FitOutcome {
  std::string model;  // "exp_decay", "damped_cosine" or "chevron_hyperbola"
  std::vector<FitParameter> parameters;
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;

  const FitParameter& parameter(const std::string& name) const;
  double value(const std::string& name) const { return parameter(name).value; }
  double sigma(const std::string& name) const { return parameter(name).sigma; }
};

/// A exp(-t/T1) + c. Parameters: amplitude, T1 (time units), offset.
FitOutcome fit_exp_decay(const TimeTrace& trace);

struct OscillationSettings {
  double peak_to_median = 20.0;  // periodogram peak over its median power
  double min_periods = 2.0;      // within the time window
  double min_amplitude = 0.0;    // absolute, on the fitted amplitude
};

/// A exp(-t/tau) cos(2 pi f t + phi) + c. Parameters: amplitude, frequency
/// (cycles per time unit), phase, decay_time (inf when undamped), offset.
FitOutcome fit_damped_cosine(const TimeTrace& trace, const OscillationSettings& settings = {});

/// Detuning-column frequencies f(D) = sqrt(4 g^2 + s^2 (D - D0)^2), all in MHz.
/// The scale s absorbs the dispersive compression of the dressed detuning
/// relative to the applied one; s = 1 for bare qubits.
FitOutcome fit_chevron_hyperbola(const std::vector<double>& detunings_mhz, const std::vector<double>& freqs_mhz);

struct ChevronEstimate {
  bool below_floor = false;
  double g_mhz = 0.0;          // |g|; NaN when no column oscillates
  double g_sigma_mhz = 0.0;
  double offset_mhz = 0.0;     // hyperbola vertex on the detuning axis
  double offset_sigma_mhz = 0.0;
  double detuning_scale = 1.0;
  double floor_mhz = 0.0;      // 1 / tau span
  std::vector<double> column_detunings_mhz;  // columns with detected oscillation
  std::vector<double> column_freqs_mhz;
  std::optional<FitOutcome> hyperbola;
};

struct ChevronFitSettings {
  OscillationSettings oscillation{20.0, 2.0, 0.02};
  int min_columns = 5;
};

/// Time-domain coupling estimate from a chevron: each detuning row is fitted
/// with fit_damped_cosine and the detected frequencies with the hyperbola.
/// No detected column at all is reported as below the sensitivity floor.
ChevronEstimate geff_from_chevron(const ChevronMap& chevron, const ChevronFitSettings& settings = {});

}  // namespace dualres
