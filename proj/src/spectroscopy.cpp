#include "dualres/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dualres/errors.hpp"
#include "dualres/parallel.hpp"

namespace dualres {
namespace {

constexpr std::array<const char*, 4> kModeNames{"a", "b", "q1", "q2"};

bool is_flux_axis(SweepAxis axis) { return axis == SweepAxis::Flux1 || axis == SweepAxis::Flux2; }

struct PairSample {
  double separation_mhz = 0.0;
  int lower = 0;
  int upper = 0;
};

class PairTracker {
 public:
  PairTracker(const DeviceParams& params, SweepAxis axis, const OperatingPoint& fixed_other, const HilbertSpace& space,
              int mode_first, int mode_second)
      : params_(params), axis_(axis), fixed_(fixed_other), hamiltonian_(params, space) {
    if (mode_first == mode_second) throw ConfigError("pair gap needs two distinct modes");
    std::vector<int> occ(space.mode_count(), 0);
    occ.at(mode_first) = 1;
    first_ = space.index_of(occ);
    occ[mode_first] = 0;
    occ.at(mode_second) = 1;
    second_ = space.index_of(occ);
  }

  PairSample operator()(double value) const {
    const auto eig = eigendecompose_hermitian(hamiltonian_.at(point_on_axis(params_, axis_, value, fixed_)));
    const Eigen::Index n = eig.values.size();
    Eigen::VectorXd weight(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      weight[k] = std::norm(eig.vectors(first_, k)) + std::norm(eig.vectors(second_, k));
    }
    // two largest weights; strict comparison keeps the lower index on ties
    int best = 0;
    for (int k = 1; k < n; ++k) {
      if (weight[k] > weight[best]) best = k;
    }
    int runner = best == 0 ? 1 : 0;
    for (int k = 0; k < n; ++k) {
      if (k != best && weight[k] > weight[runner]) runner = k;
    }
    const int lo = std::min(best, runner);
    const int hi = std::max(best, runner);
    return {1e3 * (eig.values[hi] - eig.values[lo]) / kTwoPi, lo, hi};
  }

 private:
  const DeviceParams& params_;
  SweepAxis axis_;
  OperatingPoint fixed_;
  DeviceHamiltonian hamiltonian_;
  Eigen::Index first_ = 0;
  Eigen::Index second_ = 0;
};

GapResult minimise_separation(const PairTracker& tracker, std::span<const double> values) {
  if (values.size() < 3) throw ConfigError("gap extraction needs at least 3 sweep values");
  std::vector<PairSample> samples(values.size());
  parallel_for(values.size(), [&](std::size_t i) { samples[i] = tracker(values[i]); });

  std::size_t k = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].separation_mhz < samples[k].separation_mhz) k = i;
  }
  if (k == 0 || k + 1 == samples.size()) {
    throw DomainError(fmt::format("bracket too narrow: minimum separation {:.6g} MHz at sweep endpoint {}",
                                  samples[k].separation_mhz, values[k]));
  }

  GapResult best{samples[k].separation_mhz, values[k], {samples[k].lower, samples[k].upper}};
  auto consider = [&](double x) {
    const PairSample s = tracker(x);
    if (s.separation_mhz < best.gap_mhz) best = {s.separation_mhz, x, {s.lower, s.upper}};
  };

  // parabolic vertex through the three points around the discrete minimum
  const double x0 = values[k - 1], x1 = values[k], x2 = values[k + 1];
  const double y0 = samples[k - 1].separation_mhz, y1 = samples[k].separation_mhz, y2 = samples[k + 1].separation_mhz;
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  if (denom != 0.0) {
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if (a > 0.0) {
      const double vertex = -b / (2.0 * a);
      if (vertex > std::min(x0, x2) && vertex < std::max(x0, x2)) consider(vertex);
    }
  }

  // golden-section polish; separation is unimodal inside the bracket
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = std::min(x0, x2), hi = std::max(x0, x2);
  double c = hi - kInvPhi * (hi - lo), d = lo + kInvPhi * (hi - lo);
  PairSample fc = tracker(c), fd = tracker(d);
  const double tol = 1e-10 * std::max(1.0, std::abs(x1));
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    if (fc.separation_mhz < fd.separation_mhz) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = tracker(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = tracker(d);
    }
  }
  if (fc.separation_mhz < best.gap_mhz) best = {fc.separation_mhz, c, {fc.lower, fc.upper}};
  if (fd.separation_mhz < best.gap_mhz) best = {fd.separation_mhz, d, {fd.lower, fd.upper}};
  return best;
}

double distance_to_resonators(const DeviceParams& params, double w) {
  return std::min(std::abs(w - params.resonator_freq_a), std::abs(w - params.resonator_freq_b));
}

}  // namespace

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "flux_1") return SweepAxis::Flux1;
  if (name == "flux_2") return SweepAxis::Flux2;
  if (name == "freq_1") return SweepAxis::Freq1;
  if (name == "freq_2") return SweepAxis::Freq2;
  throw ConfigError(fmt::format("unknown sweep axis '{}' (expected flux_1, flux_2, freq_1, freq_2)", name));
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Flux1: return "flux_1";
    case SweepAxis::Flux2: return "flux_2";
    case SweepAxis::Freq1: return "freq_1";
    case SweepAxis::Freq2: return "freq_2";
  }
  return "?";
}

OperatingPoint point_on_axis(const DeviceParams& params, SweepAxis axis, double value,
                             const OperatingPoint& fixed_other) {
  OperatingPoint p = fixed_other;
  switch (axis) {
    case SweepAxis::Flux1: p.qubit_freq_1 = flux_to_frequency(params, QubitId::One, value); break;
    case SweepAxis::Flux2: p.qubit_freq_2 = flux_to_frequency(params, QubitId::Two, value); break;
    case SweepAxis::Freq1: p.qubit_freq_1 = value; break;
    case SweepAxis::Freq2: p.qubit_freq_2 = value; break;
  }
  return p;
}

std::string bare_state_tag(const HilbertSpace& space, Eigen::Index basis_index) {
  const auto occ = space.occupations_of(basis_index);
  std::string tag;
  for (int m = 0; m < space.mode_count(); ++m) {
    if (occ[m] == 0) continue;
    if (!tag.empty()) tag += '+';
    if (occ[m] > 1) tag += std::to_string(occ[m]);
    tag += m < static_cast<int>(kModeNames.size()) ? kModeNames[m] : fmt::format("m{}", m);
  }
  return tag.empty() ? "g" : tag;
}

LevelLabel label_eigenvector(const HilbertSpace& space, const Eigen::Ref<const Eigen::VectorXcd>& vector) {
  Eigen::Index best = 0;
  vector.cwiseAbs2().maxCoeff(&best);
  const double overlap = std::abs(vector[best]);
  if (overlap * overlap > 0.5) return {bare_state_tag(space, best), overlap};
  return {"mixed", overlap};
}

SpectrumSweep sweep_spectrum(const DeviceParams& params, SweepAxis axis, std::span<const double> values,
                             const OperatingPoint& fixed_other, const HilbertSpace& space,
                             const SweepOptions& options) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1]) && !(values.front() > values.back() && values[i] < values[i - 1])) {
      throw ConfigError("sweep values must be strictly monotone");
    }
  }
  const DeviceHamiltonian hamiltonian(params, space);
  SpectrumSweep sweep;
  sweep.axis = axis;
  sweep.sweep_values.assign(values.begin(), values.end());
  sweep.levels.resize(values.size());
  sweep.labels.resize(values.size());
  const Eigen::Index n = space.dimension();
  const Eigen::Index keep = options.max_levels > 0 ? std::min<Eigen::Index>(options.max_levels, n) : n;

  parallel_for(
      values.size(),
      [&](std::size_t i) {
        const auto eig = eigendecompose_hermitian(hamiltonian.at(point_on_axis(params, axis, values[i], fixed_other)));
        auto& levels = sweep.levels[i];
        auto& labels = sweep.labels[i];
        levels.resize(keep);
        labels.resize(keep);
        for (Eigen::Index k = 0; k < keep; ++k) {
          levels[k] = (eig.values[k] - eig.values[0]) / kTwoPi;
          labels[k] = label_eigenvector(space, eig.vectors.col(k));
        }
      },
      options.threads);
  return sweep;
}

void write_spectrum_csv(const SpectrumSweep& sweep, std::ostream& out) {
  const char* unit = is_flux_axis(sweep.axis) ? "ctrl" : "ghz";
  out << fmt::format("sweep_value_{},level_index,freq_ghz,label,overlap\n", unit);
  for (std::size_t i = 0; i < sweep.sweep_values.size(); ++i) {
    for (std::size_t k = 0; k < sweep.levels[i].size(); ++k) {
      out << fmt::format("{:.10g},{},{:.12g},{},{:.6f}\n", sweep.sweep_values[i], k, sweep.levels[i][k],
                         sweep.labels[i][k].tag, sweep.labels[i][k].overlap);
    }
  }
}

GapResult mode_pair_gap(const DeviceParams& params, SweepAxis axis, std::span<const double> values,
                        const OperatingPoint& fixed_other, const HilbertSpace& space, int mode_first,
                        int mode_second) {
  const PairTracker tracker(params, axis, fixed_other, space, mode_first, mode_second);
  return minimise_separation(tracker, values);
}

std::vector<double> GridSpec::values() const {
  if (count < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError(fmt::format("grid ({}, {}, {}) needs lo < hi and at least 2 points", lo, hi, count));
  }
  std::vector<double> v(count);
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) v[i] = lo + step * i;
  v.back() = hi;
  return v;
}

GapResult qubit_qubit_gap(const DeviceParams& params, double qubit2_freq, const GridSpec& sweep_1,
                          const HilbertSpace& space) {
  if (!(sweep_1.lo < qubit2_freq && qubit2_freq < sweep_1.hi)) {
    throw DomainError(fmt::format("qubit-1 sweep ({}, {}) does not bracket qubit 2 at {} GHz", sweep_1.lo, sweep_1.hi,
                                  qubit2_freq));
  }
  const double guard = 3.0 * params.max_qubit_resonator_coupling();
  for (double w : {sweep_1.lo, sweep_1.hi, qubit2_freq}) {
    // the interval check covers every interior point unless a resonator sits inside the sweep
    if (distance_to_resonators(params, w) < guard - 1e-9) {
      throw DomainError(fmt::format("qubit frequency {} GHz is within 3 g_max = {} GHz of a resonator", w, guard));
    }
  }
  for (double wr : {params.resonator_freq_a, params.resonator_freq_b}) {
    if (sweep_1.lo < wr && wr < sweep_1.hi) {
      throw DomainError(fmt::format("qubit-1 sweep crosses the resonator at {} GHz", wr));
    }
  }
  const auto values = sweep_1.values();
  return mode_pair_gap(params, SweepAxis::Freq1, values, {qubit2_freq, qubit2_freq}, space, kQubit1, kQubit2);
}

std::vector<SetpointGap> gap_vs_setpoint(const DeviceParams& params, std::span<const double> setpoints,
                                         const HilbertSpace& space, const GapScanOptions& options) {
  std::vector<SetpointGap> out(setpoints.size());
  for (std::size_t i = 0; i < setpoints.size(); ++i) {
    SetpointGap& row = out[i];
    row.setpoint = setpoints[i];
    try {
      row.effective_coupling_mhz = 1e3 * effective_coupling(params, {row.setpoint, row.setpoint});
    } catch (const Error&) {
      row.effective_coupling_mhz = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      row.gap = qubit_qubit_gap(
          params, row.setpoint,
          {row.setpoint - options.half_window_ghz, row.setpoint + options.half_window_ghz, options.count}, space);
    } catch (const Error& e) {
      row.error = e.what();
    }
  }
  return out;
}

std::vector<CrossingGap> qubit_resonator_gaps(const DeviceParams& params, SweepAxis axis,
                                              std::span<const double> values, const OperatingPoint& fixed_other,
                                              const HilbertSpace& space) {
  const int qubit_mode = (axis == SweepAxis::Flux1 || axis == SweepAxis::Freq1) ? kQubit1 : kQubit2;
  auto bare_qubit = [&](double v) {
    const OperatingPoint p = point_on_axis(params, axis, v, fixed_other);
    return qubit_mode == kQubit1 ? p.qubit_freq_1 : p.qubit_freq_2;
  };
  std::vector<CrossingGap> out;
  const double window = 10.0 * params.max_qubit_resonator_coupling();
  for (int resonator : {kResonatorA, kResonatorB}) {
    const double wr = resonator == kResonatorA ? params.resonator_freq_a : params.resonator_freq_b;
    // each contiguous run of sweep points near the resonator that contains a bare crossing
    std::size_t i = 0;
    while (i < values.size()) {
      if (std::abs(bare_qubit(values[i]) - wr) > window) {
        ++i;
        continue;
      }
      std::size_t j = i;
      bool crosses = false;
      while (j + 1 < values.size() && std::abs(bare_qubit(values[j + 1]) - wr) <= window) {
        if ((bare_qubit(values[j]) - wr) * (bare_qubit(values[j + 1]) - wr) <= 0.0) crosses = true;
        ++j;
      }
      if (crosses && j - i >= 2) {
        const std::span<const double> run(values.data() + i, j - i + 1);
        out.push_back({qubit_mode, resonator, mode_pair_gap(params, axis, run, fixed_other, space, qubit_mode, resonator)});
      }
      i = j + 1;
    }
  }
  return out;
}

SpectralSwitchOff spectral_switch_off(const DeviceParams& params, std::pair<double, double> interval,
                                      const HilbertSpace& space, double half_window_ghz) {
  auto [lo, hi] = interval;
  if (!(lo < hi)) throw ConfigError("switch-off interval must be increasing");
  const double margin = 3.0 * params.max_qubit_resonator_coupling() + half_window_ghz;
  lo = std::max(lo, params.resonator_freq_a + margin);
  hi = std::min(hi, params.resonator_freq_b - margin);
  if (!(lo < hi)) {
    throw DomainError(fmt::format("switch-off interval leaves no setpoint {} GHz clear of both resonators", margin));
  }
  auto gap_at = [&](double w) {
    return qubit_qubit_gap(params, w, {w - half_window_ghz, w + half_window_ghz, 21}, space).gap_mhz;
  };
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo), d = lo + kInvPhi * (hi - lo);
  double fc = gap_at(c), fd = gap_at(d);
  while (hi - lo > 1e-7) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = gap_at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = gap_at(d);
    }
  }
  return fc < fd ? SpectralSwitchOff{c, fc} : SpectralSwitchOff{d, fd};
}

}  // namespace dualres
