#include "dualres/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dualres/errors.hpp"
#include "dualres/parallel.hpp"

namespace dualres {
namespace {

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Re tr(a b) without forming the product
  return (a.transpose().cwiseProduct(b)).sum().real();
}

Eigen::Index single_excitation_index(const HilbertSpace& space, int mode) {
  std::vector<int> occ(space.mode_count(), 0);
  occ.at(mode) = 1;
  return space.index_of(occ);
}

void validate_tau_grid(std::span<const double> taus) {
  if (taus.size() < 2) {
    throw ConfigError(fmt::format("tau grid needs at least 2 samples, got {}", taus.size()));
  }
  if (!(taus.front() >= 0.0)) throw ConfigError("tau grid must start at a non-negative time");
  for (std::size_t i = 1; i < taus.size(); ++i) {
    if (!(taus[i] > taus[i - 1])) throw ConfigError("tau grid must be strictly increasing");
  }
}

}  // namespace

DensityState::DensityState(HilbertSpace space, ComplexMatrix rho) : space_(std::move(space)), rho_(std::move(rho)) {
  if (rho_.rows() != space_.dimension() || rho_.cols() != space_.dimension()) {
    throw ConfigError("density matrix shape does not match its space");
  }
}

DensityState DensityState::pure(const HilbertSpace& space, const Eigen::VectorXcd& amplitudes) {
  if (amplitudes.size() != space.dimension()) throw ConfigError("state vector length does not match space");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw ConfigError("state vector has zero norm");
  const Eigen::VectorXcd v = amplitudes / norm;
  return DensityState(space, v * v.adjoint());
}

DensityState DensityState::bare(const HilbertSpace& space, std::span<const int> occupations) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dimension());
  v[space.index_of(occupations)] = 1.0;
  return pure(space, v);
}

double DensityState::trace_error() const { return std::abs(rho_.trace() - Complex(1.0, 0.0)); }

double DensityState::hermitian_defect() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityState::min_eigenvalue() const {
  const ComplexMatrix h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

double DensityState::purity() const { return real_trace_product(rho_, rho_); }

double DensityState::expectation(const OperatorMatrix& op) const {
  if (!(op.space() == space_)) throw ConfigError("observable lives on a different space");
  return real_trace_product(op.elements(), rho_);
}

void DensityState::validate() const {
  if (trace_error() > 1e-8) throw NumericalError(fmt::format("density matrix trace off by {:.3e}", trace_error()));
  if (hermitian_defect() > 1e-10) {
    throw NumericalError(fmt::format("density matrix not Hermitian (defect {:.3e})", hermitian_defect()));
  }
  const double lambda = min_eigenvalue();
  if (lambda < -1e-8) throw NumericalError(fmt::format("density matrix has eigenvalue {:.3e}", lambda));
}

double pure_dephasing_rate(double t1_us, double t2_us) {
  const double rate = 1.0 / t2_us - 1.0 / (2.0 * t1_us);
  // T2 = 2 T1 up to rounding is lifetime limited
  return rate <= 1e-12 * (1.0 / t2_us) ? 0.0 : rate;
}

std::vector<OperatorMatrix> collapse_operators(const DeviceParams& params, const HilbertSpace& space,
                                               const DissipationOptions& options) {
  if (space.mode_count() != 4) throw ConfigError("collapse operators need the 4-mode device space");
  params.validate();
  std::vector<OperatorMatrix> out;
  if (!options.enabled) return out;
  for (QubitId q : {QubitId::One, QubitId::Two}) {
    const double t1 = params.t1(q);
    const double t2 = params.t2(q);
    const int mode = mode_of(q);
    if (std::isfinite(t1)) {
      out.push_back(std::sqrt(1e-3 / t1) * lowering_operator(space, mode));
    }
    const double dephasing = pure_dephasing_rate(t1, t2);
    if (dephasing > 0.0) {
      out.push_back(std::sqrt(2.0 * 1e-3 * dephasing) * number_operator(space, mode));
    }
  }
  for (auto [t1, mode] : {std::pair{options.resonator_t1_a_us, int(kResonatorA)},
                          std::pair{options.resonator_t1_b_us, int(kResonatorB)}}) {
    if (!(t1 > 0.0)) throw ConfigError("resonator lifetimes must be positive");
    if (std::isfinite(t1)) out.push_back(std::sqrt(1e-3 / t1) * lowering_operator(space, mode));
  }
  return out;
}

void PulseSchedule::validate() const {
  if (stages.empty()) throw ConfigError("pulse schedule needs at least one stage");
  if (readout_stage >= stages.size()) throw ConfigError("readout stage index out of range");
  double sum = 0.0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (!(stages[s].duration_ns >= 0.0) || !std::isfinite(stages[s].duration_ns)) {
      throw ConfigError(fmt::format("stage {} has invalid duration {}", s, stages[s].duration_ns));
    }
    stages[s].point.validate();
    if (s <= readout_stage) sum += stages[s].duration_ns;
  }
  if (readout_interval_ns && *readout_interval_ns < sum - 1e-9) {
    throw ConfigError(fmt::format("prep-to-readout interval {} ns is shorter than the scheduled {} ns",
                                  *readout_interval_ns, sum));
  }
}

std::vector<double> PulseSchedule::effective_durations() const {
  std::vector<double> d;
  double sum = 0.0;
  for (std::size_t s = 0; s <= readout_stage && s < stages.size(); ++s) {
    d.push_back(stages[s].duration_ns);
    sum += stages[s].duration_ns;
  }
  if (readout_interval_ns && !d.empty()) d.back() += std::max(0.0, *readout_interval_ns - sum);
  return d;
}

double PulseSchedule::readout_time() const {
  double t = 0.0;
  for (double d : effective_durations()) t += d;
  return t;
}

PulseSchedule vacuum_rabi_schedule(const OperatingPoint& bias, const OperatingPoint& interaction, double tau_ns,
                                   std::optional<double> readout_interval_ns) {
  PulseSchedule schedule;
  schedule.stages = {Stage{0.0, bias, QubitId::Two}, Stage{tau_ns, interaction, std::nullopt},
                     Stage{0.0, bias, std::nullopt}};
  schedule.readout_stage = 2;
  schedule.readout_interval_ns = readout_interval_ns;
  return schedule;
}

OperatorMatrix dressed_excitation_projector(const DeviceParams& params, const OperatingPoint& point,
                                            const HilbertSpace& space, QubitId qubit) {
  const auto eig = eigendecompose_hermitian(build_hamiltonian(params, point, space));
  const int mode = mode_of(qubit);
  const Eigen::Index n = space.dimension();
  ComplexMatrix projector = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index dominant = 0;
    eig.vectors.col(k).cwiseAbs2().maxCoeff(&dominant);
    if (space.occupation(dominant, mode) >= 1) projector += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
  }
  return OperatorMatrix(space, std::move(projector));
}

DensityState dressed_ground_state(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space) {
  const auto eig = eigendecompose_hermitian(build_hamiltonian(params, point, space));
  return DensityState::pure(space, eig.vectors.col(0));
}

OperatorMatrix pi_flip_unitary(const DeviceParams& params, const OperatingPoint& point, const HilbertSpace& space,
                               QubitId qubit) {
  const auto eig = eigendecompose_hermitian(build_hamiltonian(params, point, space));
  const Eigen::Index target = single_excitation_index(space, mode_of(qubit));
  Eigen::Index excited = 1;
  for (Eigen::Index k = 2; k < eig.values.size(); ++k) {
    if (std::norm(eig.vectors(target, k)) > std::norm(eig.vectors(target, excited))) excited = k;
  }
  const Eigen::VectorXcd g = eig.vectors.col(0);
  const Eigen::VectorXcd e = eig.vectors.col(excited);
  const Eigen::Index n = space.dimension();
  ComplexMatrix u = ComplexMatrix::Identity(n, n) - g * g.adjoint() - e * e.adjoint() + e * g.adjoint() +
                    g * e.adjoint();
  return OperatorMatrix(space, std::move(u));
}

TraceSeries evolve(const DeviceParams& params, const PulseSchedule& schedule, const DensityState& initial,
                   const HilbertSpace& space, const std::vector<Observable>& observables,
                   const IntegratorSettings& settings, const DissipationOptions& dissipation) {
  schedule.validate();
  if (!(initial.space() == space)) throw ConfigError("initial state lives on a different space");
  initial.validate();
  if (!(settings.sample_interval_ns > 0.0)) throw ConfigError("sample interval must be positive");
  for (const auto& obs : observables) {
    if (!(obs.op.space() == space)) throw ConfigError(fmt::format("observable '{}' on a different space", obs.name));
  }

  const DeviceHamiltonian model(params, space);
  const auto collapse = collapse_operators(params, space, dissipation);
  const auto durations = schedule.effective_durations();

  TraceSeries series;
  for (const auto& obs : observables) series.names.push_back(obs.name);
  series.values.resize(observables.size());
  if (settings.check_positivity) series.min_eigenvalue = std::numeric_limits<double>::infinity();

  ComplexMatrix rho = initial.matrix();
  auto record = [&](double t) {
    const DensityState state(space, rho);
    const double drift = state.trace_error();
    series.max_trace_error = std::max(series.max_trace_error, drift);
    series.max_hermitian_defect = std::max(series.max_hermitian_defect, state.hermitian_defect());
    if (drift > settings.trace_tolerance) {
      throw NumericalError(fmt::format("trace drift {:.3e} at t = {} ns exceeds {:.1e}; reduce the step ({} ns)", drift,
                                       t, settings.trace_tolerance, settings.max_step_ns));
    }
    if (settings.check_positivity) series.min_eigenvalue = std::min(series.min_eigenvalue, state.min_eigenvalue());
    series.times_ns.push_back(t);
    for (std::size_t k = 0; k < observables.size(); ++k) series.values[k].push_back(state.expectation(observables[k].op));
  };

  long sample = 0;
  double t = 0.0;
  const double eps = 1e-9;
  for (std::size_t s = 0; s < durations.size(); ++s) {
    const Stage& stage = schedule.stages[s];
    if (stage.pi_prep) {
      const auto u = pi_flip_unitary(params, stage.point, space, *stage.pi_prep).elements();
      rho = u * rho * u.adjoint();
    }
    const StagePropagator propagator(model.at(stage.point), collapse, settings.max_step_ns);
    const double end = t + durations[s];
    const bool last = s + 1 == durations.size();
    for (;;) {
      const double ts = static_cast<double>(sample) * settings.sample_interval_ns;
      if (last ? ts > end + eps : ts >= end - eps) break;
      propagator.advance(rho, std::max(0.0, ts - t));
      t = std::max(t, ts);
      record(ts);
      ++sample;
    }
    propagator.advance(rho, std::max(0.0, end - t));
    t = end;
  }

  const DensityState final_state(space, rho);
  for (const auto& obs : observables) series.readout.push_back(final_state.expectation(obs.op));
  series.max_trace_error = std::max(series.max_trace_error, final_state.trace_error());
  if (series.max_trace_error > settings.trace_tolerance) {
    throw NumericalError(fmt::format("trace drift {:.3e} exceeds {:.1e}", series.max_trace_error,
                                     settings.trace_tolerance));
  }
  series.final_state = final_state;
  return series;
}

double two_level_transfer(double g_eff_mhz, double delta12_mhz, double t_ns) {
  const double four_g2 = 4.0 * g_eff_mhz * g_eff_mhz;
  const double rabi2 = four_g2 + delta12_mhz * delta12_mhz;
  if (rabi2 == 0.0) return 0.0;
  const double s = std::sin(std::numbers::pi * std::sqrt(rabi2) * 1e-3 * t_ns);
  return four_g2 / rabi2 * s * s;
}

ChevronMap vacuum_rabi_chevron(const DeviceParams& params, const OperatingPoint& bias, double q2_target_ghz,
                               std::span<const double> q1_offsets_mhz, std::span<const double> taus_ns,
                               const HilbertSpace& space, const ChevronSettings& settings) {
  validate_tau_grid(taus_ns);
  if (q1_offsets_mhz.empty()) throw ConfigError("chevron needs at least one detuning");
  bias.validate();
  const double guard = 3.0 * params.max_qubit_resonator_coupling();
  for (double wr : {params.resonator_freq_a, params.resonator_freq_b}) {
    if (std::abs(q2_target_ghz - wr) < guard) {
      throw DomainError(fmt::format("qubit-2 target {} GHz is within 3 g_max = {} GHz of the resonator at {} GHz",
                                    q2_target_ghz, guard, wr));
    }
  }
  const double tau_max = taus_ns.back();
  if (settings.readout_interval_ns && *settings.readout_interval_ns < tau_max) {
    throw ConfigError(fmt::format("readout interval {} ns is shorter than the longest tau {} ns",
                                  *settings.readout_interval_ns, tau_max));
  }

  const DeviceHamiltonian model(params, space);
  const auto collapse = collapse_operators(params, space, settings.dissipation);
  const double dt = settings.integrator.max_step_ns;

  // prepared state: dressed ground at bias, then the selective flip of qubit 2
  const ComplexMatrix flip = pi_flip_unitary(params, bias, space, QubitId::Two).elements();
  const ComplexMatrix ground = dressed_ground_state(params, bias, space).matrix();
  const ComplexMatrix rho0 = flip * ground * flip.adjoint();

  // readout observable per tau, propagated back through the padding at bias
  const ComplexMatrix projector = dressed_excitation_projector(params, bias, space, QubitId::One).elements();
  std::vector<ComplexMatrix> readout(taus_ns.size(), projector);
  if (settings.readout_interval_ns) {
    const StagePropagator padding(model.at(bias), collapse, dt);
    ComplexMatrix o = projector;
    double s = 0.0;
    for (std::size_t k = taus_ns.size(); k-- > 0;) {
      const double pad = *settings.readout_interval_ns - taus_ns[k];
      padding.advance_adjoint(o, pad - s);
      s = pad;
      readout[k] = o;
    }
  }

  ChevronMap map;
  map.detunings_mhz.assign(q1_offsets_mhz.begin(), q1_offsets_mhz.end());
  map.times_ns.assign(taus_ns.begin(), taus_ns.end());
  map.p1.resize(static_cast<Eigen::Index>(q1_offsets_mhz.size()), static_cast<Eigen::Index>(taus_ns.size()));

  parallel_for(
      q1_offsets_mhz.size(),
      [&](std::size_t row) {
        const OperatingPoint interaction{q2_target_ghz + 1e-3 * q1_offsets_mhz[row], q2_target_ghz};
        const StagePropagator hold(model.at(interaction), collapse, dt);
        ComplexMatrix rho = rho0;
        double t = 0.0;
        for (std::size_t k = 0; k < taus_ns.size(); ++k) {
          hold.advance(rho, taus_ns[k] - t);
          t = taus_ns[k];
          map.p1(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) = real_trace_product(readout[k], rho);
        }
        const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
        if (drift > settings.integrator.trace_tolerance) {
          throw NumericalError(fmt::format("chevron column at {} MHz: trace drift {:.3e}", q1_offsets_mhz[row], drift));
        }
      },
      settings.threads);
  return map;
}

std::vector<double> contrast_map(std::span<const double> p1_series, double scale, double baseline) {
  if (!std::isfinite(scale)) throw ConfigError("contrast scale must be finite");
  std::vector<double> out(p1_series.size());
  std::transform(p1_series.begin(), p1_series.end(), out.begin(), [&](double p) { return scale * p + baseline; });
  return out;
}

}  // namespace dualres
