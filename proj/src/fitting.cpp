#include "dualres/fitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "dualres/errors.hpp"
#include "dualres/least_squares.hpp"
#include "dualres/parallel.hpp"

namespace dualres {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> inverse_weights(const TimeTrace& trace) {
  std::vector<double> w(trace.times.size(), 1.0);
  if (!trace.sigmas.empty()) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / trace.sigmas[i];
  }
  return w;
}

double span_of(const TimeTrace& trace) { return trace.times.back() - trace.times.front(); }

double parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ConfigError(fmt::format("trace line {}: '{}' is not a number", line, field));
  }
  return value;
}

struct Periodogram {
  double peak_freq = 0.0;
  std::complex<double> peak_transform;
  double peak_power = 0.0;
  double median_power = 0.0;
};

// Discrete Fourier magnitude of the mean-subtracted trace on a 4x oversampled
// grid up to the Nyquist frequency of the median spacing.
Periodogram periodogram(const TimeTrace& trace) {
  const std::size_t n = trace.times.size();
  const double mean = std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> dts(n - 1);
  for (std::size_t i = 1; i < n; ++i) dts[i - 1] = trace.times[i] - trace.times[i - 1];
  std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
  const double dt = dts[dts.size() / 2];
  const double span = span_of(trace);
  const double df = 1.0 / (4.0 * span);
  const auto count = static_cast<std::size_t>(std::floor(0.5 / dt / df));

  Periodogram out;
  std::vector<double> powers;
  powers.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    const double f = df * static_cast<double>(k);
    std::complex<double> x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x += (trace.values[i] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * f * trace.times[i]);
    }
    const double p = std::norm(x);
    powers.push_back(p);
    if (p > out.peak_power) {
      out.peak_power = p;
      out.peak_freq = f;
      out.peak_transform = x;
    }
  }
  if (powers.empty()) return out;
  std::nth_element(powers.begin(), powers.begin() + powers.size() / 2, powers.end());
  out.median_power = powers[powers.size() / 2];
  return out;
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

}  // namespace

void TimeTrace::validate() const {
  if (times.size() != values.size()) throw ConfigError("trace times and values differ in length");
  if (!sigmas.empty() && sigmas.size() != times.size()) throw ConfigError("trace uncertainties differ in length");
  if (times.size() < 8) throw ConfigError(fmt::format("trace has {} points; at least 8 are needed", times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) throw ConfigError("trace contains non-finite values");
    if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("trace times must be strictly ascending");
    if (!sigmas.empty() && !(sigmas[i] > 0.0 && std::isfinite(sigmas[i]))) {
      throw ConfigError("trace uncertainties must be positive");
    }
  }
}

TimeTrace read_trace_csv(std::istream& in) {
  TimeTrace trace;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (trace.times.empty() && columns == 0) {
      const auto first = fields.front().find_first_not_of(" \t");
      if (first != std::string_view::npos && std::isalpha(static_cast<unsigned char>(fields.front()[first]))) {
        columns = fields.size();
        continue;  // header
      }
    }
    if (fields.size() != 2 && fields.size() != 3) {
      throw ConfigError(fmt::format("trace line {}: expected 2 or 3 columns, got {}", line_no, fields.size()));
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) throw ConfigError(fmt::format("trace line {}: inconsistent column count", line_no));
    trace.times.push_back(parse_number(fields[0], line_no));
    trace.values.push_back(parse_number(fields[1], line_no));
    if (fields.size() == 3) trace.sigmas.push_back(parse_number(fields[2], line_no));
  }
  trace.validate();
  return trace;
}

const FitParameter& FitOutcome::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw ConfigError(fmt::format("model {} has no parameter '{}'", model, name));
}

FitOutcome fit_exp_decay(const TimeTrace& trace) {
  trace.validate();
  const auto n = static_cast<Eigen::Index>(trace.times.size());
  const auto [lo, hi] = std::minmax_element(trace.values.begin(), trace.values.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  if (*hi - *lo <= 1e-12 * std::max(scale, 1e-300)) throw DomainError("no decay detected (constant trace, T1 unbounded)");

  const auto w = inverse_weights(trace);
  const double t0 = trace.times.front();
  // p = (A, k, c) with A the value above offset at the first sample
  ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = trace.times[i] - t0;
      const double e = std::exp(-p[1] * t);
      r[i] = w[i] * (p[0] * e + p[2] - trace.values[i]);
      if (jac) {
        (*jac)(i, 0) = w[i] * e;
        (*jac)(i, 1) = -w[i] * p[0] * t * e;
        (*jac)(i, 2) = w[i];
      }
    }
  };

  const double span = span_of(trace);
  const std::size_t tail = std::max<std::size_t>(1, trace.values.size() / 10);
  const double c0 = std::accumulate(trace.values.end() - static_cast<long>(tail), trace.values.end(), 0.0) /
                    static_cast<double>(tail);
  std::optional<LmResult> best;
  for (double factor : {0.3, 1.0, 3.0, 10.0}) {
    Eigen::VectorXd p0(3);
    p0 << trace.values.front() - c0, factor / span, c0;
    auto result = levenberg_marquardt(fn, p0, n);
    if (!best || result.cost < best->cost) best = std::move(result);
  }
  if (!best->converged) throw NumericalError("exponential fit did not converge within 200 iterations");
  const double k = best->params[1];
  if (!(k * span > 1e-2)) throw DomainError("no decay detected (T1 unbounded)");
  const double t1 = 1.0 / k;
  double min_dt = kInf;
  for (std::size_t i = 1; i < trace.times.size(); ++i) min_dt = std::min(min_dt, trace.times[i] - trace.times[i - 1]);
  if (t1 < 0.1 * min_dt) throw DomainError(fmt::format("T1 = {} is below the sampling resolution", t1));

  FitOutcome out;
  out.model = "exp_decay";
  const double amplitude = best->params[0] * std::exp(k * t0);
  out.parameters = {{"amplitude", amplitude, best->sigma[0] * std::exp(k * t0)},
                    {"T1", t1, best->sigma[1] / (k * k)},
                    {"offset", best->params[2], best->sigma[2]}};
  out.residual_rms = best->residual_rms;
  out.converged = best->converged;
  out.iterations = best->iterations;
  return out;
}

FitOutcome fit_damped_cosine(const TimeTrace& trace, const OscillationSettings& settings) {
  trace.validate();
  const auto n = static_cast<Eigen::Index>(trace.times.size());
  const double span = span_of(trace);
  const auto spectrum = periodogram(trace);
  if (!(spectrum.peak_power > settings.peak_to_median * spectrum.median_power) ||
      spectrum.peak_freq * span < settings.min_periods) {
    throw DomainError("oscillation not detected");
  }

  const auto w = inverse_weights(trace);
  const double t0 = trace.times.front();
  // p = (A, f, phi, gamma, c), phase and envelope referenced to the first sample
  ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = trace.times[i] - t0;
      const double e = std::exp(-p[3] * t);
      const double theta = 2.0 * std::numbers::pi * p[1] * t + p[2];
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      r[i] = w[i] * (p[0] * e * c + p[4] - trace.values[i]);
      if (jac) {
        (*jac)(i, 0) = w[i] * e * c;
        (*jac)(i, 1) = -w[i] * p[0] * e * s * 2.0 * std::numbers::pi * t;
        (*jac)(i, 2) = -w[i] * p[0] * e * s;
        (*jac)(i, 3) = -w[i] * p[0] * e * c * t;
        (*jac)(i, 4) = w[i];
      }
    }
  };

  const double mean = std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / static_cast<double>(n);
  const auto shifted = spectrum.peak_transform *
                       std::polar(1.0, 2.0 * std::numbers::pi * spectrum.peak_freq * t0);
  const double a0 = 2.0 * std::abs(shifted) / static_cast<double>(n);
  std::optional<LmResult> best;
  for (double factor : {0.1, 1.0, 5.0}) {
    Eigen::VectorXd p0(5);
    p0 << a0 * (1.0 + factor * 0.5), spectrum.peak_freq, std::arg(shifted), factor / span, mean;
    auto result = levenberg_marquardt(fn, p0, n);
    if (!best || result.cost < best->cost) best = std::move(result);
  }
  if (!best->converged) throw NumericalError("damped-cosine fit did not converge within 200 iterations");

  Eigen::VectorXd p = best->params;
  if (p[0] < 0) {
    p[0] = -p[0];
    p[2] += std::numbers::pi;
  }
  if (p[1] < 0) {
    p[1] = -p[1];
    p[2] = -p[2];
  }
  if (p[0] < settings.min_amplitude || p[1] * span < settings.min_periods) {
    throw DomainError(fmt::format("oscillation not detected (amplitude {:.3g}, {:.2f} periods)", p[0], p[1] * span));
  }
  // move the reference back to t = 0
  const double phase = wrap_phase(p[2] - 2.0 * std::numbers::pi * p[1] * t0);
  const double amplitude = p[0] * std::exp(p[3] * t0);
  const double decay_time = p[3] > 0.0 ? 1.0 / p[3] : kInf;
  const double decay_sigma = p[3] > 0.0 ? best->sigma[3] / (p[3] * p[3]) : kNaN;

  FitOutcome out;
  out.model = "damped_cosine";
  out.parameters = {{"amplitude", amplitude, best->sigma[0] * std::exp(p[3] * t0)},
                    {"frequency", p[1], best->sigma[1]},
                    {"phase", phase, best->sigma[2]},
                    {"decay_time", decay_time, decay_sigma},
                    {"offset", p[4], best->sigma[4]}};
  out.residual_rms = best->residual_rms;
  out.converged = best->converged;
  out.iterations = best->iterations;
  return out;
}

FitOutcome fit_chevron_hyperbola(const std::vector<double>& detunings_mhz, const std::vector<double>& freqs_mhz) {
  if (detunings_mhz.size() != freqs_mhz.size()) throw ConfigError("hyperbola inputs differ in length");
  if (detunings_mhz.size() < 4) throw ConfigError("hyperbola fit needs at least 4 columns");
  const auto n = static_cast<Eigen::Index>(freqs_mhz.size());
  // p = (g, D0, s): f = sqrt(4 g^2 + s^2 (D - D0)^2)
  ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = detunings_mhz[i] - p[1];
      const double f = std::sqrt(4.0 * p[0] * p[0] + p[2] * p[2] * d * d);
      r[i] = f - freqs_mhz[i];
      if (jac) {
        (*jac)(i, 0) = f > 0 ? 4.0 * p[0] / f : 0.0;
        (*jac)(i, 1) = f > 0 ? -p[2] * p[2] * d / f : 0.0;
        (*jac)(i, 2) = f > 0 ? p[2] * d * d / f : 0.0;
      }
    }
  };
  const auto lowest = std::min_element(freqs_mhz.begin(), freqs_mhz.end()) - freqs_mhz.begin();
  Eigen::VectorXd p0(3);
  p0 << std::max(0.5 * freqs_mhz[lowest], 1e-6), detunings_mhz[lowest], 1.0;
  auto result = levenberg_marquardt(fn, p0, n);
  if (!result.converged) throw NumericalError("hyperbola fit did not converge within 200 iterations");
  FitOutcome out;
  out.model = "chevron_hyperbola";
  out.parameters = {{"g_mhz", std::abs(result.params[0]), result.sigma[0]},
                    {"offset_mhz", result.params[1], result.sigma[1]},
                    {"detuning_scale", std::abs(result.params[2]), result.sigma[2]}};
  out.residual_rms = result.residual_rms;
  out.converged = result.converged;
  out.iterations = result.iterations;
  return out;
}

ChevronEstimate geff_from_chevron(const ChevronMap& chevron, const ChevronFitSettings& settings) {
  const auto rows = chevron.detunings_mhz.size();
  if (rows == 0 || chevron.times_ns.size() < 8) throw ConfigError("chevron too small to fit");
  if (chevron.p1.rows() != static_cast<Eigen::Index>(rows) ||
      chevron.p1.cols() != static_cast<Eigen::Index>(chevron.times_ns.size())) {
    throw ConfigError("chevron population matrix does not match its axes");
  }
  ChevronEstimate out;
  out.floor_mhz = 1e3 / (chevron.times_ns.back() - chevron.times_ns.front());

  std::vector<std::optional<double>> freqs(rows);
  parallel_for(rows, [&](std::size_t row) {
    TimeTrace trace;
    trace.times = chevron.times_ns;
    trace.values.resize(chevron.times_ns.size());
    for (std::size_t k = 0; k < trace.values.size(); ++k) {
      trace.values[k] = chevron.p1(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k));
    }
    try {
      freqs[row] = 1e3 * fit_damped_cosine(trace, settings.oscillation).value("frequency");
    } catch (const DomainError&) {
    } catch (const NumericalError&) {
    }
  });
  for (std::size_t row = 0; row < rows; ++row) {
    if (!freqs[row]) continue;
    out.column_detunings_mhz.push_back(chevron.detunings_mhz[row]);
    out.column_freqs_mhz.push_back(*freqs[row]);
  }

  const auto detected = static_cast<int>(out.column_freqs_mhz.size());
  if (detected == 0) {
    out.below_floor = true;
    out.g_mhz = out.g_sigma_mhz = out.offset_mhz = out.offset_sigma_mhz = out.detuning_scale = kNaN;
    return out;
  }
  if (detected < settings.min_columns) {
    throw DomainError(fmt::format("only {} columns with detected oscillation; at least {} are needed", detected,
                                  settings.min_columns));
  }
  out.hyperbola = fit_chevron_hyperbola(out.column_detunings_mhz, out.column_freqs_mhz);
  out.g_mhz = out.hyperbola->value("g_mhz");
  out.g_sigma_mhz = out.hyperbola->sigma("g_mhz");
  out.offset_mhz = out.hyperbola->value("offset_mhz");
  out.offset_sigma_mhz = out.hyperbola->sigma("offset_mhz");
  out.detuning_scale = out.hyperbola->value("detuning_scale");
  const auto [dmin, dmax] = std::minmax_element(chevron.detunings_mhz.begin(), chevron.detunings_mhz.end());
  if (!(out.offset_mhz > *dmin && out.offset_mhz < *dmax)) {
    throw DomainError(fmt::format("chevron does not cover resonance (fitted vertex at {:.3f} MHz)", out.offset_mhz));
  }
  out.below_floor = out.g_mhz < out.floor_mhz;
  return out;
}

}  // namespace dualres
