#include "dualres/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "dualres/device_io.hpp"
#include "dualres/dynamics.hpp"
#include "dualres/errors.hpp"
#include "dualres/fitting.hpp"
#include "dualres/spectroscopy.hpp"
#include "dualres/svg.hpp"
#include "dualres/table_io.hpp"

namespace dualres {
namespace {

using nlohmann::json;

struct Common {
  std::string device_path;
  std::string out_dir = "out";
  std::string dims = "3";
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct SpectrumOptions {
  std::string axis = "flux_1";
  std::optional<double> from, to;
  int points = 301;
  std::optional<double> other_ghz;
  int levels = 8;
};

struct GeffOptions {
  double from = 4.48;
  double to = 4.79;
  int points = 311;
  std::optional<double> switch_lo, switch_hi;
  int ed_points = 25;
  bool spectral = false;
};

struct GapscanOptions {
  std::vector<double> setpoints{4.58, 4.59, 4.60, 4.61, 4.62, 4.63};
  double half_window = 0.02;
  int count = 201;
};

struct ChevronOptions {
  double bias_1 = 4.637;
  double bias_2 = 4.691;
  double target = 4.58;
  double detuning_span = 20.0;
  int detuning_points = 41;
  double tau_min = 0.0;
  double tau_max = 2000.0;
  int tau_points = 201;
  std::optional<double> readout_interval;
  bool no_dissipation = false;
  double max_step = 0.25;
  std::optional<double> contrast_scale;
  double contrast_baseline = 0.0;
};

struct FitOptions {
  std::string trace;
  std::string model = "damped_cosine";
  double min_periods = 2.0;
  double min_amplitude = 0.0;
};

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::string_view rest(text);
  for (;;) {
    const auto comma = rest.find(',');
    const auto field = rest.substr(0, comma);
    int d = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), d);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ConfigError(fmt::format("--dims: '{}' is not an integer", field));
    }
    dims.push_back(d);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (dims.size() == 1) dims.assign(4, dims.front());
  if (dims.size() != 4) throw ConfigError("--dims takes one value or four (a, b, q1, q2)");
  for (int d : dims) {
    if (d < 2) throw ConfigError("--dims values must be at least 2");
  }
  return dims;
}

struct Context {
  DeviceParams params;
  HilbertSpace space;
  OutputDirectory out;
  json config;
};

Context make_context(const Common& common, const std::string& command) {
  DeviceParams params = common.device_path.empty() ? DeviceParams{} : load_device(common.device_path);
  params.validate();
  const auto dims = parse_dims(common.dims);
  HilbertSpace space(dims);
  json config = {{"command", command},
                 {"device", device_to_json(params)},
                 {"device_file", common.device_path.empty() ? json(nullptr) : json(common.device_path)},
                 {"dims", dims},
                 {"seed", common.seed}};
  return Context{params, std::move(space), OutputDirectory(common.out_dir), std::move(config)};
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string to_text(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

int cmd_spectrum(const Common& common, const SpectrumOptions& o, std::ostream& out) {
  auto ctx = make_context(common, "spectrum");
  const SweepAxis axis = parse_sweep_axis(o.axis);
  const bool flux = axis == SweepAxis::Flux1 || axis == SweepAxis::Flux2;
  const bool first = axis == SweepAxis::Flux1 || axis == SweepAxis::Freq1;
  const double lo = o.from.value_or(flux ? 0.0 : 4.2);
  const double hi = o.to.value_or(flux ? 0.3 : 4.9);
  const auto values = linspace(lo, hi, o.points);
  OperatingPoint fixed{4.637, 4.691};  // bias point of the time-domain experiments
  if (o.other_ghz) (first ? fixed.qubit_freq_2 : fixed.qubit_freq_1) = *o.other_ghz;

  const auto sweep = sweep_spectrum(ctx.params, axis, values, fixed, ctx.space, {o.levels, common.threads});
  const auto gaps = qubit_resonator_gaps(ctx.params, axis, values, fixed, ctx.space);

  ctx.out.write("spectrum.csv", to_text([&](std::ostream& s) { write_spectrum_csv(sweep, s); }));
  std::string table = fmt::format("qubit,resonator,gap_mhz,location_{},coupling_mhz\n", flux ? "ctrl" : "ghz");
  for (const auto& g : gaps) {
    const bool q1 = g.qubit_mode == kQubit1;
    const bool ra = g.resonator_mode == kResonatorA;
    const double coupling = q1 ? (ra ? ctx.params.g_a1 : ctx.params.g_b1) : (ra ? ctx.params.g_a2 : ctx.params.g_b2);
    table += fmt::format("{},{},{},{},{}\n", q1 ? "q1" : "q2", ra ? "a" : "b", format_number(g.gap.gap_mhz),
                         format_number(g.gap.location), format_number(1e3 * coupling));
    out << fmt::format("{}-{} anti-crossing: {:.3f} MHz at {:.6f}\n", q1 ? "q1" : "q2", ra ? "a" : "b",
                       g.gap.gap_mhz, g.gap.location);
  }
  ctx.out.write("gaps.csv", table);

  svg::LinePlot plot;
  plot.title = "Dressed spectrum";
  plot.x_label = flux ? std::string(to_string(axis)) + " (control units)" : std::string(to_string(axis)) + " (GHz)";
  plot.y_label = "transition frequency (GHz)";
  const std::size_t levels = sweep.levels.empty() ? 0 : sweep.levels.front().size();
  for (std::size_t k = 1; k < levels; ++k) {
    svg::Series s;
    s.x = sweep.sweep_values;
    for (const auto& row : sweep.levels) s.y.push_back(row[k]);
    plot.series.push_back(std::move(s));
  }
  ctx.out.write("spectrum.svg", svg::render(plot));

  ctx.config["spectrum"] = {{"axis", to_string(axis)},   {"from", lo},
                            {"to", hi},                  {"points", o.points},
                            {"fixed_qubit_1_ghz", fixed.qubit_freq_1}, {"fixed_qubit_2_ghz", fixed.qubit_freq_2},
                            {"levels", o.levels}};
  ctx.out.write_manifest(ctx.config);
  return 0;
}

int cmd_geff(const Common& common, const GeffOptions& o, std::ostream& out) {
  auto ctx = make_context(common, "geff");
  const auto& p = ctx.params;
  const double lo = o.switch_lo.value_or(p.resonator_freq_a + 0.02);
  const double hi = o.switch_hi.value_or(p.resonator_freq_b - 0.02);
  const double root = find_switch_off(p, {lo, hi});
  out << fmt::format("g_eff switch-off: {:.6f} GHz\n", root);

  std::string table = "freq_ghz,g_eff_mhz\n";
  svg::Series curve{"dispersive g_eff", {}, {}, false};
  for (double w : linspace(o.from, o.to, o.points)) {
    double g = std::numeric_limits<double>::quiet_NaN();
    try {
      g = 1e3 * effective_coupling(p, {w, w});
    } catch (const DomainError&) {
    }
    table += format_number(w) + ',' + format_number(g) + '\n';
    // clip the poles so the plot stays readable
    curve.x.push_back(w);
    curve.y.push_back(std::abs(g) < 20.0 ? g : std::numeric_limits<double>::quiet_NaN());
  }
  ctx.out.write("geff.csv", table);

  svg::LinePlot plot;
  plot.title = "Effective qubit-qubit coupling";
  plot.x_label = "co-tuned qubit frequency (GHz)";
  plot.y_label = "g_eff (MHz)";
  plot.zero_line = true;
  plot.vertical_markers = {root};
  plot.series.push_back(std::move(curve));

  json summary = {{"switch_off_ghz", root}, {"search_interval_ghz", {lo, hi}}};
  const double band = 3.0 * p.max_qubit_resonator_coupling() + 0.02;
  const double ed_lo = std::max(lo, p.resonator_freq_a + band);
  const double ed_hi = std::min(hi, p.resonator_freq_b - band);
  if (o.ed_points > 0 && ed_lo < ed_hi) {
    // overlay only where the gap sweep window stays clear of the resonators
    const auto setpoints = linspace(ed_lo, ed_hi, o.ed_points);
    const auto gaps = gap_vs_setpoint(p, setpoints, ctx.space, {0.02, 201, common.threads});
    std::string ed = "setpoint_ghz,half_gap_mhz,g_eff_mhz,error\n";
    svg::Series overlay{"half ED gap (signed)", {}, {}, true};
    for (const auto& g : gaps) {
      const double half = g.gap ? 0.5 * g.gap->gap_mhz : std::numeric_limits<double>::quiet_NaN();
      ed += fmt::format("{},{},{},{}\n", format_number(g.setpoint), format_number(half),
                        format_number(g.effective_coupling_mhz), g.error);
      overlay.x.push_back(g.setpoint);
      overlay.y.push_back(g.setpoint < root ? half : -half);
    }
    ctx.out.write("geff_ed.csv", ed);
    plot.series.push_back(std::move(overlay));
  }
  if (o.spectral) {
    const auto s = spectral_switch_off(p, {lo, hi}, ctx.space);
    summary["spectral_switch_off_ghz"] = s.frequency;
    summary["spectral_switch_off_gap_mhz"] = s.gap_mhz;
    out << fmt::format("spectral switch-off: {:.6f} GHz (gap {:.4f} MHz)\n", s.frequency, s.gap_mhz);
  }
  ctx.out.write("geff.svg", svg::render(plot));
  ctx.out.write("switch_off.json", summary.dump(2) + '\n');
  ctx.config["geff"] = {{"from", o.from},           {"to", o.to},
                        {"points", o.points},       {"search_interval_ghz", {lo, hi}},
                        {"ed_points", o.ed_points}, {"spectral", o.spectral}};
  ctx.out.write_manifest(ctx.config);
  return 0;
}

int cmd_gapscan(const Common& common, const GapscanOptions& o, std::ostream& out) {
  auto ctx = make_context(common, "gapscan");
  const auto gaps = gap_vs_setpoint(ctx.params, o.setpoints, ctx.space, {o.half_window, o.count, common.threads});
  std::string table = "setpoint_ghz,gap_mhz,half_gap_mhz,location_ghz,g_eff_mhz,error\n";
  svg::Series measured{"half ED gap", {}, {}, true};
  svg::Series formula{"|g_eff| dispersive", {}, {}, true};
  for (const auto& g : gaps) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double gap = g.gap ? g.gap->gap_mhz : nan;
    const double location = g.gap ? g.gap->location : nan;
    table += fmt::format("{},{},{},{},{},{}\n", format_number(g.setpoint), format_number(gap),
                         format_number(0.5 * gap), format_number(location), format_number(g.effective_coupling_mhz),
                         g.error);
    out << fmt::format("setpoint {:.4f} GHz: gap {:.4f} MHz{}\n", g.setpoint, gap,
                       g.error.empty() ? "" : " (" + g.error + ")");
    measured.x.push_back(g.setpoint);
    measured.y.push_back(0.5 * gap);
    formula.x.push_back(g.setpoint);
    formula.y.push_back(std::abs(g.effective_coupling_mhz));
  }
  ctx.out.write("gapscan.csv", table);
  svg::LinePlot plot;
  plot.title = "Qubit-qubit anti-crossing vs setpoint";
  plot.x_label = "qubit-2 setpoint (GHz)";
  plot.y_label = "coupling (MHz)";
  plot.zero_line = true;
  plot.series = {measured, formula};
  ctx.out.write("gapscan.svg", svg::render(plot));
  ctx.config["gapscan"] = {{"setpoints_ghz", o.setpoints}, {"half_window_ghz", o.half_window}, {"count", o.count}};
  ctx.out.write_manifest(ctx.config);
  return 0;
}

int cmd_chevron(const Common& common, const ChevronOptions& o, std::ostream& out) {
  auto ctx = make_context(common, "chevron");
  if (o.detuning_points < 1) throw ConfigError("--detuning-points must be positive");
  if (o.tau_points < 2) throw ConfigError(fmt::format("tau grid needs at least 2 samples, got {}", o.tau_points));
  const auto offsets = linspace(-o.detuning_span, o.detuning_span, o.detuning_points);
  const auto taus = linspace(o.tau_min, o.tau_max, o.tau_points);
  ChevronSettings settings;
  settings.integrator.max_step_ns = o.max_step;
  settings.dissipation.enabled = !o.no_dissipation;
  settings.readout_interval_ns = o.readout_interval;
  settings.threads = common.threads;
  const OperatingPoint bias{o.bias_1, o.bias_2};
  const auto map = vacuum_rabi_chevron(ctx.params, bias, o.target, offsets, taus, ctx.space, settings);

  std::optional<ContrastSpec> contrast;
  if (o.contrast_scale) contrast = ContrastSpec{*o.contrast_scale, o.contrast_baseline};
  ctx.out.write("chevron.csv", to_text([&](std::ostream& s) { write_chevron_csv(map, s, contrast); }));
  svg::Heatmap heat;
  heat.title = fmt::format("Vacuum-Rabi chevron, qubit 2 at {} GHz", o.target);
  heat.x_label = "interaction time (ns)";
  heat.y_label = "qubit-1 detuning (MHz)";
  heat.x = map.times_ns;
  heat.y = map.detunings_mhz;
  heat.z = map.p1;
  ctx.out.write("chevron.svg", svg::render(heat));

  const json integrator = {{"max_step_ns", o.max_step},
                           {"dissipation", !o.no_dissipation},
                           {"method", "strang splitting: exact unitary, RK4 dissipator"},
                           {"readout_interval_ns", optional_json(o.readout_interval)}};
  const json sidecar = {{"device", ctx.config["device"]},
                        {"dims", ctx.config["dims"]},
                        {"bias_ghz", {o.bias_1, o.bias_2}},
                        {"qubit_2_target_ghz", o.target},
                        {"detunings_mhz", offsets},
                        {"tau_ns", {{"min", o.tau_min}, {"max", o.tau_max}, {"points", o.tau_points}}},
                        {"integrator", integrator}};
  ctx.out.write("chevron.json", sidecar.dump(2) + '\n');

  int code = 0;
  json estimate;
  double eq2 = std::numeric_limits<double>::quiet_NaN();
  try {
    eq2 = 1e3 * effective_coupling(ctx.params, {o.target, o.target});
  } catch (const DomainError&) {
  }
  try {
    const auto e = geff_from_chevron(map);
    estimate = {{"verdict", e.below_floor ? "below sensitivity floor" : "oscillation detected"},
                {"below_floor", e.below_floor},
                {"g_eff_mhz", number_or_null(e.g_mhz)},
                {"g_eff_sigma_mhz", number_or_null(e.g_sigma_mhz)},
                {"resonance_offset_mhz", number_or_null(e.offset_mhz)},
                {"resonance_offset_sigma_mhz", number_or_null(e.offset_sigma_mhz)},
                {"detuning_scale", number_or_null(e.detuning_scale)},
                {"floor_mhz", e.floor_mhz},
                {"columns_detected", e.column_freqs_mhz.size()},
                {"dispersive_g_eff_mhz", number_or_null(eq2)}};
    if (e.below_floor) {
      out << fmt::format("below sensitivity floor ({:.3f} MHz)\n", e.floor_mhz);
    } else {
      out << fmt::format("time-domain g_eff: {:.4f} +/- {:.4f} MHz (dispersive {:.4f} MHz)\n", e.g_mhz, e.g_sigma_mhz,
                         eq2);
    }
  } catch (const DomainError& e) {
    estimate = {{"verdict", "undetermined"}, {"error", e.what()}, {"dispersive_g_eff_mhz", number_or_null(eq2)}};
    code = 3;
  }
  ctx.out.write("geff_time_domain.json", estimate.dump(2) + '\n');
  ctx.config["chevron"] = {{"bias_ghz", {o.bias_1, o.bias_2}},
                           {"qubit_2_target_ghz", o.target},
                           {"detuning_span_mhz", o.detuning_span},
                           {"detuning_points", o.detuning_points},
                           {"tau_min_ns", o.tau_min},
                           {"tau_max_ns", o.tau_max},
                           {"tau_points", o.tau_points},
                           {"integrator", integrator},
                           {"contrast_scale", optional_json(o.contrast_scale)},
                           {"contrast_baseline", o.contrast_baseline}};
  ctx.out.write_manifest(ctx.config);
  if (code != 0) throw DomainError(estimate["error"].get<std::string>());
  return code;
}

int cmd_fit(const Common& common, const FitOptions& o, std::ostream& out) {
  std::ifstream in(o.trace);
  if (!in) throw ConfigError(fmt::format("cannot open trace file {}", o.trace));
  const auto trace = read_trace_csv(in);
  FitOutcome fit;
  if (o.model == "exp_decay") {
    fit = fit_exp_decay(trace);
  } else if (o.model == "damped_cosine") {
    fit = fit_damped_cosine(trace, {20.0, o.min_periods, o.min_amplitude});
  } else {
    throw ConfigError(fmt::format("unknown fit model '{}'", o.model));
  }
  OutputDirectory dir(common.out_dir);
  json report = fit_to_json(fit);
  report["time_unit"] = "ns";
  dir.write("fit.json", report.dump(2) + '\n');
  for (const auto& p : fit.parameters) out << fmt::format("{} = {:.6g} +/- {:.3g}\n", p.name, p.value, p.sigma);
  const json config = {{"command", "fit"},
                       {"trace", o.trace},
                       {"trace_sha256", sha256_hex(to_text([&](std::ostream& s) {
                          std::ifstream again(o.trace, std::ios::binary);
                          s << again.rdbuf();
                        }))},
                       {"model", o.model},
                       {"min_periods", o.min_periods},
                       {"min_amplitude", o.min_amplitude},
                       {"seed", common.seed}};
  dir.write_manifest(config);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and analysis toolkit for a two-qubit, double-resonator tunable coupler"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--device", common.device_path, "device JSON file (defaults to the built-in device)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--dims", common.dims, "Fock truncation: one value or a,b,q1,q2");
  app.add_option("--seed", common.seed, "random seed recorded with every run");
  app.add_option("--threads", common.threads, "worker threads (0 = all cores)");

  SpectrumOptions so;
  auto* spectrum = app.add_subcommand("spectrum", "dressed spectrum along a flux or frequency axis");
  spectrum->add_option("--axis", so.axis, "flux_1, flux_2, freq_1 or freq_2");
  spectrum->add_option("--from", so.from);
  spectrum->add_option("--to", so.to);
  spectrum->add_option("--points", so.points);
  spectrum->add_option("--other", so.other_ghz, "frequency of the qubit that is not swept (GHz)");
  spectrum->add_option("--levels", so.levels, "levels kept per point (0 = all)");

  GeffOptions go;
  auto* geff = app.add_subcommand("geff", "dispersive effective coupling and its switch-off");
  geff->add_option("--from", go.from);
  geff->add_option("--to", go.to);
  geff->add_option("--points", go.points);
  geff->add_option("--search-lo", go.switch_lo);
  geff->add_option("--search-hi", go.switch_hi);
  geff->add_option("--ed-points", go.ed_points, "setpoints for the diagonalisation overlay");
  geff->add_flag("--spectral", go.spectral, "also locate the switch-off from spectra");

  GapscanOptions gso;
  auto* gapscan = app.add_subcommand("gapscan", "qubit-qubit gap at fixed qubit-2 setpoints");
  gapscan->add_option("--setpoints", gso.setpoints)->delimiter(',');
  gapscan->add_option("--half-window", gso.half_window, "qubit-1 sweep half width (GHz)");
  gapscan->add_option("--count", gso.count);

  ChevronOptions co;
  auto* chevron = app.add_subcommand("chevron", "vacuum-Rabi chevron and time-domain g_eff");
  chevron->add_option("--bias-1", co.bias_1);
  chevron->add_option("--bias-2", co.bias_2);
  chevron->add_option("--target", co.target, "qubit-2 frequency during the interaction (GHz)");
  chevron->add_option("--detuning-span", co.detuning_span, "qubit-1 offset half range (MHz)");
  chevron->add_option("--detuning-points", co.detuning_points);
  chevron->add_option("--tau-min", co.tau_min);
  chevron->add_option("--tau-max", co.tau_max);
  chevron->add_option("--tau-points", co.tau_points);
  chevron->add_option("--readout-interval", co.readout_interval, "fixed prep-to-readout time (ns)");
  chevron->add_flag("--no-dissipation", co.no_dissipation);
  chevron->add_option("--max-step", co.max_step, "integrator step (ns)");
  chevron->add_option("--contrast-scale", co.contrast_scale);
  chevron->add_option("--contrast-baseline", co.contrast_baseline);

  FitOptions fo;
  auto* fit = app.add_subcommand("fit", "fit a time trace");
  fit->add_option("trace", fo.trace, "CSV with time_ns,value[,sigma]")->required();
  fit->add_option("--model", fo.model)->check(CLI::IsMember({"exp_decay", "damped_cosine"}));
  fit->add_option("--min-periods", fo.min_periods);
  fit->add_option("--min-amplitude", fo.min_amplitude);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    for (const auto& w : (common.device_path.empty() ? DeviceParams{} : load_device(common.device_path)).warnings()) {
      err << "warning: " << w << '\n';
    }
    if (*spectrum) return cmd_spectrum(common, so, out);
    if (*geff) return cmd_geff(common, go, out);
    if (*gapscan) return cmd_gapscan(common, gso, out);
    if (*chevron) return cmd_chevron(common, co, out);
    if (*fit) return cmd_fit(common, fo, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"dualres"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dualres
