#pragma once

// Per-phase equivalent circuit: a Thevenin source (series R-L for source
// plus line) feeding a resistive load, with the arc branch connected from
// the faulted phase (A) to ground at the load node. Phases B and C carry
// their nominal steady state plus a neutral-shift term on the voltages.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "gridfault/arcsim/arc_model.hpp"
#include "gridfault/arcsim/waveform.hpp"
#include "gridfault/core/hash.hpp"
#include "gridfault/core/text.hpp"

namespace gridfault::arcsim {

struct CircuitParams {
  double source_peak_voltage = 10e3 * std::numbers::sqrt2 / std::numbers::sqrt3;
  double system_frequency = 50.0;
  double nominal_frequency = 50.0;  // recorder's notion of a cycle
  double source_resistance = 0.5;
  double source_inductance = 5e-3;
  double line_resistance = 1.0;
  double line_inductance = 5e-3;
  double load_resistance = 100.0;

  double series_resistance() const { return source_resistance + line_resistance; }
  double series_inductance() const { return source_inductance + line_inductance; }
  double omega() const { return 2.0 * std::numbers::pi * system_frequency; }

  /// |Z| of the Thevenin branch at the system frequency.
  double thevenin_impedance() const {
    return std::hypot(series_resistance(), omega() * series_inductance());
  }

  /// Peak of the pre-fault phase current.
  double nominal_current_peak() const {
    return source_peak_voltage /
           std::hypot(series_resistance() + load_resistance, omega() * series_inductance());
  }
};

inline void validate(const CircuitParams& c) {
  for (double v : {c.source_peak_voltage, c.system_frequency, c.nominal_frequency,
                   c.source_resistance, c.source_inductance, c.line_resistance,
                   c.line_inductance, c.load_resistance})
    require(v > 0 && std::isfinite(v), "circuit parameters must be finite and positive");
}

/// Damped cosine burst used for transient disturbances.
struct TransientParams {
  double frequency = 600.0;      // Hz, drawn from [300, 900]
  double decay = 5e-3;           // s, drawn from [3, 10] ms
  double relative_amplitude = 0.4;  // fraction of source peak voltage
};

inline constexpr double kNeutralShiftCoupling = 0.05;
inline constexpr double kSurgeAdmittance = 0.1;  // siemens, burst current per burst volt
inline constexpr double kInceptionConductance = 1.0;
inline constexpr int kPreFaultCycles = 4;
inline constexpr int kSubsteps = 32;

struct EventSpec {
  Category category = Category::SIF;
  double fault_start_angle = 0.0;      // degrees on the phase-A source voltage
  double fault_duration_cycles = 0.5;  // ignored for PF and TD
  std::optional<ArcParams> arc;        // absent for TD
  TransientParams transient;           // used for TD only
  double noise_snr_db = std::numeric_limits<double>::infinity();
  Domain domain = Domain::Source;
  double fs = 4000.0;
  std::array<double, kNumChannels> channel_gain = {1, 1, 1, 1, 1, 1};
};

inline void validate(const EventSpec& s) {
  require(s.fault_start_angle >= 0 && s.fault_start_angle < 360, "fault_start_angle must be in [0, 360)");
  require(s.fs > 0 && std::isfinite(s.fs), "sampling frequency must be positive");
  require(!std::isnan(s.noise_snr_db), "noise_snr_db is NaN");
  switch (s.category) {
    case Category::SIF:
      require(s.fault_duration_cycles > 0 && s.fault_duration_cycles <= 1,
              "SIF duration must be in (0, 1] cycles");
      break;
    case Category::MIF:
      require(s.fault_duration_cycles > 1 && s.fault_duration_cycles <= 4,
              "MIF duration must be in (1, 4] cycles");
      break;
    case Category::PF:
      break;
    case Category::TD:
      require(!s.arc.has_value(), "TD events have no arc branch");
      require(s.transient.frequency > 0 && s.transient.decay > 0 && s.transient.relative_amplitude >= 0,
              "invalid transient parameters");
      break;
  }
  if (s.category != Category::TD) require(s.arc.has_value(), "fault events need arc parameters");
  for (double g : s.channel_gain) require(g > 0 && std::isfinite(g), "channel gains must be positive");
}

/// Simulates one event. The returned record carries the label, the domain
/// tag and a provenance echo of the spec in `meta`.
inline WaveformRecord simulate_event(const EventSpec& spec, const CircuitParams& circuit,
                                     std::uint64_t seed) {
  validate(spec);
  validate(circuit);

  const std::size_t n = record_length(spec.fs, circuit.nominal_frequency);
  const double h = 1.0 / (kSubsteps * spec.fs);
  const double w = circuit.omega();
  const double E = circuit.source_peak_voltage;
  const double R = circuit.series_resistance();
  const double L = circuit.series_inductance();
  const double g_load = 1.0 / circuit.load_resistance;

  const double phase_lag = std::atan2(w * L, R + circuit.load_resistance);
  const double i_nom = circuit.nominal_current_peak();
  const double t_inception =
      (kPreFaultCycles + spec.fault_start_angle / 360.0) / circuit.system_frequency;
  const double t_scheduled_end =
      t_inception + spec.fault_duration_cycles / circuit.system_frequency;
  const double z_th = circuit.thevenin_impedance();
  constexpr double kPhaseShift = 2.0 * std::numbers::pi / 3.0;

  auto source = [&](double t) { return E * std::sin(w * t); };

  std::array<std::vector<double>, kNumChannels> ch;
  for (auto& c : ch) c.assign(n, 0.0);

  const bool has_arc = spec.category != Category::TD;
  const bool permanent = spec.category == Category::PF;

  double i = i_nom * std::sin(-phase_lag);
  double i_fault_prev = 0.0;
  bool arc_on = false;
  bool arc_done = false;
  ArcState arc_state;

  auto record_sample = [&](std::size_t k, double t, double i_a, double u_a, double i_fault) {
    const double v_shift = kNeutralShiftCoupling * z_th * i_fault;
    double burst = 0.0;
    if (spec.category == Category::TD && t >= t_inception) {
      const double dt = t - t_inception;
      burst = spec.transient.relative_amplitude * E * std::exp(-dt / spec.transient.decay) *
              std::cos(2.0 * std::numbers::pi * spec.transient.frequency * dt);
    }
    const double i_b = i_nom * std::sin(w * t - phase_lag - kPhaseShift);
    const double i_c = i_nom * std::sin(w * t - phase_lag + kPhaseShift);
    ch[0][k] = i_a + kSurgeAdmittance * burst;
    ch[1][k] = i_b - 0.5 * kSurgeAdmittance * burst;
    ch[2][k] = i_c - 0.5 * kSurgeAdmittance * burst;
    ch[3][k] = u_a + burst;
    ch[4][k] = circuit.load_resistance * i_b + v_shift - 0.5 * burst;
    ch[5][k] = circuit.load_resistance * i_c + v_shift - 0.5 * burst;
  };

  record_sample(0, 0.0, i, i / g_load, 0.0);
  const std::size_t total_steps = (n - 1) * kSubsteps;
  for (std::size_t step = 0; step < total_steps; ++step) {
    const double t0 = static_cast<double>(step) * h;
    const double t1 = t0 + h;

    if (has_arc && !arc_on && !arc_done && t0 >= t_inception) {
      arc_on = true;
      arc_state = ArcState{kInceptionConductance, t0};
    }
    const double g = arc_on ? arc_state.g : 0.0;
    const double z_par = 1.0 / (g_load + g);

    // Trapezoidal rule on L di/dt = e - R i - z_par i with z_par frozen over the step.
    const double a = L / h + 0.5 * (R + z_par);
    const double b = L / h - 0.5 * (R + z_par);
    i = (b * i + 0.5 * (source(t0) + source(t1))) / a;
    if (!std::isfinite(i)) fail(ErrorKind::Convergence, "circuit solve produced a non-finite current");
    const double u = i * z_par;
    double i_fault = 0.0;

    if (arc_on) {
      i_fault = g * u;
      const bool crossed = (i_fault_prev < 0.0) != (i_fault < 0.0) || i_fault == 0.0;
      if (!permanent && t1 >= t_scheduled_end && crossed) {
        arc_on = false;
        arc_done = true;
      } else {
        arc_state = arc_step(arc_state, i_fault, *spec.arc, h);
      }
    }
    i_fault_prev = i_fault;

    if ((step + 1) % kSubsteps == 0) record_sample((step + 1) / kSubsteps, t1, i, u, i_fault);
  }

  std::mt19937_64 rng(seed);
  if (std::isfinite(spec.noise_snr_db)) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& c : ch) {
      double power = 0.0;
      for (double x : c) power += x * x;
      const double sigma = std::sqrt(power / static_cast<double>(n)) / std::pow(10.0, spec.noise_snr_db / 20.0);
      for (double& x : c) x += sigma * gauss(rng);
    }
  }
  for (int c = 0; c < kNumChannels; ++c)
    for (double& x : ch[c]) x *= spec.channel_gain[c];

  WaveformRecord rec;
  rec.id = "event-" + Fnv1a::to_hex(seed);
  rec.fs = spec.fs;
  rec.nominal_frequency = circuit.nominal_frequency;
  rec.channels = std::move(ch);
  rec.label = spec.category;
  rec.domain = spec.domain;
  using text::format_double;
  rec.meta = {
      {"seed", std::to_string(seed)},
      {"category", std::string(to_string(spec.category))},
      {"fault_start_angle", format_double(spec.fault_start_angle)},
      {"noise_snr_db", std::isfinite(spec.noise_snr_db) ? format_double(spec.noise_snr_db) : "inf"},
      {"system_frequency", format_double(circuit.system_frequency)},
      {"thevenin_impedance", format_double(z_th)},
      {"load_resistance", format_double(circuit.load_resistance)},
  };
  if (spec.category == Category::SIF || spec.category == Category::MIF)
    rec.meta.emplace_back("fault_duration_cycles", format_double(spec.fault_duration_cycles));
  if (spec.arc) {
    rec.meta.emplace_back("tau", format_double(spec.arc->tau()));
    rec.meta.emplace_back("u_o", format_double(spec.arc->u_o()));
    rec.meta.emplace_back("r_o", format_double(spec.arc->r_o()));
  } else {
    rec.meta.emplace_back("transient_frequency", format_double(spec.transient.frequency));
    rec.meta.emplace_back("transient_decay", format_double(spec.transient.decay));
    rec.meta.emplace_back("transient_amplitude", format_double(spec.transient.relative_amplitude));
  }
  return rec;
}

}  // namespace gridfault::arcsim
