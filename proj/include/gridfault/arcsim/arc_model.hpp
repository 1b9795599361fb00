#pragma once

// Kizilcay arc conductance model:
//
//   dg/dt = (1/tau) * ( |i_f| / (u_o + r_o*|i_f|) - g )
//
// integrated with classical RK4 and clamped below at a conductance floor
// that stands for the extinguished arc.

#include <cmath>
#include <concepts>
#include <string>

#include "gridfault/core/error.hpp"

namespace gridfault::arcsim {

inline constexpr double kConductanceFloor = 1e-8;  // siemens

inline constexpr double kTauMin = 0.2e-3, kTauMax = 0.4e-3;
inline constexpr double kUoMin = 300.0, kUoMax = 4000.0;
inline constexpr double kRoMin = 0.01, kRoMax = 0.015;

enum class RangeCheck { Enforce, Override };

class ArcParams {
 public:
  /// Rejects values outside the published sampling ranges unless
  /// `check == RangeCheck::Override`. Positivity is always enforced.
  ArcParams(double tau, double u_o, double r_o, RangeCheck check = RangeCheck::Enforce)
      : tau_(tau), u_o_(u_o), r_o_(r_o) {
    require(tau > 0 && u_o > 0 && r_o > 0 && std::isfinite(tau) && std::isfinite(u_o) &&
                std::isfinite(r_o),
            "arc parameters must be finite and strictly positive");
    if (check == RangeCheck::Enforce) {
      require(tau >= kTauMin && tau <= kTauMax, "tau outside [0.2 ms, 0.4 ms]: " + std::to_string(tau));
      require(u_o >= kUoMin && u_o <= kUoMax, "u_o outside [300 V, 4000 V]: " + std::to_string(u_o));
      require(r_o >= kRoMin && r_o <= kRoMax, "r_o outside [0.01, 0.015] ohm: " + std::to_string(r_o));
    }
  }

  double tau() const { return tau_; }
  double u_o() const { return u_o_; }
  double r_o() const { return r_o_; }

  /// Stationary conductance for a constant current magnitude.
  double steady_conductance(double current) const {
    double a = std::abs(current);
    return a / (u_o_ + r_o_ * a);
  }

 private:
  double tau_;
  double u_o_;
  double r_o_;
};

struct ArcState {
  double g = kConductanceFloor;  // siemens
  double t = 0.0;                // seconds
};

namespace detail {

inline double arc_rhs(double g, double current, const ArcParams& p) {
  return (p.steady_conductance(current) - g) / p.tau();
}

inline void check_step(const ArcState& state, const ArcParams& p, double dt) {
  require(dt > 0 && std::isfinite(dt), "arc_step: dt must be positive");
  if (dt > p.tau() / 10.0)
    fail(ErrorKind::Stability, "arc_step: dt exceeds tau/10 (dt=" + std::to_string(dt) +
                                   ", tau=" + std::to_string(p.tau()) + ")");
  require(state.g >= kConductanceFloor && std::isfinite(state.g),
          "arc_step: conductance below floor", ErrorKind::Integration);
}

}  // namespace detail

/// One RK4 step with the fault current held at `i_f` over the step.
inline ArcState arc_step(const ArcState& state, double i_f, const ArcParams& p, double dt) {
  if (!std::isfinite(i_f)) fail(ErrorKind::Integration, "arc_step: non-finite fault current");
  detail::check_step(state, p, dt);
  const double g = state.g;
  const double k1 = detail::arc_rhs(g, i_f, p);
  const double k2 = detail::arc_rhs(g + 0.5 * dt * k1, i_f, p);
  const double k3 = detail::arc_rhs(g + 0.5 * dt * k2, i_f, p);
  const double k4 = detail::arc_rhs(g + dt * k3, i_f, p);
  double next = g + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (next < kConductanceFloor) next = kConductanceFloor;
  return {next, state.t + dt};
}

/// RK4 step for a time-varying current, sampled at the stage times
/// t, t + dt/2 and t + dt.
template <typename CurrentFn>
  requires std::invocable<CurrentFn&, double>
ArcState arc_step(const ArcState& state, CurrentFn&& current_at, const ArcParams& p, double dt) {
  detail::check_step(state, p, dt);
  const double i0 = current_at(state.t);
  const double ih = current_at(state.t + 0.5 * dt);
  const double i1 = current_at(state.t + dt);
  if (!std::isfinite(i0) || !std::isfinite(ih) || !std::isfinite(i1))
    fail(ErrorKind::Integration, "arc_step: non-finite fault current");
  const double g = state.g;
  const double k1 = detail::arc_rhs(g, i0, p);
  const double k2 = detail::arc_rhs(g + 0.5 * dt * k1, ih, p);
  const double k3 = detail::arc_rhs(g + 0.5 * dt * k2, ih, p);
  const double k4 = detail::arc_rhs(g + dt * k3, i1, p);
  double next = g + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (next < kConductanceFloor) next = kConductanceFloor;
  return {next, state.t + dt};
}

}  // namespace gridfault::arcsim
