#pragma once

// Flatness-based feedforward. With the core position as flat output, the
// flux linkage and its rate follow algebraically from the desired motion,
// and the coil voltage from the electrical equation. Controller parameters
// are dimensionless multipliers on the nominal physical parameters.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "softland/model.hpp"
#include "softland/trajectory.hpp"

namespace softland {

struct ThetaBox {
    double lo = 0.7;
    double hi = 1.3;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// Dimensionless multipliers theta, one per uncertain parameter, in the
/// order of PhysicalParams::uncertain(). theta = 1 reproduces the nominal
/// model.
struct ControlParams {
    std::array<double, kNumUncertain> theta{};

    static ControlParams ones() noexcept;

    double& operator[](std::size_t i) { return theta[i]; }
    double operator[](std::size_t i) const { return theta[i]; }
    bool operator==(const ControlParams&) const = default;
};

/// Element-wise product of the nominal uncertain parameters with theta.
/// The coil resistance is carried over unscaled.
PhysicalParams effective_params(const PhysicalParams& p_nom, const ControlParams& theta);

/// Flux linkage that holds the force balance for position z and
/// acceleration z_ddot. Throws InfeasibleFlatnessError on a negative
/// radicand or when the result is at or above saturation.
double flat_flux(double z, double z_ddot, const PhysicalParams& p);

/// Time derivative of flat_flux along a motion (z, z_dot, z_ddot, z_dddot).
/// Throws InfeasibleFlatnessError when the flux is zero.
double flat_flux_rate(double z, double z_dot, double z_ddot, double z_dddot,
                      const PhysicalParams& p);

/// Coil voltage reproducing the trajectory point under parameters p.
double flat_voltage(const TrajectoryPoint& pt, const PhysicalParams& p);

/// u_ff(t, theta) on [t0, tf].
double feedforward_voltage(double t, const ControlParams& theta, const Trajectory& traj,
                           const PhysicalParams& p_nom);

/// Flux the controller expects at t0; used to pre-charge the coil.
double initial_flux(const ControlParams& theta, const Trajectory& traj,
                    const PhysicalParams& p_nom);

/// Feedforward voltage sampled on a uniform grid over [t0, tf]. Between
/// samples the voltage is interpolated linearly; after the last sample it
/// stays at hold_value.
struct FeedforwardSignal {
    std::vector<double> times;
    std::vector<double> values;
    double hold_value = 0.0;
    double initial_flux = 0.0;

    double voltage_at(double t) const noexcept;
};

/// Marker for a parameter vector whose feedforward is infeasible somewhere
/// on the grid. No partial signal is kept.
struct InvalidCandidate {
    double time = 0.0;
    std::string reason;
};

using FeedforwardOutcome = std::variant<FeedforwardSignal, InvalidCandidate>;

inline constexpr std::size_t kDefaultSamples = 701;

/// Throws std::invalid_argument if n_samples < 2.
FeedforwardOutcome sample_feedforward(const ControlParams& theta, const Trajectory& traj,
                                      const PhysicalParams& p_nom,
                                      std::size_t n_samples = kDefaultSamples);

/// Two-column CSV: time_s,voltage_V.
void write_signal_csv(std::ostream& os, const FeedforwardSignal& signal);

}  // namespace softland
