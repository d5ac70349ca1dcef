#pragma once

// Lumped-parameter model of a single-coil reluctance actuator: a movable
// core held against its upper stop by a spring and pulled toward z = 0 by
// the magnetic force. Positions are in metres, flux linkage in webers.

#include <array>
#include <cstddef>
#include <string_view>

namespace softland {

inline constexpr std::size_t kNumUncertain = 9;

/// Position below which the gap term of the reluctance is evaluated at
/// kMinGap instead. The gap term tends to 0 as z -> 0, so the clamp only
/// removes the 0 * log(1/0) singularity.
inline constexpr double kMinGap = 1e-9;

struct PhysicalParams {
    double k_s = 55.0;          // spring stiffness [N/m]
    double z_s = 0.015;         // spring resting position [m]
    double m = 1.6e-3;          // moving mass [kg]
    double kappa1 = 1.35;       // saturable core reluctance gain [1/H]
    double lambda_sat = 0.0229; // saturation flux linkage [Wb]
    double kappa3 = 3.88;       // gap reluctance offset [1/H]
    double kappa4 = 7.67e4;     // gap reluctance slope [1/H/m]
    double kappa5 = 1320.0;     // fringing shape [1/m]
    double kappa6 = 9.73e-3;    // fringing length scale [m]
    double R_coil = 50.0;       // coil resistance [Ohm], never perturbed

    /// The nine uncertain parameters in their canonical order
    /// (k_s, z_s, m, kappa1, lambda_sat, kappa3, kappa4, kappa5, kappa6).
    std::array<double, kNumUncertain> uncertain() const noexcept;
    static PhysicalParams from_uncertain(const std::array<double, kNumUncertain>& values,
                                         double R_coil);

    /// Throws std::invalid_argument when a field is non-positive or when
    /// kappa6 does not exceed the upper stroke limit.
    void validate(double z_upper) const;

    bool operator==(const PhysicalParams&) const = default;
};

PhysicalParams nominal_params() noexcept;

/// Name of the i-th uncertain parameter, e.g. "kappa4".
std::string_view uncertain_name(std::size_t i);

struct ActuatorState {
    double z = 0.0;       // position [m]
    double v = 0.0;       // velocity [m/s]
    double lambda = 0.0;  // flux linkage [Wb]
};

struct StateDerivative {
    double dz = 0.0;
    double dv = 0.0;
    double dlambda = 0.0;
};

/// Magnetic circuit function R(z, lambda) including core saturation and
/// gap fringing. Throws SaturationError when |lambda| >= lambda_sat.
double reluctance(double z, double lambda, const PhysicalParams& p);

/// dR/dz. The saturable core term does not depend on z, so neither does
/// this on lambda.
double d_reluctance_dz(double z, const PhysicalParams& p);

double d2_reluctance_dz2(double z, const PhysicalParams& p);

/// -1/2 lambda^2 dR/dz; never positive.
double magnetic_force(double z, double lambda, const PhysicalParams& p);

/// Right-hand side of the electromechanical state equations for coil
/// voltage u.
StateDerivative state_derivative(const ActuatorState& s, double u, const PhysicalParams& p);

}  // namespace softland
