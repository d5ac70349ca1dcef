#pragma once

#include <array>

namespace softland {

struct TrajectorySpec {
    double t0 = 0.0;
    double tf = 3.5e-3;
    double z0 = 1e-3;
    double zf = 0.0;

    /// Throws std::invalid_argument unless tf > t0 and z0 != zf.
    void validate() const;
    double duration() const noexcept { return tf - t0; }
};

/// Desired position and its first three time derivatives.
struct TrajectoryPoint {
    double z = 0.0;
    double dz = 0.0;
    double ddz = 0.0;
    double dddz = 0.0;
};

/// Quintic rest-to-rest motion from z0 to zf with zero velocity and
/// acceleration at both ends. Stored as coefficients in normalized time
/// s = (t - t0) / (tf - t0).
class Trajectory {
public:
    explicit Trajectory(const TrajectorySpec& spec);

    const TrajectorySpec& spec() const noexcept { return spec_; }
    const std::array<double, 6>& coefficients() const noexcept { return coeff_; }

    /// Throws std::out_of_range for t outside [t0, tf].
    TrajectoryPoint eval(double t) const;

private:
    TrajectorySpec spec_;
    std::array<double, 6> coeff_{};
};

inline Trajectory make_quintic(const TrajectorySpec& spec) { return Trajectory(spec); }

}  // namespace softland
