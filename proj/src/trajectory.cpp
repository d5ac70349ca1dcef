#include "softland/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace softland {

void TrajectorySpec::validate() const {
    if (!(tf > t0)) {
        throw std::invalid_argument("trajectory requires tf > t0");
    }
    if (z0 == zf) {
        throw std::invalid_argument("trajectory requires z0 != zf");
    }
}

Trajectory::Trajectory(const TrajectorySpec& spec) : spec_(spec) {
    spec_.validate();
    const double d = spec_.zf - spec_.z0;
    coeff_ = {spec_.z0, 0.0, 0.0, 10.0 * d, -15.0 * d, 6.0 * d};
}

TrajectoryPoint Trajectory::eval(double t) const {
    if (t < spec_.t0 || t > spec_.tf || std::isnan(t)) {
        std::ostringstream os;
        os.precision(17);
        os << "time " << t << " s outside trajectory domain [" << spec_.t0 << ", " << spec_.tf
           << "]";
        throw std::out_of_range(os.str());
    }
    const double T = spec_.duration();
    const double s = (t - spec_.t0) / T;
    const auto& c = coeff_;

    // Horner evaluation of the polynomial and its s-derivatives.
    const double p0 = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
    const double p1 = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
    const double p2 = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
    const double p3 = 6.0 * c[3] + s * (24.0 * c[4] + s * 60.0 * c[5]);

    return {p0, p1 / T, p2 / (T * T), p3 / (T * T * T)};
}

}  // namespace softland
